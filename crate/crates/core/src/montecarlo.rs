//! Monte Carlo evaluation over a grid of noise levels and impulse rates.
//!
//! Every iteration draws its own seed from `(base_seed, sigma index, gamma
//! index, iteration)`, so results do not depend on scheduling or on the order
//! in which cells are run.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::FrameClass;
use crate::error::{DscError, Result};
use crate::pipeline::{analyze, PipelineConfig};
use crate::seed::derive_seed;
use crate::signal::{simulate, GaussParams, SimulationConfig};
use crate::stats::BoxplotStats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McGrid {
    pub sigma_levels: Vec<f64>,
    pub gamma_levels: Vec<f64>,
    pub iterations: usize,
    pub base_seed: u64,
    /// Scenario template; noise level, impulse rate and seed are overwritten per run.
    pub simulation: SimulationConfig,
    pub pipeline: PipelineConfig,
    /// Allowed deviation of the identified frequency, Hz.
    pub tolerance_hz: f64,
}

impl Default for McGrid {
    fn default() -> Self {
        McGrid::desk()
    }
}

impl McGrid {
    /// 20 iterations over σ ∈ {0.6, 1.0, 1.6} and γ ∈ {1, 3, 7}.
    pub fn desk() -> Self {
        McGrid {
            sigma_levels: vec![0.6, 1.0, 1.6],
            gamma_levels: vec![1.0, 3.0, 7.0],
            iterations: 20,
            base_seed: 0,
            simulation: SimulationConfig::default(),
            pipeline: PipelineConfig::default(),
            tolerance_hz: 0.5,
        }
    }

    /// 100 iterations over σ ∈ {0.6, 0.8, ..., 1.6} and γ ∈ {1, ..., 7}.
    pub fn full() -> Self {
        McGrid {
            sigma_levels: vec![0.6, 0.8, 1.0, 1.2, 1.4, 1.6],
            gamma_levels: (1..=7).map(f64::from).collect(),
            iterations: 100,
            ..McGrid::desk()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(DscError::InvalidParameter(
                "iterations must be at least 1".into(),
            ));
        }
        if self.sigma_levels.is_empty() || self.gamma_levels.is_empty() {
            return Err(DscError::InvalidParameter(
                "sigma and gamma levels must be non-empty".into(),
            ));
        }
        if self.tolerance_hz.is_nan() || self.tolerance_hz < 0.0 {
            return Err(DscError::InvalidParameter(format!(
                "tolerance {} Hz",
                self.tolerance_hz
            )));
        }
        Ok(())
    }

    /// Fault frequency the runs are scored against.
    pub fn expected_freq(&self) -> Option<f64> {
        self.simulation.soi.map(|s| s.mod_freq)
    }

    /// All `(sigma index, gamma index)` pairs in row-major order.
    pub fn cells(&self) -> Vec<(usize, usize)> {
        (0..self.sigma_levels.len())
            .flat_map(|s| (0..self.gamma_levels.len()).map(move |g| (s, g)))
            .collect()
    }

    pub fn run_seed(&self, sigma_index: usize, gamma_index: usize, iteration: usize) -> u64 {
        derive_seed(
            self.base_seed,
            &[sigma_index as u64, gamma_index as u64, iteration as u64],
        )
    }

    pub fn scenario(
        &self,
        sigma_index: usize,
        gamma_index: usize,
        iteration: usize,
    ) -> SimulationConfig {
        let mut sim = self.simulation.clone();
        sim.gauss = GaussParams {
            sigma: self.sigma_levels[sigma_index],
        };
        sim.impulses.rate_per_second = self.gamma_levels[gamma_index];
        sim.seed = self.run_seed(sigma_index, gamma_index, iteration);
        sim
    }
}

/// Outcome of one simulated signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationResult {
    pub iteration: usize,
    pub seed: u64,
    pub raw_envsi: Option<f64>,
    pub impulsive_envsi: Option<f64>,
    pub cyclic_envsi: Option<f64>,
    pub noise_envsi: Option<f64>,
    pub frequency: Option<f64>,
    pub detected: bool,
    /// Error code when the run or the frequency search failed.
    pub failure: Option<String>,
}

impl IterationResult {
    pub fn class_envsi(&self, class: FrameClass) -> Option<f64> {
        match class {
            FrameClass::Impulsive => self.impulsive_envsi,
            FrameClass::Cyclic => self.cyclic_envsi,
            FrameClass::Noise => self.noise_envsi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub sigma_index: usize,
    pub gamma_index: usize,
    pub sigma: f64,
    pub gamma: f64,
    pub runs: Vec<IterationResult>,
}

pub fn run_iteration(
    grid: &McGrid,
    sigma_index: usize,
    gamma_index: usize,
    iteration: usize,
) -> IterationResult {
    let sim = grid.scenario(sigma_index, gamma_index, iteration);
    let expected = grid.expected_freq();
    let mut result = IterationResult {
        iteration,
        seed: sim.seed,
        raw_envsi: None,
        impulsive_envsi: None,
        cyclic_envsi: None,
        noise_envsi: None,
        frequency: None,
        detected: false,
        failure: None,
    };
    let analysis = match simulate(&sim).and_then(|s| analyze(&s.signal, &grid.pipeline, expected)) {
        Ok(a) => a,
        Err(e) => {
            result.failure = Some(e.code().to_string());
            return result;
        }
    };
    result.raw_envsi = analysis.raw_envsi;
    result.impulsive_envsi = analysis.class_envsi(FrameClass::Impulsive);
    result.cyclic_envsi = analysis.class_envsi(FrameClass::Cyclic);
    result.noise_envsi = analysis.class_envsi(FrameClass::Noise);
    match &analysis.fault {
        Ok(f) => {
            result.frequency = Some(f.frequency);
            result.detected =
                expected.is_some_and(|e| (f.frequency - e).abs() <= grid.tolerance_hz);
        }
        Err(e) => result.failure = Some(e.code().to_string()),
    }
    result
}

pub fn run_cell(grid: &McGrid, sigma_index: usize, gamma_index: usize) -> Result<CellResult> {
    Ok(run_cells(grid, &[(sigma_index, gamma_index)])?.remove(0))
}

/// Runs the listed cells; iterations of all cells are scheduled together.
pub fn run_cells(grid: &McGrid, cells: &[(usize, usize)]) -> Result<Vec<CellResult>> {
    grid.validate()?;
    for &(s, g) in cells {
        if s >= grid.sigma_levels.len() || g >= grid.gamma_levels.len() {
            return Err(DscError::InvalidParameter(format!(
                "cell ({s}, {g}) is outside the grid"
            )));
        }
    }
    let jobs: Vec<(usize, usize, usize)> = cells
        .iter()
        .flat_map(|&(s, g)| (0..grid.iterations).map(move |i| (s, g, i)))
        .collect();
    let runs: Vec<IterationResult> = jobs
        .par_iter()
        .map(|&(s, g, i)| run_iteration(grid, s, g, i))
        .collect();
    Ok(cells
        .iter()
        .zip(runs.chunks(grid.iterations))
        .map(|(&(s, g), chunk)| CellResult {
            sigma_index: s,
            gamma_index: g,
            sigma: grid.sigma_levels[s],
            gamma: grid.gamma_levels[g],
            runs: chunk.to_vec(),
        })
        .collect())
}

pub fn run_grid(grid: &McGrid) -> Result<Vec<CellResult>> {
    run_cells(grid, &grid.cells())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub sigma: f64,
    pub gamma: f64,
    pub iterations: usize,
    pub detections: usize,
    pub detection_rate: f64,
    pub raw: Option<BoxplotStats>,
    pub impulsive: Option<BoxplotStats>,
    pub cyclic: Option<BoxplotStats>,
    pub noise: Option<BoxplotStats>,
    /// Failure code -> count.
    pub failures: BTreeMap<String, usize>,
}

impl CellSummary {
    pub fn from_runs(sigma: f64, gamma: f64, runs: &[IterationResult]) -> Self {
        let collect = |f: &dyn Fn(&IterationResult) -> Option<f64>| -> Option<BoxplotStats> {
            let values: Vec<f64> = runs.iter().filter_map(f).collect();
            BoxplotStats::from_samples(&values)
        };
        let detections = runs.iter().filter(|r| r.detected).count();
        let mut failures = BTreeMap::new();
        for code in runs.iter().filter_map(|r| r.failure.as_ref()) {
            *failures.entry(code.clone()).or_insert(0) += 1;
        }
        CellSummary {
            sigma,
            gamma,
            iterations: runs.len(),
            detections,
            detection_rate: if runs.is_empty() {
                0.0
            } else {
                detections as f64 / runs.len() as f64
            },
            raw: collect(&|r| r.raw_envsi),
            impulsive: collect(&|r| r.impulsive_envsi),
            cyclic: collect(&|r| r.cyclic_envsi),
            noise: collect(&|r| r.noise_envsi),
            failures,
        }
    }

    pub fn class(&self, class: FrameClass) -> Option<&BoxplotStats> {
        match class {
            FrameClass::Impulsive => self.impulsive.as_ref(),
            FrameClass::Cyclic => self.cyclic.as_ref(),
            FrameClass::Noise => self.noise.as_ref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub sigma_levels: Vec<f64>,
    pub gamma_levels: Vec<f64>,
    pub iterations: usize,
    pub base_seed: u64,
    pub tolerance_hz: f64,
    /// Row-major over (sigma, gamma); `None` for cells that were not run.
    pub cells: Vec<Option<CellSummary>>,
    /// `detection_rate[s][g]`; NaN-free, cells not run report 0.
    pub detection_rate: Vec<Vec<f64>>,
}

impl McReport {
    pub fn cell(&self, sigma_index: usize, gamma_index: usize) -> Option<&CellSummary> {
        self.cells
            .get(sigma_index * self.gamma_levels.len() + gamma_index)
            .and_then(Option::as_ref)
    }

    /// Mean detection rate over gamma for each sigma level.
    pub fn mean_rate_by_sigma(&self) -> Vec<f64> {
        self.detection_rate
            .iter()
            .map(|row| row.iter().sum::<f64>() / row.len() as f64)
            .collect()
    }
}

/// Aggregates cell results in grid order, whatever order they arrive in.
pub fn summarize(grid: &McGrid, results: &[CellResult]) -> Result<McReport> {
    if results.is_empty() {
        return Err(DscError::InsufficientData { needed: 1, got: 0 });
    }
    let (ns, ng) = (grid.sigma_levels.len(), grid.gamma_levels.len());
    let mut cells: Vec<Option<CellSummary>> = vec![None; ns * ng];
    let mut detection_rate = vec![vec![0.0; ng]; ns];
    for cell in results {
        if cell.sigma_index >= ns || cell.gamma_index >= ng {
            return Err(DscError::Shape(format!(
                "cell ({}, {}) does not belong to a {ns} x {ng} grid",
                cell.sigma_index, cell.gamma_index
            )));
        }
        let mut runs = cell.runs.clone();
        runs.sort_by_key(|r| r.iteration);
        let summary = CellSummary::from_runs(cell.sigma, cell.gamma, &runs);
        detection_rate[cell.sigma_index][cell.gamma_index] = summary.detection_rate;
        cells[cell.sigma_index * ng + cell.gamma_index] = Some(summary);
    }
    Ok(McReport {
        sigma_levels: grid.sigma_levels.clone(),
        gamma_levels: grid.gamma_levels.clone(),
        iterations: grid.iterations,
        base_seed: grid.base_seed,
        tolerance_hz: grid.tolerance_hz,
        cells,
        detection_rate,
    })
}
