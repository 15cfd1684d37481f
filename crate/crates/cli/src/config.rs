//! The JSON run configuration shared by all subcommands.
//!
//! Every section is optional and falls back to the standard simulation
//! defaults; unknown keys anywhere in the document are rejected.

use std::path::Path;

use dsc_core::montecarlo::McGrid;
use dsc_core::{PipelineConfig, SimulationConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub simulation: SimulationConfig,
    pub pipeline: PipelineConfig,
    /// Known fault frequency in Hz. Sets the peak search band and the
    /// frequency ENVSI is evaluated at.
    pub expected_freq: Option<f64>,
    /// Allowed deviation of the identified frequency from `expected_freq`.
    pub tolerance_hz: f64,
    pub montecarlo: GridSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            simulation: SimulationConfig::default(),
            pipeline: PipelineConfig::default(),
            expected_freq: None,
            tolerance_hz: 0.5,
            montecarlo: GridSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub sigma_levels: Vec<f64>,
    pub gamma_levels: Vec<f64>,
    pub iterations: usize,
    pub base_seed: u64,
}

impl Default for GridSection {
    fn default() -> Self {
        let desk = McGrid::desk();
        GridSection {
            sigma_levels: desk.sigma_levels,
            gamma_levels: desk.gamma_levels,
            iterations: desk.iterations,
            base_seed: desk.base_seed,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path`, or returns the defaults when no path is given.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                RunConfig::parse(&text)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.pipeline.validate()?;
        if let Some(f) = self.expected_freq {
            if !(f.is_finite() && f > 0.0) {
                return Err(CliError::Config(format!(
                    "expected_freq must be positive, got {f}"
                )));
            }
        }
        if !(self.tolerance_hz.is_finite() && self.tolerance_hz >= 0.0) {
            return Err(CliError::Config(format!(
                "tolerance_hz {}",
                self.tolerance_hz
            )));
        }
        self.grid(false).validate()?;
        Ok(())
    }

    /// Monte Carlo grid; `full` swaps in the 100 x 6 x 7 preset.
    pub fn grid(&self, full: bool) -> McGrid {
        let mut grid = McGrid {
            sigma_levels: self.montecarlo.sigma_levels.clone(),
            gamma_levels: self.montecarlo.gamma_levels.clone(),
            iterations: self.montecarlo.iterations,
            base_seed: self.montecarlo.base_seed,
            simulation: self.simulation.clone(),
            pipeline: self.pipeline.clone(),
            tolerance_hz: self.tolerance_hz,
        };
        if full {
            let preset = McGrid::full();
            grid.sigma_levels = preset.sigma_levels;
            grid.gamma_levels = preset.gamma_levels;
            grid.iterations = preset.iterations;
        }
        grid
    }
}
