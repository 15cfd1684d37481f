//! JSON reports written by `analyze` and `selectors`. The shapes are pinned
//! by the schemas under `schemas/`.

use dsc_core::clustering::StageDiagnostics;
use dsc_core::envelope::Peak;
use dsc_core::{Analysis, FrameClass, SelectorKind, Signal};
use serde::{Deserialize, Serialize};

pub const ANALYSIS_SCHEMA: &str = include_str!("../schemas/analysis_report.schema.json");
pub const SELECTORS_SCHEMA: &str = include_str!("../schemas/selectors_report.schema.json");
pub const MONTECARLO_SCHEMA: &str = include_str!("../schemas/montecarlo_report.schema.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputInfo {
    pub path: String,
    pub sample_rate: f64,
    pub samples: usize,
}

impl InputInfo {
    pub fn new(path: &std::path::Path, signal: &Signal) -> Self {
        InputInfo {
            path: path.display().to_string(),
            sample_rate: signal.sample_rate(),
            samples: signal.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassReport {
    pub class: FrameClass,
    pub number: u8,
    pub frames: usize,
    pub envsi: Option<f64>,
    pub reconstruction_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultReport {
    pub frequency: Option<f64>,
    /// Error code when no frequency could be identified.
    pub error: Option<String>,
    pub expected: Option<f64>,
    pub tolerance_hz: f64,
    /// `None` without an expected frequency or without an identified one.
    pub within_tolerance: Option<bool>,
    pub peaks: Vec<Peak>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisReport {
    pub input: InputInfo,
    /// Frequency the ENVSI values refer to.
    pub envsi_freq: Option<f64>,
    pub raw_envsi: Option<f64>,
    pub classes: Vec<ClassReport>,
    pub fault: FaultReport,
    pub stages: Vec<StageDiagnostics>,
    pub elapsed_seconds: f64,
}

impl AnalysisReport {
    pub fn new(
        input: InputInfo,
        analysis: &Analysis,
        expected: Option<f64>,
        tolerance_hz: f64,
        elapsed_seconds: f64,
    ) -> Self {
        let (frequency, error, peaks) = match &analysis.fault {
            Ok(f) => (Some(f.frequency), None, f.peaks.clone()),
            Err(e) => (None, Some(e.code().to_string()), Vec::new()),
        };
        let within_tolerance = match (frequency, expected) {
            (Some(f), Some(e)) => Some((f - e).abs() <= tolerance_hz),
            _ => None,
        };
        AnalysisReport {
            input,
            envsi_freq: analysis.envsi_freq,
            raw_envsi: analysis.raw_envsi,
            classes: analysis
                .classes
                .iter()
                .map(|c| ClassReport {
                    class: c.class,
                    number: c.class.number(),
                    frames: c.frames,
                    envsi: c.envsi,
                    reconstruction_residual: c.residual,
                })
                .collect(),
            fault: FaultReport {
                frequency,
                error,
                expected,
                tolerance_hz,
                within_tolerance,
                peaks,
            },
            stages: analysis.partition.stages.to_vec(),
            elapsed_seconds,
        }
    }

    pub fn class_envsi(&self, class: FrameClass) -> Option<f64> {
        self.classes
            .iter()
            .find(|c| c.class == class)
            .and_then(|c| c.envsi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectorReport {
    pub kind: SelectorKind,
    pub envsi: Option<f64>,
    /// Centre frequency of the bin with the largest selector value.
    pub peak_freq: Option<f64>,
    pub degenerate_bins: usize,
    pub bins: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectorsReport {
    pub input: InputInfo,
    pub envsi_freq: Option<f64>,
    pub raw_envsi: Option<f64>,
    pub dsc_envsi: Option<f64>,
    pub selectors: Vec<SelectorReport>,
    /// Method with the highest ENVSI ("raw", "dsc" or a selector name).
    pub best: Option<String>,
    pub elapsed_seconds: f64,
}

impl SelectorsReport {
    pub fn pick_best(&mut self) {
        let mut candidates: Vec<(String, f64)> = Vec::new();
        candidates.extend(self.raw_envsi.map(|v| ("raw".to_string(), v)));
        candidates.extend(self.dsc_envsi.map(|v| ("dsc".to_string(), v)));
        for s in &self.selectors {
            candidates.extend(s.envsi.map(|v| (s.kind.short_name().to_string(), v)));
        }
        self.best = candidates
            .into_iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(name, _)| name);
    }
}
