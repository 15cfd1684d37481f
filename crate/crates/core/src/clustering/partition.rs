use serde::{Deserialize, Serialize};

use crate::error::{DscError, Result};
use crate::tfr::MagnitudeSpectrogram;

use super::{dbscan, estimate_epsilon, pairwise_distances, DbscanParams, FrameLabels, OUTLIER};

/// Frames a stage must hand on to the next one.
const MIN_STAGE_FRAMES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DscConfig {
    pub min_pts: usize,
    /// Fixed radius for stage one / stage two instead of the knee estimate.
    pub epsilon_override: [Option<f64>; 2],
}

impl Default for DscConfig {
    fn default() -> Self {
        DscConfig {
            min_pts: 4,
            epsilon_override: [None, None],
        }
    }
}

/// Component a frame was assigned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameClass {
    /// Non-cyclic impulsive disturbance.
    Impulsive,
    /// Cyclic component (signal of interest).
    Cyclic,
    /// Background noise.
    Noise,
}

impl FrameClass {
    pub const ALL: [FrameClass; 3] = [FrameClass::Impulsive, FrameClass::Cyclic, FrameClass::Noise];

    /// 1, 2 or 3.
    pub fn number(self) -> u8 {
        match self {
            FrameClass::Impulsive => 1,
            FrameClass::Cyclic => 2,
            FrameClass::Noise => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageDiagnostics {
    pub stage: u8,
    pub frames: usize,
    pub epsilon: f64,
    pub epsilon_from_knee: bool,
    pub degenerate_knee: bool,
    pub min_pts: usize,
    pub clusters: usize,
    pub outliers: usize,
}

/// Column-exclusive split of a magnitude spectrogram into three parts.
#[derive(Debug, Clone)]
pub struct ClassPartition {
    pub z1: MagnitudeSpectrogram,
    pub z2: MagnitudeSpectrogram,
    pub z3: MagnitudeSpectrogram,
    pub class_of_frame: Vec<FrameClass>,
    pub stages: [StageDiagnostics; 2],
}

impl ClassPartition {
    pub fn part(&self, class: FrameClass) -> &MagnitudeSpectrogram {
        match class {
            FrameClass::Impulsive => &self.z1,
            FrameClass::Cyclic => &self.z2,
            FrameClass::Noise => &self.z3,
        }
    }

    pub fn frames_in(&self, class: FrameClass) -> Vec<usize> {
        self.class_of_frame
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == class)
            .map(|(t, _)| t)
            .collect()
    }

    pub fn count(&self, class: FrameClass) -> usize {
        self.class_of_frame.iter().filter(|&&c| c == class).count()
    }
}

struct StageOutcome {
    labels: FrameLabels,
    diagnostics: StageDiagnostics,
}

fn run_stage(
    spec: &MagnitudeSpectrogram,
    mask: &[bool],
    stage: u8,
    config: &DscConfig,
) -> Result<StageOutcome> {
    let dist = pairwise_distances(spec, Some(mask))?;
    let (epsilon, from_knee, degenerate) = match config.epsilon_override[stage as usize - 1] {
        Some(eps) => (eps, false, false),
        None => {
            let est = estimate_epsilon(&dist, config.min_pts)?;
            // A zero radius only arises when the k-NN distances vanish;
            // the smallest positive radius keeps exact duplicates together.
            (
                est.epsilon.max(f64::MIN_POSITIVE),
                true,
                est.knee.degenerate,
            )
        }
    };
    let labels = dbscan(&dist, &DbscanParams::new(epsilon, config.min_pts)?)?;
    let diagnostics = StageDiagnostics {
        stage,
        frames: dist.len(),
        epsilon,
        epsilon_from_knee: from_knee,
        degenerate_knee: degenerate,
        min_pts: config.min_pts,
        clusters: labels.cluster_count(),
        outliers: labels.outlier_count(),
    };
    Ok(StageOutcome {
        labels,
        diagnostics,
    })
}

/// Two-stage double spectral clustering.
///
/// Stage one clusters all frames; outliers and every cluster but the largest
/// become [`FrameClass::Impulsive`]. Stage two re-estimates the radius on the
/// remaining frames; its outliers are [`FrameClass::Cyclic`] and all clustered
/// frames are [`FrameClass::Noise`].
pub fn dsc_partition(spec: &MagnitudeSpectrogram, config: &DscConfig) -> Result<ClassPartition> {
    if config.min_pts == 0 {
        return Err(DscError::InvalidParameter(
            "min_pts must be at least 1".into(),
        ));
    }
    let frames = spec.frames();
    if frames < MIN_STAGE_FRAMES {
        return Err(DscError::InsufficientData {
            needed: MIN_STAGE_FRAMES,
            got: frames,
        });
    }

    let all = vec![true; frames];
    let first = run_stage(spec, &all, 1, config)?;
    let sizes = first.labels.cluster_sizes();
    // largest cluster, lowest id on ties
    let core_cluster = sizes
        .iter()
        .enumerate()
        .fold(
            None,
            |best: Option<(usize, usize)>, (id, &size)| match best {
                Some((_, s)) if s >= size => best,
                _ => Some((id, size)),
            },
        )
        .map(|(id, _)| id as i32);
    let mut class_of_frame = vec![FrameClass::Impulsive; frames];
    let mut core_mask = vec![false; frames];
    for (t, &label) in first.labels.labels.iter().enumerate() {
        if label != OUTLIER && Some(label) == core_cluster {
            core_mask[t] = true;
        }
    }
    let remaining = core_mask.iter().filter(|&&m| m).count();
    if remaining < MIN_STAGE_FRAMES {
        return Err(DscError::StageCollapse {
            stage: 1,
            remaining,
        });
    }

    let second = run_stage(spec, &core_mask, 2, config)?;
    let core_frames: Vec<usize> = (0..frames).filter(|&t| core_mask[t]).collect();
    for (&t, &label) in core_frames.iter().zip(&second.labels.labels) {
        class_of_frame[t] = if label == OUTLIER {
            FrameClass::Cyclic
        } else {
            FrameClass::Noise
        };
    }

    let bins = spec.bins();
    let mut parts = [
        vec![0.0; bins * frames],
        vec![0.0; bins * frames],
        vec![0.0; bins * frames],
    ];
    for (t, class) in class_of_frame.iter().enumerate() {
        let idx = class.number() as usize - 1;
        parts[idx][t * bins..(t + 1) * bins].copy_from_slice(spec.frame(t));
    }
    let [p1, p2, p3] = parts;
    Ok(ClassPartition {
        z1: spec.with_values(p1)?,
        z2: spec.with_values(p2)?,
        z3: spec.with_values(p3)?,
        class_of_frame,
        stages: [first.diagnostics, second.diagnostics],
    })
}
