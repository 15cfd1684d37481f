use thiserror::Error;

/// Errors produced by the analysis pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DscError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error(
        "overlap-add normalization vanishes at sample {position} (denominator {denominator:.3e})"
    )]
    NonInvertible { position: usize, denominator: f64 },

    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("clustering stage {stage} left only {remaining} frames")]
    StageCollapse { stage: u8, remaining: usize },

    #[error("found {found} qualifying peaks, need at least 3")]
    InsufficientPeaks { found: usize },

    #[error("out of range: {0}")]
    OutOfRange(String),
}

impl DscError {
    /// Stable machine-readable identifier for the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            DscError::InvalidParameter(_) => "invalid_parameter",
            DscError::InvalidInput(_) => "invalid_input",
            DscError::Shape(_) => "shape_mismatch",
            DscError::NonInvertible { .. } => "non_invertible_config",
            DscError::InsufficientData { .. } => "insufficient_data",
            DscError::StageCollapse { .. } => "stage_collapse",
            DscError::InsufficientPeaks { .. } => "insufficient_peaks",
            DscError::OutOfRange(_) => "out_of_range",
        }
    }
}

pub type Result<T> = std::result::Result<T, DscError>;
