//! Separation of cyclic fault impulses from non-cyclic impulsive disturbances
//! and Gaussian noise by clustering the frames of a spectrogram twice
//! (double spectral clustering, DSC).
//!
//! The usual flow is [`simulate`] (or a recorded [`Signal`]) into
//! [`analyze`], which computes the spectrogram, partitions its frames with
//! [`dsc_partition`], reconstructs each class with [`griffin_lim`] and scores
//! the result with the envelope-spectrum indicator [`envsi`].
//! [`selectors`] holds the band-selector baselines and [`montecarlo`] the
//! grid evaluation.

pub mod clustering;
pub mod envelope;
pub mod error;
pub mod montecarlo;
pub mod pipeline;
pub mod seed;
pub mod selectors;
pub mod signal;
pub mod stats;
pub mod tfr;

pub use clustering::{dbscan, dsc_partition, ClassPartition, DbscanParams, DscConfig, FrameClass};
pub use envelope::{
    envsi, identify_fault_frequency, squared_envelope_spectrum, EnvelopeSpectrum, EnvsiConfig,
    FaultFrequency, PeakConfig,
};
pub use error::{DscError, Result};
pub use montecarlo::{run_grid, summarize, McGrid, McReport};
pub use pipeline::{analyze, Analysis, PipelineConfig};
pub use selectors::{selector_curve, selector_filter, SelectorCurve, SelectorKind, StableFit};
pub use signal::{simulate, Signal, SimulationConfig};
pub use tfr::{
    griffin_lim, istft, magnitude, stft, ComplexSpectrogram, GriffinLimConfig,
    MagnitudeSpectrogram, StftConfig,
};
