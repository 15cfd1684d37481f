//! Shared inputs for the criterion benchmarks.

use dsc_core::{simulate, MagnitudeSpectrogram, Signal, SimulationConfig, StftConfig};

/// The default two-second scenario (σ = 0.6, γ = 3).
pub fn default_signal() -> Signal {
    simulate(&SimulationConfig::default())
        .expect("default scenario is valid")
        .signal
}

pub fn default_spectrogram() -> MagnitudeSpectrogram {
    let stft = dsc_core::stft(&default_signal(), &StftConfig::default()).expect("valid STFT");
    dsc_core::magnitude(&stft)
}
