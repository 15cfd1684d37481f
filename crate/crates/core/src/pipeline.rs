//! End-to-end analysis: spectrogram, double clustering, per-class
//! reconstruction, envelope spectra and fault-frequency identification.

use serde::{Deserialize, Serialize};

use crate::clustering::{dsc_partition, ClassPartition, DscConfig, FrameClass};
use crate::envelope::{
    envsi, identify_fault_frequency, squared_envelope_spectrum, EnvelopeSpectrum, EnvsiConfig,
    FaultFrequency, PeakConfig,
};
use crate::error::{DscError, Result};
use crate::signal::Signal;
use crate::tfr::{
    griffin_lim, magnitude, stft, GriffinLimConfig, MagnitudeSpectrogram, StftConfig,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub stft: StftConfig,
    pub dsc: DscConfig,
    pub griffin_lim: GriffinLimConfig,
    pub harmonics: usize,
    pub tolerance_bins: usize,
    pub prominence_fraction: f64,
    /// Peak search band; defaults to `(0, 20 f]` for a known fault frequency, else `(0, 500]`.
    pub search_band: Option<(f64, f64)>,
    /// Reconstruct classes 1 and 3 as well as the cyclic class.
    pub reconstruct_all: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            stft: StftConfig::default(),
            dsc: DscConfig::default(),
            griffin_lim: GriffinLimConfig::default(),
            harmonics: 8,
            tolerance_bins: 2,
            prominence_fraction: 0.3,
            search_band: None,
            reconstruct_all: true,
        }
    }
}

impl PipelineConfig {
    /// Checks every parameter before any computation starts.
    pub fn validate(&self) -> Result<()> {
        self.stft.validate()?;
        if self.dsc.min_pts == 0 {
            return Err(DscError::InvalidParameter(
                "min_pts must be at least 1".into(),
            ));
        }
        for eps in self.dsc.epsilon_override.iter().flatten() {
            if !(eps.is_finite() && *eps >= 0.0) {
                return Err(DscError::InvalidParameter(format!(
                    "epsilon override {eps}"
                )));
            }
        }
        if self.griffin_lim.iterations == 0 {
            return Err(DscError::InvalidParameter(
                "Griffin-Lim needs at least one iteration".into(),
            ));
        }
        if self.harmonics == 0 {
            return Err(DscError::InvalidParameter(
                "harmonics must be at least 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.prominence_fraction) {
            return Err(DscError::InvalidParameter(format!(
                "prominence fraction {} outside [0, 1]",
                self.prominence_fraction
            )));
        }
        if let Some((lo, hi)) = self.search_band {
            if !(lo >= 0.0 && hi > lo) {
                return Err(DscError::InvalidParameter(format!(
                    "search band ({lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    pub fn envsi_config(&self, fault_freq: f64) -> EnvsiConfig {
        EnvsiConfig {
            fault_freq,
            harmonics: self.harmonics,
            tolerance_bins: self.tolerance_bins,
        }
    }

    pub fn peak_config(&self, expected: Option<f64>) -> PeakConfig {
        let band = match (self.search_band, expected) {
            (Some(b), _) => b,
            (None, Some(f)) => PeakConfig::for_expected(f).band,
            (None, None) => PeakConfig::default().band,
        };
        PeakConfig {
            prominence_fraction: self.prominence_fraction,
            band,
        }
    }
}

/// Reconstruction and indicators for one class.
#[derive(Debug, Clone)]
pub struct ClassResult {
    pub class: FrameClass,
    pub frames: usize,
    pub signal: Signal,
    pub residual: f64,
    pub ses: EnvelopeSpectrum,
    pub envsi: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub spectrogram: MagnitudeSpectrogram,
    pub partition: ClassPartition,
    pub raw_ses: EnvelopeSpectrum,
    pub raw_envsi: Option<f64>,
    /// Reconstructed classes; the cyclic class is always present.
    pub classes: Vec<ClassResult>,
    /// Fault frequency identified from the cyclic class.
    pub fault: std::result::Result<FaultFrequency, DscError>,
    /// Frequency the ENVSI values were evaluated at.
    pub envsi_freq: Option<f64>,
}

impl Analysis {
    pub fn class(&self, class: FrameClass) -> Option<&ClassResult> {
        self.classes.iter().find(|c| c.class == class)
    }

    pub fn class_envsi(&self, class: FrameClass) -> Option<f64> {
        self.class(class).and_then(|c| c.envsi)
    }

    pub fn detected_within(&self, expected: f64, tolerance: f64) -> bool {
        self.fault
            .as_ref()
            .is_ok_and(|f| (f.frequency - expected).abs() <= tolerance)
    }
}

/// ENVSI at `freq`, or `None` when the harmonics do not fit the spectrum.
pub fn envsi_at(
    ses: &EnvelopeSpectrum,
    config: &PipelineConfig,
    freq: Option<f64>,
) -> Result<Option<f64>> {
    match freq {
        None => Ok(None),
        Some(f) => match envsi(ses, &config.envsi_config(f)) {
            Ok(v) => Ok(Some(v)),
            Err(DscError::OutOfRange(_)) => Ok(None),
            Err(e) => Err(e),
        },
    }
}

/// Runs the full procedure on `signal`.
///
/// `expected_freq` is the known fault frequency, if any; it sets the peak
/// search band and the frequency ENVSI is evaluated at. Without it ENVSI uses
/// the frequency identified from the cyclic class.
pub fn analyze(
    signal: &Signal,
    config: &PipelineConfig,
    expected_freq: Option<f64>,
) -> Result<Analysis> {
    config.validate()?;
    let spectrogram = magnitude(&stft(signal, &config.stft)?);
    let partition = dsc_partition(&spectrogram, &config.dsc)?;

    let wanted: Vec<FrameClass> = if config.reconstruct_all {
        FrameClass::ALL.to_vec()
    } else {
        vec![FrameClass::Cyclic]
    };
    let mut reconstructed = Vec::with_capacity(wanted.len());
    for class in wanted {
        let rec = griffin_lim(partition.part(class), &config.griffin_lim)?;
        let ses = squared_envelope_spectrum(&rec.signal)?;
        reconstructed.push((class, rec, ses));
    }

    let cyclic_ses = &reconstructed
        .iter()
        .find(|(c, _, _)| *c == FrameClass::Cyclic)
        .expect("cyclic class is always reconstructed")
        .2;
    let fault = identify_fault_frequency(cyclic_ses, &config.peak_config(expected_freq));
    let envsi_freq = expected_freq.or_else(|| fault.as_ref().ok().map(|f| f.frequency));

    let raw_ses = squared_envelope_spectrum(signal)?;
    let raw_envsi = envsi_at(&raw_ses, config, envsi_freq)?;
    let mut classes = Vec::with_capacity(reconstructed.len());
    for (class, rec, ses) in reconstructed {
        let envsi = envsi_at(&ses, config, envsi_freq)?;
        classes.push(ClassResult {
            class,
            frames: partition.count(class),
            residual: rec.residual(),
            signal: rec.signal,
            ses,
            envsi,
        });
    }
    Ok(Analysis {
        spectrogram,
        partition,
        raw_ses,
        raw_envsi,
        classes,
        fault,
        envsi_freq,
    })
}
