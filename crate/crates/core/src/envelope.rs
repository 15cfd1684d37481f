//! Squared envelope spectrum, the ENVSI harmonic-energy indicator and
//! fault-frequency identification from SES peak spacing.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{DscError, Result};
use crate::signal::Signal;
use crate::stats::median;

const MIN_SES_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSpectrum {
    pub amplitudes: Vec<f64>,
    pub freqs: Vec<f64>,
    pub source_len: usize,
}

impl EnvelopeSpectrum {
    /// Frequency step between bins.
    pub fn resolution(&self) -> f64 {
        self.freqs.get(1).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> EnvelopeSpectrum {
        EnvelopeSpectrum {
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
            ..self.clone()
        }
    }
}

/// Squared envelope spectrum of `signal`.
///
/// The envelope is the modulus of the analytic signal, built by zeroing the
/// negative-frequency half of the spectrum and doubling the positive half. The
/// SES is `|DFT(e^2 - mean(e^2))| / N`, one-sided.
pub fn squared_envelope_spectrum(signal: &Signal) -> Result<EnvelopeSpectrum> {
    let n = signal.len();
    if n < MIN_SES_LEN {
        return Err(DscError::InvalidInput(format!(
            "envelope spectrum needs at least {MIN_SES_LEN} samples, got {n}"
        )));
    }
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);

    let mut buf: Vec<Complex64> = signal
        .samples()
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .collect();
    forward.process(&mut buf);
    let half = n / 2;
    for (k, z) in buf.iter_mut().enumerate() {
        let gain = if k == 0 || (n.is_multiple_of(2) && k == half) {
            1.0
        } else if k <= half {
            2.0
        } else {
            0.0
        };
        *z *= gain;
    }
    inverse.process(&mut buf);
    let scale = 1.0 / n as f64;
    let squared: Vec<f64> = buf.iter().map(|z| (z * scale).norm_sqr()).collect();
    let mean = squared.iter().sum::<f64>() / n as f64;

    let mut spec: Vec<Complex64> = squared
        .iter()
        .map(|&e| Complex64::new(e - mean, 0.0))
        .collect();
    forward.process(&mut spec);
    let bins = half + 1;
    let fs = signal.sample_rate();
    Ok(EnvelopeSpectrum {
        amplitudes: spec[..bins].iter().map(|z| z.norm() * scale).collect(),
        freqs: (0..bins).map(|k| k as f64 * fs / n as f64).collect(),
        source_len: n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvsiConfig {
    pub fault_freq: f64,
    pub harmonics: usize,
    /// Half-width of the search window around each nominal harmonic bin.
    pub tolerance_bins: usize,
}

impl Default for EnvsiConfig {
    fn default() -> Self {
        EnvsiConfig {
            fault_freq: 30.7,
            harmonics: 8,
            tolerance_bins: 2,
        }
    }
}

/// Share of SES energy (DC excluded, up to the last harmonic) carried by the
/// fault-frequency harmonics. Each harmonic contributes the largest bin
/// within `tolerance_bins` of its nominal position; a bin is never counted twice.
pub fn envsi(ses: &EnvelopeSpectrum, config: &EnvsiConfig) -> Result<f64> {
    if config.harmonics == 0 {
        return Err(DscError::InvalidParameter(
            "at least one harmonic is required".into(),
        ));
    }
    if !(config.fault_freq.is_finite() && config.fault_freq > 0.0) {
        return Err(DscError::InvalidParameter(format!(
            "fault frequency must be positive, got {}",
            config.fault_freq
        )));
    }
    let df = ses.resolution();
    if df <= 0.0 {
        return Err(DscError::InvalidInput(
            "envelope spectrum has a single bin".into(),
        ));
    }
    let tol = config.tolerance_bins;
    let last_nominal = (config.harmonics as f64 * config.fault_freq / df).round() as usize;
    let upper = last_nominal + tol;
    if upper >= ses.len() {
        return Err(DscError::OutOfRange(format!(
            "harmonic {} of {} Hz lies beyond the {:.1} Hz envelope spectrum",
            config.harmonics,
            config.fault_freq,
            ses.freqs[ses.len() - 1]
        )));
    }

    let amps = &ses.amplitudes;
    let mut picked: Vec<usize> = (1..=config.harmonics)
        .map(|i| {
            let nominal = (i as f64 * config.fault_freq / df).round() as usize;
            let lo = nominal.saturating_sub(tol).max(1);
            let hi = nominal + tol;
            (lo..=hi)
                .max_by(|&a, &b| amps[a].total_cmp(&amps[b]).then(b.cmp(&a)))
                .expect("window is non-empty")
        })
        .collect();
    picked.sort_unstable();
    picked.dedup();

    let numerator: f64 = picked.iter().map(|&k| amps[k] * amps[k]).sum();
    let denominator: f64 = amps[1..=upper].iter().map(|a| a * a).sum();
    if denominator == 0.0 {
        return Ok(0.0);
    }
    Ok((numerator / denominator).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PeakConfig {
    /// Minimum prominence relative to the largest amplitude in the band.
    pub prominence_fraction: f64,
    /// Search band in Hz; the lower edge is exclusive.
    pub band: (f64, f64),
}

impl Default for PeakConfig {
    fn default() -> Self {
        PeakConfig {
            prominence_fraction: 0.3,
            band: (0.0, 500.0),
        }
    }
}

impl PeakConfig {
    /// Band `(0, 20 f]` around an expected fault frequency.
    pub fn for_expected(freq: f64) -> Self {
        PeakConfig {
            band: (0.0, 20.0 * freq),
            ..PeakConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub bin: usize,
    pub freq: f64,
    pub amplitude: f64,
    pub prominence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultFrequency {
    pub frequency: f64,
    pub peaks: Vec<Peak>,
}

/// Local maxima of `data` with their topographic prominence.
///
/// Plateaus report their middle sample. The prominence is the height above the
/// higher of the two lowest points reached before meeting a taller sample (or
/// the edge) on either side.
fn peaks_with_prominence(data: &[f64]) -> Vec<(usize, f64)> {
    let n = data.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if data[i] > data[i - 1] {
            let mut ahead = i + 1;
            while ahead < n && data[ahead] == data[i] {
                ahead += 1;
            }
            if ahead < n && data[ahead] < data[i] {
                let peak = (i + ahead - 1) / 2;
                let height = data[peak];
                let mut left_min = height;
                for j in (0..i).rev() {
                    if data[j] > height {
                        break;
                    }
                    left_min = left_min.min(data[j]);
                }
                let mut right_min = height;
                for &v in &data[ahead..] {
                    if v > height {
                        break;
                    }
                    right_min = right_min.min(v);
                }
                out.push((peak, height - left_min.max(right_min)));
            }
            i = ahead;
        } else {
            i += 1;
        }
    }
    out
}

/// Fault frequency as the median spacing between prominent SES peaks in the band.
pub fn identify_fault_frequency(
    ses: &EnvelopeSpectrum,
    config: &PeakConfig,
) -> Result<FaultFrequency> {
    let (lo, hi) = config.band;
    if !(lo >= 0.0 && hi > lo) {
        return Err(DscError::InvalidParameter(format!(
            "invalid search band ({lo}, {hi}]"
        )));
    }
    let nyquist = ses.freqs.last().copied().unwrap_or(0.0);
    if hi > nyquist {
        return Err(DscError::OutOfRange(format!(
            "search band up to {hi} Hz exceeds the {nyquist:.1} Hz envelope spectrum"
        )));
    }
    let first = ses.freqs.iter().position(|&f| f > lo).unwrap_or(ses.len());
    let last = ses.freqs.iter().rposition(|&f| f <= hi).unwrap_or(0);
    if last < first {
        return Err(DscError::InsufficientPeaks { found: 0 });
    }
    let band = &ses.amplitudes[first..=last];
    let band_max = band.iter().fold(0.0f64, |m, &v| m.max(v));
    let threshold = config.prominence_fraction * band_max;
    let peaks: Vec<Peak> = peaks_with_prominence(band)
        .into_iter()
        .filter(|&(_, prom)| prom > 0.0 && prom >= threshold)
        .map(|(i, prominence)| Peak {
            bin: first + i,
            freq: ses.freqs[first + i],
            amplitude: band[i],
            prominence,
        })
        .collect();
    if peaks.len() < 3 {
        return Err(DscError::InsufficientPeaks { found: peaks.len() });
    }
    let spacings: Vec<f64> = peaks.windows(2).map(|w| w[1].freq - w[0].freq).collect();
    Ok(FaultFrequency {
        frequency: median(&spacings),
        peaks,
    })
}
