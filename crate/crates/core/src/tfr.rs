//! Short-time Fourier analysis, overlap-add synthesis and Griffin-Lim phase
//! reconstruction.
//!
//! Spectrograms are one-sided (`fft_len / 2 + 1` bins) and stored frame-major:
//! each frame's spectral vector is contiguous, which is the access pattern of
//! the clustering code. Per-bin time series are gathered with [`Spectrogram::bin`].

use std::f64::consts::TAU;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{DscError, Result};
use crate::signal::Signal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowShape {
    /// Periodic Hann.
    Hann,
    /// Periodic Hamming.
    Hamming,
    Rectangular,
}

impl WindowShape {
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        let n = len as f64;
        (0..len)
            .map(|i| {
                let phase = TAU * i as f64 / n;
                match self {
                    WindowShape::Hann => 0.5 - 0.5 * phase.cos(),
                    WindowShape::Hamming => 0.54 - 0.46 * phase.cos(),
                    WindowShape::Rectangular => 1.0,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StftConfig {
    pub window_len: usize,
    pub fft_len: usize,
    pub overlap_fraction: f64,
    pub window: WindowShape,
}

impl Default for StftConfig {
    fn default() -> Self {
        StftConfig {
            window_len: 256,
            fft_len: 512,
            overlap_fraction: 0.85,
            window: WindowShape::Hann,
        }
    }
}

impl StftConfig {
    /// Frame advance in samples: `floor((1 - overlap) * window_len)`.
    pub fn hop(&self) -> usize {
        ((1.0 - self.overlap_fraction) * self.window_len as f64).floor() as usize
    }

    pub fn bins(&self) -> usize {
        self.fft_len / 2 + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_len == 0 || self.window_len > self.fft_len {
            return Err(DscError::InvalidParameter(format!(
                "need 0 < window_len <= fft_len, got {} and {}",
                self.window_len, self.fft_len
            )));
        }
        if !(0.0..1.0).contains(&self.overlap_fraction) {
            return Err(DscError::InvalidParameter(format!(
                "overlap fraction must lie in [0, 1), got {}",
                self.overlap_fraction
            )));
        }
        if self.hop() == 0 {
            return Err(DscError::InvalidParameter("hop length is zero".into()));
        }
        Ok(())
    }

    pub fn frame_count(&self, signal_len: usize) -> usize {
        if signal_len < self.window_len {
            0
        } else {
            (signal_len - self.window_len) / self.hop() + 1
        }
    }

    /// Number of samples spanned by `frames` frames.
    pub fn span(&self, frames: usize) -> usize {
        if frames == 0 {
            0
        } else {
            (frames - 1) * self.hop() + self.window_len
        }
    }
}

/// Time-frequency matrix of `bins x frames` values plus the analysis metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram<T> {
    values: Vec<T>,
    bins: usize,
    frames: usize,
    config: StftConfig,
    sample_rate: f64,
}

pub type ComplexSpectrogram = Spectrogram<Complex64>;
pub type MagnitudeSpectrogram = Spectrogram<f64>;

impl<T: Copy> Spectrogram<T> {
    /// Builds a spectrogram from frame-major values (`values[t * bins + f]`).
    pub fn from_frames(
        values: Vec<T>,
        frames: usize,
        config: StftConfig,
        sample_rate: f64,
    ) -> Result<Self> {
        config.validate()?;
        let bins = config.bins();
        if values.len() != bins * frames {
            return Err(DscError::Shape(format!(
                "{} values do not fill {bins} bins x {frames} frames",
                values.len()
            )));
        }
        Ok(Spectrogram {
            values,
            bins,
            frames,
            config,
            sample_rate,
        })
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn config(&self) -> &StftConfig {
        &self.config
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn frame(&self, t: usize) -> &[T] {
        &self.values[t * self.bins..(t + 1) * self.bins]
    }

    pub fn frame_mut(&mut self, t: usize) -> &mut [T] {
        let bins = self.bins;
        &mut self.values[t * bins..(t + 1) * bins]
    }

    pub fn get(&self, bin: usize, frame: usize) -> T {
        self.values[frame * self.bins + bin]
    }

    /// Time series of one frequency bin.
    pub fn bin(&self, f: usize) -> Vec<T> {
        (0..self.frames)
            .map(|t| self.values[t * self.bins + f])
            .collect()
    }

    pub fn bin_freqs(&self) -> Vec<f64> {
        (0..self.bins)
            .map(|k| k as f64 * self.sample_rate / self.config.fft_len as f64)
            .collect()
    }

    /// Centre time of every frame in seconds.
    pub fn frame_times(&self) -> Vec<f64> {
        let hop = self.config.hop() as f64;
        let half = self.config.window_len as f64 / 2.0;
        (0..self.frames)
            .map(|t| (t as f64 * hop + half) / self.sample_rate)
            .collect()
    }

    /// A spectrogram with the same metadata and new frame-major values.
    pub fn with_values<U: Copy>(&self, values: Vec<U>) -> Result<Spectrogram<U>> {
        Spectrogram::from_frames(values, self.frames, self.config, self.sample_rate)
    }

    pub fn map<U: Copy>(&self, mut f: impl FnMut(T) -> U) -> Spectrogram<U> {
        Spectrogram {
            values: self.values.iter().map(|&v| f(v)).collect(),
            bins: self.bins,
            frames: self.frames,
            config: self.config,
            sample_rate: self.sample_rate,
        }
    }
}

impl MagnitudeSpectrogram {
    pub fn zeros_like<T>(other: &Spectrogram<T>) -> Self {
        Spectrogram {
            values: vec![0.0; other.bins * other.frames],
            bins: other.bins,
            frames: other.frames,
            config: other.config,
            sample_rate: other.sample_rate,
        }
    }
}

/// Cached FFT plans and window for one [`StftConfig`].
pub struct StftEngine {
    config: StftConfig,
    window: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl StftEngine {
    pub fn new(config: StftConfig) -> Result<Self> {
        config.validate()?;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(config.fft_len);
        let inverse = planner.plan_fft_inverse(config.fft_len);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Ok(StftEngine {
            config,
            window: config.window.coefficients(config.window_len),
            forward,
            inverse,
            scratch: vec![Complex64::default(); scratch_len],
        })
    }

    pub fn config(&self) -> &StftConfig {
        &self.config
    }

    pub fn window(&self) -> &[f64] {
        &self.window
    }

    pub fn analyze(&mut self, samples: &[f64], sample_rate: f64) -> Result<ComplexSpectrogram> {
        let mut values = Vec::new();
        let frames = self.analyze_into(samples, &mut values)?;
        Spectrogram::from_frames(values, frames, self.config, sample_rate)
    }

    /// Frame-major one-sided STFT written into `values`; returns the frame count.
    ///
    /// Two real frames share one complex FFT, and all-zero segments are
    /// skipped, which makes sparse partial signals cheap to analyze.
    pub fn analyze_into(&mut self, samples: &[f64], values: &mut Vec<Complex64>) -> Result<usize> {
        let cfg = self.config;
        if samples.len() < cfg.window_len {
            return Err(DscError::InvalidInput(format!(
                "signal of {} samples is shorter than the {}-sample window",
                samples.len(),
                cfg.window_len
            )));
        }
        let frames = cfg.frame_count(samples.len());
        let bins = cfg.bins();
        let hop = cfg.hop();
        let n = cfg.fft_len;
        values.clear();
        values.resize(frames * bins, Complex64::default());
        let active: Vec<usize> = (0..frames)
            .filter(|&t| {
                samples[t * hop..t * hop + cfg.window_len]
                    .iter()
                    .any(|&x| x != 0.0)
            })
            .collect();
        let mut buf = vec![Complex64::default(); n];
        for pair in active.chunks(2) {
            let a = &samples[pair[0] * hop..pair[0] * hop + cfg.window_len];
            buf.fill(Complex64::default());
            for (slot, (x, w)) in buf.iter_mut().zip(a.iter().zip(&self.window)) {
                slot.re = x * w;
            }
            if let Some(&tb) = pair.get(1) {
                let b = &samples[tb * hop..tb * hop + cfg.window_len];
                for (slot, (x, w)) in buf.iter_mut().zip(b.iter().zip(&self.window)) {
                    slot.im = x * w;
                }
            }
            self.forward
                .process_with_scratch(&mut buf, &mut self.scratch);
            for k in 0..bins {
                let z = buf[k];
                let zc = buf[(n - k) % n].conj();
                values[pair[0] * bins + k] = (z + zc) * 0.5;
                if let Some(&tb) = pair.get(1) {
                    values[tb * bins + k] = Complex64::new(0.0, -0.5) * (z - zc);
                }
            }
        }
        Ok(frames)
    }

    /// Weighted overlap-add synthesis, normalized by the summed squared window.
    pub fn synthesize(&mut self, spec: &ComplexSpectrogram) -> Result<Vec<f64>> {
        if spec.config() != &self.config {
            return Err(DscError::Shape(
                "spectrogram was produced with a different configuration".into(),
            ));
        }
        let mut out = Vec::new();
        self.synthesize_into(spec.values(), spec.frames(), &mut out)?;
        Ok(out)
    }

    /// Overlap-add synthesis of frame-major one-sided `values` into `out`.
    pub fn synthesize_into(
        &mut self,
        values: &[Complex64],
        frames: usize,
        out: &mut Vec<f64>,
    ) -> Result<()> {
        let cfg = self.config;
        let bins = cfg.bins();
        if values.len() != frames * bins {
            return Err(DscError::Shape(format!(
                "{} values do not fill {bins} bins x {frames} frames",
                values.len()
            )));
        }
        let len = cfg.span(frames);
        let hop = cfg.hop();
        let n = cfg.fft_len;
        out.clear();
        out.resize(len, 0.0);
        let mut norm = vec![0.0; len];
        for t in 0..frames {
            for (d, w) in norm[t * hop..].iter_mut().zip(&self.window) {
                *d += w * w;
            }
        }
        let active: Vec<usize> = (0..frames)
            .filter(|&t| {
                values[t * bins..(t + 1) * bins]
                    .iter()
                    .any(|z| z.re != 0.0 || z.im != 0.0)
            })
            .collect();
        let scale = 1.0 / n as f64;
        let mut buf = vec![Complex64::default(); n];
        for pair in active.chunks(2) {
            let a = &values[pair[0] * bins..(pair[0] + 1) * bins];
            let b = pair.get(1).map(|&t| &values[t * bins..(t + 1) * bins]);
            // Hermitian completion of each frame; the second frame rides on
            // the imaginary axis so one inverse FFT yields both real frames.
            for k in 0..n {
                let (ha, hb) = if k < bins {
                    (a[k], b.map_or(Complex64::default(), |b| b[k]))
                } else {
                    (
                        a[n - k].conj(),
                        b.map_or(Complex64::default(), |b| b[n - k].conj()),
                    )
                };
                let (ha, hb) = if k == 0 || (n.is_multiple_of(2) && k == n / 2) {
                    (Complex64::new(ha.re, 0.0), Complex64::new(hb.re, 0.0))
                } else {
                    (ha, hb)
                };
                buf[k] = ha + Complex64::new(-hb.im, hb.re);
            }
            self.inverse
                .process_with_scratch(&mut buf, &mut self.scratch);
            for (slot, (z, w)) in out[pair[0] * hop..]
                .iter_mut()
                .zip(buf.iter().zip(&self.window))
            {
                *slot += w * z.re * scale;
            }
            if let Some(&tb) = pair.get(1) {
                for (slot, (z, w)) in out[tb * hop..].iter_mut().zip(buf.iter().zip(&self.window)) {
                    *slot += w * z.im * scale;
                }
            }
        }
        normalize_overlap_add(out, &norm, &cfg)
    }
}

/// Relative floor below which the overlap-add denominator counts as vanished.
const NORM_TOLERANCE: f64 = 1e-10;

fn normalize_overlap_add(out: &mut [f64], norm: &[f64], cfg: &StftConfig) -> Result<()> {
    let peak = norm.iter().fold(0.0f64, |m, &v| m.max(v));
    if peak == 0.0 {
        return Err(DscError::NonInvertible {
            position: 0,
            denominator: 0.0,
        });
    }
    let floor = NORM_TOLERANCE * peak;
    // Samples closer than one window to either end are not covered by the
    // full set of overlapping frames; there a vanishing window is expected.
    let interior = cfg.window_len..out.len().saturating_sub(cfg.window_len);
    for (i, (x, &d)) in out.iter_mut().zip(norm).enumerate() {
        if d > floor {
            *x /= d;
        } else if interior.contains(&i) {
            return Err(DscError::NonInvertible {
                position: i,
                denominator: d,
            });
        } else {
            *x = 0.0;
        }
    }
    Ok(())
}

/// One-sided STFT of `signal`.
pub fn stft(signal: &Signal, config: &StftConfig) -> Result<ComplexSpectrogram> {
    StftEngine::new(*config)?.analyze(signal.samples(), signal.sample_rate())
}

/// Element-wise modulus.
pub fn magnitude(spec: &ComplexSpectrogram) -> MagnitudeSpectrogram {
    spec.map(|z| z.norm())
}

/// Inverse STFT by normalized overlap-add. The output spans the frames of
/// `spec`, i.e. `(frames - 1) * hop + window_len` samples.
pub fn istft(spec: &ComplexSpectrogram) -> Result<Signal> {
    let samples = StftEngine::new(*spec.config())?.synthesize(spec)?;
    Signal::new(samples, spec.sample_rate())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "seed")]
pub enum PhaseInit {
    Zero,
    Random(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GriffinLimConfig {
    pub iterations: usize,
    pub init_phase: PhaseInit,
    /// Stop once the residual improves by less than this between iterations.
    pub tolerance: f64,
}

impl Default for GriffinLimConfig {
    fn default() -> Self {
        GriffinLimConfig {
            iterations: 100,
            init_phase: PhaseInit::Zero,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub signal: Signal,
    /// Spectral-convergence residual after each iteration.
    pub residuals: Vec<f64>,
}

impl Reconstruction {
    pub fn residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(0.0)
    }
}

/// Bin weights that turn a one-sided Frobenius norm into the two-sided one.
fn hermitian_weights(bins: usize, fft_len: usize) -> Vec<f64> {
    (0..bins)
        .map(|k| {
            if k == 0 || (fft_len.is_multiple_of(2) && k == fft_len / 2) {
                1.0
            } else {
                2.0
            }
        })
        .collect()
}

/// `||(|X| - target)||_F / ||target||_F` over the full two-sided spectrum.
pub fn spectral_convergence(estimate: &ComplexSpectrogram, target: &MagnitudeSpectrogram) -> f64 {
    let weights = hermitian_weights(target.bins(), target.config().fft_len);
    let mut num = 0.0;
    let mut den = 0.0;
    for t in 0..target.frames() {
        for ((z, a), w) in estimate.frame(t).iter().zip(target.frame(t)).zip(&weights) {
            let d = z.norm() - a;
            num += w * d * d;
            den += w * a * a;
        }
    }
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

/// Griffin-Lim: alternate between imposing the target magnitude and
/// projecting onto consistent spectrograms via overlap-add.
pub fn griffin_lim(
    target: &MagnitudeSpectrogram,
    config: &GriffinLimConfig,
) -> Result<Reconstruction> {
    if config.iterations == 0 {
        return Err(DscError::InvalidParameter(
            "Griffin-Lim needs at least one iteration".into(),
        ));
    }
    if target.values().iter().any(|a| !a.is_finite() || *a < 0.0) {
        return Err(DscError::InvalidInput(
            "target magnitudes must be finite and non-negative".into(),
        ));
    }
    let mut engine = StftEngine::new(*target.config())?;
    let fs = target.sample_rate();
    let frames = target.frames();
    let weights = hermitian_weights(target.bins(), target.config().fft_len);
    let bins = target.bins();
    let target_energy: f64 = target
        .values()
        .iter()
        .enumerate()
        .map(|(i, a)| weights[i % bins] * a * a)
        .sum();

    let mut estimate: Vec<Complex64> = match config.init_phase {
        PhaseInit::Zero => target
            .values()
            .iter()
            .map(|&a| Complex64::new(a, 0.0))
            .collect(),
        PhaseInit::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            target
                .values()
                .iter()
                .map(|&a| a * Complex64::cis(TAU * rng.random::<f64>()))
                .collect()
        }
    };
    let mut samples = Vec::new();
    let mut consistent = Vec::new();
    let mut residuals = Vec::with_capacity(config.iterations);
    for _ in 0..config.iterations {
        engine.synthesize_into(&estimate, frames, &mut samples)?;
        engine.analyze_into(&samples, &mut consistent)?;
        // Residual and magnitude projection in one pass.
        let mut num = 0.0;
        for (i, ((e, z), &a)) in estimate
            .iter_mut()
            .zip(&consistent)
            .zip(target.values())
            .enumerate()
        {
            let m = z.norm_sqr().sqrt();
            let d = m - a;
            num += weights[i % bins] * d * d;
            *e = if m > 0.0 {
                z * (a / m)
            } else {
                Complex64::new(a, 0.0)
            };
        }
        let r = if target_energy == 0.0 {
            num.sqrt()
        } else {
            (num / target_energy).sqrt()
        };
        let improvement = residuals.last().map(|&prev: &f64| prev - r);
        residuals.push(r);
        if r == 0.0 || improvement.is_some_and(|d| d < config.tolerance) {
            break;
        }
    }
    Ok(Reconstruction {
        signal: Signal::new(samples, fs)?,
        residuals,
    })
}
