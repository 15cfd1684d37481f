//! Synthetic test signals: Gaussian background, random (non-cyclic) impulses
//! and a periodic train of decaying oscillations standing in for a local fault.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{DscError, Result};
use crate::seed::derive_seed;

/// Impulses are evaluated until `exp(-decay * t)` falls below `exp(-TAIL_DECAYS)`.
const TAIL_DECAYS: f64 = 40.0;

/// A uniformly sampled real signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate: f64,
}

impl Signal {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(DscError::InvalidInput("signal has no samples".into()));
        }
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(DscError::InvalidParameter(format!(
                "sample rate must be positive, got {sample_rate}"
            )));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(DscError::InvalidInput(format!(
                "non-finite sample at index {i}"
            )));
        }
        Ok(Signal {
            samples,
            sample_rate,
        })
    }

    pub fn zeros(len: usize, sample_rate: f64) -> Result<Self> {
        Signal::new(vec![0.0; len], sample_rate)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    /// Returns a copy with every sample multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Signal {
        Signal {
            samples: self.samples.iter().map(|x| x * factor).collect(),
            sample_rate: self.sample_rate,
        }
    }
}

/// Cyclic impulse train parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SoiParams {
    pub amp: f64,
    pub carrier_freq: f64,
    pub decay: f64,
    pub mod_freq: f64,
}

impl Default for SoiParams {
    fn default() -> Self {
        SoiParams {
            amp: 1.0,
            carrier_freq: 2500.0,
            decay: 1800.0,
            mod_freq: 30.7,
        }
    }
}

/// Random impulse parameters: two amplitude classes, each expected `rate_per_second` times per second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ImpulseNoiseParams {
    pub rate_per_second: f64,
    pub amp_low: f64,
    pub amp_high: f64,
    pub carrier_freq: f64,
    pub decay: f64,
}

impl Default for ImpulseNoiseParams {
    fn default() -> Self {
        ImpulseNoiseParams {
            rate_per_second: 3.0,
            amp_low: 15.0,
            amp_high: 30.0,
            carrier_freq: 5000.0,
            decay: 1800.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaussParams {
    /// Standard deviation of the zero-mean background.
    pub sigma: f64,
}

impl Default for GaussParams {
    fn default() -> Self {
        GaussParams { sigma: 0.6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImpulseClass {
    Low,
    High,
}

/// One realized random impulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpulseEvent {
    pub sample: usize,
    pub time: f64,
    pub amplitude: f64,
    pub class: ImpulseClass,
}

/// Output of [`gen_noncyclic`]: the signal and the events that built it.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseRealization {
    pub signal: Signal,
    pub events: Vec<ImpulseEvent>,
}

impl ImpulseRealization {
    pub fn count(&self, class: ImpulseClass) -> usize {
        self.events.iter().filter(|e| e.class == class).count()
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(DscError::InvalidParameter(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

fn check_rate(sample_rate: f64) -> Result<()> {
    check_positive("sample rate", sample_rate)
}

/// Adds `amp * sin(2 pi fc (t - onset)) * exp(-d (t - onset))` for `t >= onset`.
fn add_decaying_oscillation(
    out: &mut [f64],
    sample_rate: f64,
    onset: f64,
    amp: f64,
    carrier_freq: f64,
    decay: f64,
) {
    let first = (onset * sample_rate).ceil().max(0.0) as usize;
    let span = (TAIL_DECAYS / decay * sample_rate).ceil() as usize + 1;
    let last = (first + span).min(out.len());
    for (m, slot) in out.iter_mut().enumerate().take(last).skip(first) {
        let tau = m as f64 / sample_rate - onset;
        *slot += amp * (TAU * carrier_freq * tau).sin() * (-decay * tau).exp();
    }
}

/// Zero-mean i.i.d. Gaussian noise.
pub fn gen_gaussian(
    length: usize,
    params: &GaussParams,
    seed: u64,
    sample_rate: f64,
) -> Result<Signal> {
    if length == 0 {
        return Err(DscError::InvalidParameter("length must be positive".into()));
    }
    check_positive("sigma", params.sigma)?;
    check_rate(sample_rate)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..length)
        .map(|_| params.sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Signal::new(samples, sample_rate)
}

/// Onset times (seconds) of the cyclic impulses inside `[0, duration)`.
pub fn soi_onsets(duration: f64, mod_freq: f64) -> Vec<f64> {
    let period = 1.0 / mod_freq;
    (0..)
        .map(|n| n as f64 * period)
        .take_while(|&t| t < duration)
        .collect()
}

/// Periodic train of decaying oscillations starting at `t = 0`.
pub fn gen_soi(length: usize, sample_rate: f64, params: &SoiParams) -> Result<Signal> {
    if length == 0 {
        return Err(DscError::InvalidParameter("length must be positive".into()));
    }
    check_rate(sample_rate)?;
    if !(params.amp.is_finite() && params.amp >= 0.0) {
        return Err(DscError::InvalidParameter(format!(
            "amplitude must be non-negative, got {}",
            params.amp
        )));
    }
    check_positive("decay", params.decay)?;
    check_positive("modulation frequency", params.mod_freq)?;
    check_positive("carrier frequency", params.carrier_freq)?;
    let nyquist = sample_rate / 2.0;
    if params.mod_freq >= nyquist || params.carrier_freq >= nyquist {
        return Err(DscError::InvalidParameter(format!(
            "carrier {} Hz and modulation {} Hz must lie below Nyquist {nyquist} Hz",
            params.carrier_freq, params.mod_freq
        )));
    }
    let mut out = vec![0.0; length];
    if params.amp > 0.0 {
        let duration = length as f64 / sample_rate;
        for onset in soi_onsets(duration, params.mod_freq) {
            add_decaying_oscillation(
                &mut out,
                sample_rate,
                onset,
                params.amp,
                params.carrier_freq,
                params.decay,
            );
        }
    }
    Signal::new(out, sample_rate)
}

/// Random impulses from an independent per-sample trinomial draw: no event,
/// a low-amplitude impulse (probability `rate / fs`) or a high-amplitude one
/// (same probability).
pub fn gen_noncyclic(
    length: usize,
    sample_rate: f64,
    params: &ImpulseNoiseParams,
    seed: u64,
) -> Result<ImpulseRealization> {
    if length == 0 {
        return Err(DscError::InvalidParameter("length must be positive".into()));
    }
    check_rate(sample_rate)?;
    if !(params.rate_per_second.is_finite() && params.rate_per_second >= 0.0) {
        return Err(DscError::InvalidParameter(format!(
            "impulse rate must be non-negative, got {}",
            params.rate_per_second
        )));
    }
    if !(params.amp_low > 0.0 && params.amp_low < params.amp_high && params.amp_high.is_finite()) {
        return Err(DscError::InvalidParameter(format!(
            "impulse amplitudes must satisfy 0 < low < high, got {} and {}",
            params.amp_low, params.amp_high
        )));
    }
    check_positive("impulse decay", params.decay)?;
    check_positive("impulse carrier frequency", params.carrier_freq)?;
    if params.carrier_freq >= sample_rate / 2.0 {
        return Err(DscError::InvalidParameter(format!(
            "impulse carrier {} Hz is above Nyquist",
            params.carrier_freq
        )));
    }
    let p = params.rate_per_second / sample_rate;
    if p >= 0.5 {
        return Err(DscError::InvalidParameter(format!(
            "per-sample event probability {p} too large; total would exceed 1"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![0.0; length];
    let mut events = Vec::new();
    for m in 0..length {
        let u: f64 = rng.random();
        let (amplitude, class) = if u < p {
            (params.amp_low, ImpulseClass::Low)
        } else if u < 2.0 * p {
            (params.amp_high, ImpulseClass::High)
        } else {
            continue;
        };
        let time = m as f64 / sample_rate;
        add_decaying_oscillation(
            &mut out,
            sample_rate,
            time,
            amplitude,
            params.carrier_freq,
            params.decay,
        );
        events.push(ImpulseEvent {
            sample: m,
            time,
            amplitude,
            class,
        });
    }
    Ok(ImpulseRealization {
        signal: Signal::new(out, sample_rate)?,
        events,
    })
}

/// Pointwise sum of equally shaped signals.
pub fn compose(components: &[Signal]) -> Result<Signal> {
    let first = components
        .first()
        .ok_or_else(|| DscError::Shape("nothing to compose".into()))?;
    let mut out = vec![0.0; first.len()];
    for c in components {
        if c.len() != first.len() || c.sample_rate() != first.sample_rate() {
            return Err(DscError::Shape(format!(
                "component of {} samples at {} Hz does not match {} samples at {} Hz",
                c.len(),
                c.sample_rate(),
                first.len(),
                first.sample_rate()
            )));
        }
        for (o, x) in out.iter_mut().zip(c.samples()) {
            *o += x;
        }
    }
    Signal::new(out, first.sample_rate())
}

/// Full description of one synthetic scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    pub duration: f64,
    pub sample_rate: f64,
    pub gauss: GaussParams,
    /// `None` simulates a healthy machine.
    pub soi: Option<SoiParams>,
    pub impulses: ImpulseNoiseParams,
    pub seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            duration: 2.0,
            sample_rate: 25_000.0,
            gauss: GaussParams::default(),
            soi: Some(SoiParams::default()),
            impulses: ImpulseNoiseParams::default(),
            seed: 0,
        }
    }
}

impl SimulationConfig {
    pub fn len(&self) -> usize {
        (self.duration * self.sample_rate).round() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A simulated signal together with its ground truth.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub signal: Signal,
    pub gaussian: Signal,
    pub soi: Signal,
    pub impulses: ImpulseRealization,
    pub soi_onsets: Vec<f64>,
}

/// Builds the three components with independent seeds derived from `config.seed`.
pub fn simulate(config: &SimulationConfig) -> Result<Simulation> {
    check_positive("duration", config.duration)?;
    let len = config.len();
    let fs = config.sample_rate;
    let gaussian = gen_gaussian(len, &config.gauss, derive_seed(config.seed, &[0]), fs)?;
    let impulses = gen_noncyclic(len, fs, &config.impulses, derive_seed(config.seed, &[1]))?;
    let (soi, soi_onsets) = match &config.soi {
        Some(p) => (
            gen_soi(len, fs, p)?,
            soi_onsets(len as f64 / fs, p.mod_freq),
        ),
        None => (Signal::zeros(len, fs)?, Vec::new()),
    };
    let signal = compose(&[gaussian.clone(), soi.clone(), impulses.signal.clone()])?;
    Ok(Simulation {
        signal,
        gaussian,
        soi,
        impulses,
        soi_onsets,
    })
}
