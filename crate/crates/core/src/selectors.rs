//! Baseline frequency-band selectors: spectral kurtosis, the alpha-stable
//! index selector and the conditional-variance selector, plus filtering of a
//! signal by a selector curve.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DscError, Result};
use crate::signal::Signal;
use crate::stats::{quantile_sorted, sample_std, sorted_copy};
use crate::tfr::{MagnitudeSpectrogram, StftConfig, StftEngine};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectorKind {
    SpectralKurtosis,
    Alpha,
    ConditionalVariance,
}

impl SelectorKind {
    pub const ALL: [SelectorKind; 3] = [
        SelectorKind::SpectralKurtosis,
        SelectorKind::Alpha,
        SelectorKind::ConditionalVariance,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            SelectorKind::SpectralKurtosis => "sk",
            SelectorKind::Alpha => "alpha",
            SelectorKind::ConditionalVariance => "cv",
        }
    }
}

/// Per-bin selector values. Bins whose statistic is undefined (no
/// dispersion) carry the value 0 and a `degenerate` flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectorCurve {
    pub kind: SelectorKind,
    pub values: Vec<f64>,
    pub bin_freqs: Vec<f64>,
    pub degenerate: Vec<bool>,
}

impl SelectorCurve {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn degenerate_count(&self) -> usize {
        self.degenerate.iter().filter(|&&d| d).count()
    }

    /// Index of the largest value.
    pub fn argmax(&self) -> Option<usize> {
        self.values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
    }
}

fn per_bin<F>(spec: &MagnitudeSpectrogram, kind: SelectorKind, stat: F) -> SelectorCurve
where
    F: Fn(&[f64]) -> Option<f64> + Sync,
{
    let results: Vec<Option<f64>> = (0..spec.bins())
        .into_par_iter()
        .map(|f| stat(&spec.bin(f)))
        .collect();
    SelectorCurve {
        kind,
        values: results.iter().map(|r| r.unwrap_or(0.0)).collect(),
        bin_freqs: spec.bin_freqs(),
        degenerate: results.iter().map(Option::is_none).collect(),
    }
}

/// Excess kurtosis `m4 / m2^2 - 3` with population moments; `None` when the
/// data have no spread.
pub fn excess_kurtosis(x: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let (mut m2, mut m4) = (0.0, 0.0);
    for v in x {
        let d = (v - mean) * (v - mean);
        m2 += d;
        m4 += d * d;
    }
    m2 /= n;
    m4 /= n;
    if m2 <= f64::EPSILON * mean * mean || m2 == 0.0 {
        return None;
    }
    Some(m4 / (m2 * m2) - 3.0)
}

pub fn spectral_kurtosis(spec: &MagnitudeSpectrogram) -> Result<SelectorCurve> {
    require_frames(spec, 8)?;
    Ok(per_bin(
        spec,
        SelectorKind::SpectralKurtosis,
        excess_kurtosis,
    ))
}

fn require_frames(spec: &MagnitudeSpectrogram, needed: usize) -> Result<()> {
    if spec.frames() < needed {
        return Err(DscError::InsufficientData {
            needed,
            got: spec.frames(),
        });
    }
    Ok(())
}

/// Parameters of an alpha-stable law in the S1 parameterization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableFit {
    pub alpha: f64,
    pub beta: f64,
    pub scale: f64,
    pub shift: f64,
}

// McCulloch (1986) quantile tables. Rows of ALPHA_TABLE and BETA_TABLE follow
// NU_ALPHA_GRID, columns NU_BETA_GRID. Rows of NU_C_TABLE and NU_ZETA_TABLE
// follow ALPHA_GRID, columns BETA_GRID.
const NU_ALPHA_GRID: [f64; 15] = [
    2.439, 2.5, 2.6, 2.7, 2.8, 3.0, 3.2, 3.5, 4.0, 5.0, 6.0, 8.0, 10.0, 15.0, 25.0,
];
const NU_BETA_GRID: [f64; 7] = [0.0, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0];
const ALPHA_GRID: [f64; 16] = [
    0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9, 2.0,
];
const BETA_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

#[rustfmt::skip]
const ALPHA_TABLE: [[f64; 7]; 15] = [
    [2.000, 2.000, 2.000, 2.000, 2.000, 2.000, 2.000],
    [1.916, 1.924, 1.924, 1.924, 1.924, 1.924, 1.924],
    [1.808, 1.813, 1.829, 1.829, 1.829, 1.829, 1.829],
    [1.729, 1.730, 1.737, 1.745, 1.745, 1.745, 1.745],
    [1.664, 1.663, 1.663, 1.668, 1.676, 1.676, 1.676],
    [1.563, 1.560, 1.553, 1.548, 1.547, 1.547, 1.547],
    [1.484, 1.480, 1.471, 1.460, 1.448, 1.438, 1.438],
    [1.391, 1.386, 1.378, 1.364, 1.337, 1.318, 1.318],
    [1.279, 1.273, 1.266, 1.250, 1.210, 1.184, 1.150],
    [1.128, 1.121, 1.114, 1.101, 1.067, 1.027, 0.973],
    [1.029, 1.021, 1.014, 1.004, 0.974, 0.935, 0.874],
    [0.896, 0.892, 0.884, 0.883, 0.855, 0.823, 0.769],
    [0.818, 0.812, 0.806, 0.801, 0.780, 0.756, 0.691],
    [0.698, 0.695, 0.692, 0.689, 0.676, 0.656, 0.597],
    [0.593, 0.590, 0.588, 0.586, 0.579, 0.563, 0.513],
];

#[rustfmt::skip]
const BETA_TABLE: [[f64; 7]; 15] = [
    [0.000, 2.160, 1.000, 1.000, 1.000, 1.000, 1.000],
    [0.000, 1.592, 3.390, 1.000, 1.000, 1.000, 1.000],
    [0.000, 0.759, 1.800, 1.000, 1.000, 1.000, 1.000],
    [0.000, 0.482, 1.048, 1.694, 1.000, 1.000, 1.000],
    [0.000, 0.360, 0.760, 1.232, 2.229, 1.000, 1.000],
    [0.000, 0.253, 0.518, 0.823, 1.575, 1.000, 1.000],
    [0.000, 0.203, 0.410, 0.632, 1.244, 1.906, 1.000],
    [0.000, 0.165, 0.332, 0.499, 0.943, 1.560, 1.000],
    [0.000, 0.136, 0.271, 0.404, 0.689, 1.230, 2.195],
    [0.000, 0.109, 0.216, 0.323, 0.539, 0.827, 1.917],
    [0.000, 0.096, 0.190, 0.284, 0.472, 0.693, 1.759],
    [0.000, 0.082, 0.163, 0.243, 0.412, 0.601, 1.596],
    [0.000, 0.074, 0.147, 0.220, 0.377, 0.546, 1.482],
    [0.000, 0.064, 0.128, 0.191, 0.330, 0.478, 1.362],
    [0.000, 0.056, 0.112, 0.167, 0.285, 0.428, 1.274],
];

#[rustfmt::skip]
const NU_C_TABLE: [[f64; 5]; 16] = [
    [2.588, 3.073, 4.534, 6.636, 9.144],
    [2.337, 2.634, 3.542, 4.808, 6.247],
    [2.189, 2.392, 3.004, 3.844, 4.775],
    [2.098, 2.244, 2.676, 3.265, 3.912],
    [2.040, 2.149, 2.461, 2.886, 3.356],
    [2.000, 2.085, 2.311, 2.624, 2.973],
    [1.980, 2.040, 2.205, 2.435, 2.696],
    [1.965, 2.007, 2.125, 2.294, 2.491],
    [1.955, 1.984, 2.067, 2.188, 2.333],
    [1.946, 1.967, 2.022, 2.106, 2.211],
    [1.939, 1.952, 1.988, 2.045, 2.116],
    [1.933, 1.940, 1.962, 1.997, 2.043],
    [1.927, 1.930, 1.943, 1.961, 1.987],
    [1.921, 1.922, 1.927, 1.936, 1.947],
    [1.914, 1.915, 1.916, 1.918, 1.921],
    [1.908, 1.908, 1.908, 1.908, 1.908],
];

#[rustfmt::skip]
const NU_ZETA_TABLE: [[f64; 5]; 16] = [
    [0.000, -0.061, -0.279, -0.659, -1.198],
    [0.000, -0.078, -0.272, -0.581, -0.997],
    [0.000, -0.089, -0.262, -0.520, -0.853],
    [0.000, -0.096, -0.250, -0.469, -0.742],
    [0.000, -0.099, -0.237, -0.424, -0.652],
    [0.000, -0.098, -0.223, -0.380, -0.576],
    [0.000, -0.095, -0.208, -0.346, -0.508],
    [0.000, -0.090, -0.192, -0.310, -0.447],
    [0.000, -0.084, -0.173, -0.276, -0.390],
    [0.000, -0.075, -0.154, -0.241, -0.335],
    [0.000, -0.066, -0.134, -0.206, -0.283],
    [0.000, -0.056, -0.111, -0.170, -0.232],
    [0.000, -0.043, -0.088, -0.132, -0.179],
    [0.000, -0.030, -0.061, -0.092, -0.123],
    [0.000, -0.017, -0.032, -0.049, -0.064],
    [0.000, 0.000, 0.000, 0.000, 0.000],
];

/// Bilinear interpolation on a rectangular grid, clamping outside it.
fn bilinear<const R: usize, const C: usize>(
    rows: &[f64; R],
    cols: &[f64; C],
    table: &[[f64; C]; R],
    r: f64,
    c: f64,
) -> f64 {
    fn locate(axis: &[f64], v: f64) -> (usize, f64) {
        let v = v.clamp(axis[0], axis[axis.len() - 1]);
        let i = axis
            .windows(2)
            .position(|w| v <= w[1])
            .unwrap_or(axis.len() - 2);
        (i, (v - axis[i]) / (axis[i + 1] - axis[i]))
    }
    let (i, u) = locate(rows, r);
    let (j, v) = locate(cols, c);
    let top = table[i][j] * (1.0 - v) + table[i][j + 1] * v;
    let bottom = table[i + 1][j] * (1.0 - v) + table[i + 1][j + 1] * v;
    top * (1.0 - u) + bottom * u
}

/// Quantile-based (McCulloch) estimate of alpha-stable parameters.
pub fn fit_alpha_stable(samples: &[f64]) -> Result<StableFit> {
    const MIN_SAMPLES: usize = 100;
    if samples.len() < MIN_SAMPLES {
        return Err(DscError::InsufficientData {
            needed: MIN_SAMPLES,
            got: samples.len(),
        });
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(DscError::InvalidInput("samples must be finite".into()));
    }
    let sorted = sorted_copy(samples);
    let q = |p: f64| quantile_sorted(&sorted, p);
    let (p05, p25, p50, p75, p95) = (q(0.05), q(0.25), q(0.5), q(0.75), q(0.95));
    let iqr = p75 - p25;
    if iqr <= 0.0 || p95 - p05 <= 0.0 {
        return Err(DscError::InvalidInput(
            "samples have no interquartile spread".into(),
        ));
    }
    let nu_alpha = (p95 - p05) / iqr;
    let nu_beta = (p95 + p05 - 2.0 * p50) / (p95 - p05);

    let (alpha, beta) = if nu_alpha >= NU_ALPHA_GRID[0] {
        let a = bilinear(
            &NU_ALPHA_GRID,
            &NU_BETA_GRID,
            &ALPHA_TABLE,
            nu_alpha,
            nu_beta.abs(),
        );
        let b = bilinear(
            &NU_ALPHA_GRID,
            &NU_BETA_GRID,
            &BETA_TABLE,
            nu_alpha,
            nu_beta.abs(),
        );
        (
            a.clamp(f64::EPSILON, 2.0),
            (b * signum0(nu_beta)).clamp(-1.0, 1.0),
        )
    } else {
        (2.0, signum0(nu_beta))
    };
    let nu_c = bilinear(&ALPHA_GRID, &BETA_GRID, &NU_C_TABLE, alpha, beta.abs());
    let nu_zeta =
        signum0(beta) * bilinear(&ALPHA_GRID, &BETA_GRID, &NU_ZETA_TABLE, alpha, beta.abs());
    let scale = iqr / nu_c;
    let zeta = p50 + scale * nu_zeta;
    let shift = if alpha == 1.0 {
        zeta
    } else {
        zeta - beta * scale * (std::f64::consts::FRAC_PI_2 * alpha).tan()
    };
    Ok(StableFit {
        alpha,
        beta,
        scale,
        shift,
    })
}

fn signum0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `2 - alpha` per bin.
pub fn alpha_selector(spec: &MagnitudeSpectrogram) -> Result<SelectorCurve> {
    require_frames(spec, 100)?;
    Ok(per_bin(spec, SelectorKind::Alpha, |x| {
        fit_alpha_stable(x).ok().map(|fit| 2.0 - fit.alpha)
    }))
}

/// Cumulative quantile orders bounding the seven sets A1..A7.
pub const CV_QUANTILES: [f64; 6] = [0.004, 0.062, 0.308, 0.692, 0.938, 0.996];
const CV_MIN_FRAMES: usize = 250;

/// Number of values falling in each of the seven quantile sets.
pub fn quantile_partition(x: &[f64]) -> [usize; 7] {
    let sorted = sorted_copy(x);
    let edges = CV_QUANTILES.map(|p| quantile_sorted(&sorted, p));
    let mut counts = [0; 7];
    for &v in x {
        counts[edges.iter().take_while(|&&e| v > e).count()] += 1;
    }
    counts
}

/// Conditional-variance statistic of one bin; `None` if the central sets
/// or the whole bin lack spread.
pub fn conditional_variance(x: &[f64]) -> Option<f64> {
    let sorted = sorted_copy(x);
    let e = CV_QUANTILES.map(|p| quantile_sorted(&sorted, p));
    let set = |lo: f64, hi: f64| -> Vec<f64> {
        sorted
            .iter()
            .copied()
            .filter(|&v| v > lo && v <= hi)
            .collect()
    };
    let (a3, a4, a5) = (set(e[1], e[2]), set(e[2], e[3]), set(e[3], e[4]));
    if a3.len() < 2 || a4.len() < 2 || a5.len() < 2 {
        return None;
    }
    let sigma = sample_std(x);
    if sigma == 0.0 {
        return None;
    }
    let var = |s: &[f64]| sample_std(s).powi(2);
    let (v3, v4, v5) = (var(&a3), var(&a4), var(&a5));
    let t = ((v3 - v4) / sigma + (v5 - v4) / sigma).powi(2);
    Some(t * (x.len() as f64).sqrt())
}

pub fn cv_selector(spec: &MagnitudeSpectrogram) -> Result<SelectorCurve> {
    require_frames(spec, CV_MIN_FRAMES)?;
    Ok(per_bin(
        spec,
        SelectorKind::ConditionalVariance,
        conditional_variance,
    ))
}

pub fn selector_curve(spec: &MagnitudeSpectrogram, kind: SelectorKind) -> Result<SelectorCurve> {
    match kind {
        SelectorKind::SpectralKurtosis => spectral_kurtosis(spec),
        SelectorKind::Alpha => alpha_selector(spec),
        SelectorKind::ConditionalVariance => cv_selector(spec),
    }
}

/// Filter gains derived from a curve: negatives clipped to zero, then
/// scaled so the largest gain is one. An all-non-positive curve gives zeros.
pub fn filter_gains(curve: &SelectorCurve) -> Vec<f64> {
    let clipped: Vec<f64> = curve.values.iter().map(|&v| v.max(0.0)).collect();
    let peak = clipped.iter().fold(0.0f64, |m, &v| m.max(v));
    if peak > 0.0 {
        clipped.iter().map(|v| v / peak).collect()
    } else {
        clipped
    }
}

/// Weights each STFT bin of `signal` by the curve's gains and resynthesizes.
pub fn selector_filter(
    signal: &Signal,
    curve: &SelectorCurve,
    config: &StftConfig,
) -> Result<Signal> {
    if curve.len() != config.bins() {
        return Err(DscError::Shape(format!(
            "selector curve has {} bins, configuration needs {}",
            curve.len(),
            config.bins()
        )));
    }
    let gains = filter_gains(curve);
    let mut engine = StftEngine::new(*config)?;
    let mut spec = engine.analyze(signal.samples(), signal.sample_rate())?;
    for t in 0..spec.frames() {
        for (z, g) in spec.frame_mut(t).iter_mut().zip(&gains) {
            *z *= g;
        }
    }
    Signal::new(engine.synthesize(&spec)?, signal.sample_rate())
}
