//! Property checks, one function per invariant. Each returns a description
//! of the first counterexample on failure.
//!
//! Scale factors are powers of two wherever the invariant is stated as an
//! exact identity, so the scaled computation rounds identically.

use dsc_core::clustering::{dbscan, estimate_epsilon, pairwise_distances, DbscanParams};
use dsc_core::envelope::{
    envsi, identify_fault_frequency, squared_envelope_spectrum, EnvelopeSpectrum, EnvsiConfig,
    PeakConfig,
};
use dsc_core::montecarlo::{run_cells, run_grid, summarize, McGrid};
use dsc_core::selectors::{
    alpha_selector, conditional_variance, excess_kurtosis, fit_alpha_stable, selector_filter,
    spectral_kurtosis, SelectorCurve, SelectorKind,
};
use dsc_core::signal::{
    compose, gen_gaussian, gen_noncyclic, GaussParams, ImpulseClass, ImpulseNoiseParams,
};
use dsc_core::tfr::{
    griffin_lim, istft, magnitude, stft, GriffinLimConfig, PhaseInit, WindowShape,
};
use dsc_core::{
    dsc_partition, simulate, DscConfig, FrameClass, PipelineConfig, Signal, SimulationConfig,
    StftConfig,
};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::Rng;

use super::{
    brute_force_dbscan, canonical, clustering_instance, gaussian, matrix, naive_distances, rng,
    runner, small_stft, spectrogram_from,
};

const FS: f64 = 25_000.0;

pub type Check = fn() -> Result<(), String>;

/// Every property, in module order.
pub const ALL: &[(&str, Check)] = &[
    (
        "simulation is a pure function of its seed",
        simulation_deterministic,
    ),
    ("gaussian noise scales with sigma", gaussian_scale_family),
    (
        "compose is commutative and associative",
        compose_commutative_associative,
    ),
    (
        "impulse counts stay within binomial bounds",
        impulse_counts_binomial,
    ),
    ("istft inverts stft on the interior", stft_round_trip),
    ("istft is linear", istft_linear),
    (
        "magnitude ignores the sign of the signal",
        magnitude_sign_invariant,
    ),
    ("griffin-lim residual never increases", griffin_lim_monotone),
    ("spectrogram energy matches signal energy", parseval_energy),
    (
        "distance matrices are symmetric with zero diagonal",
        distance_matrix_shape,
    ),
    (
        "dbscan matches the brute-force reference",
        dbscan_matches_oracle,
    ),
    (
        "dbscan is invariant to point order",
        dbscan_permutation_invariant,
    ),
    (
        "dbscan is invariant to joint scaling of distances and radius",
        dbscan_scale_invariant,
    ),
    (
        "epsilon scales with the distances",
        epsilon_scale_equivariant,
    ),
    ("partition is exact and column exclusive", partition_exact),
    ("partition is deterministic", partition_deterministic),
    ("envsi lies in [0, 1]", envsi_bounded),
    ("envsi ignores amplitude scale", envsi_scale_invariant),
    (
        "fault frequency ignores amplitude scale",
        fault_frequency_scale_invariant,
    ),
    (
        "envelope spectrum ignores the sign of the signal",
        ses_sign_invariant,
    ),
    (
        "kurtosis and alpha ignore positive scaling",
        selectors_scale_invariant,
    ),
    ("alpha selector stays in [0, 2)", alpha_selector_range),
    (
        "cv statistic scales with the square of the data",
        cv_quadratic_scaling,
    ),
    (
        "a single-bin filter keeps only that band",
        single_bin_filter,
    ),
    (
        "monte carlo runs are deterministic",
        montecarlo_deterministic,
    ),
    (
        "monte carlo report ignores cell order",
        montecarlo_order_independent,
    ),
    (
        "monte carlo summaries agree with their samples",
        montecarlo_summary_consistent,
    ),
];

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    runner(cases)
        .run(&strategy, test)
        .map_err(|e| e.to_string())
}

fn signal(samples: Vec<f64>) -> Signal {
    Signal::new(samples, FS).unwrap()
}

fn short_scenario(seed: u64, sigma: f64, gamma: f64) -> SimulationConfig {
    let mut sim = SimulationConfig {
        duration: 0.4,
        seed,
        ..SimulationConfig::default()
    };
    sim.gauss.sigma = sigma;
    sim.impulses.rate_per_second = gamma;
    sim
}

fn stft_configs() -> impl Strategy<Value = StftConfig> {
    (
        prop::sample::select(vec![32usize, 64, 100, 256]),
        prop::sample::select(vec![1usize, 2]),
        prop::sample::select(vec![0.5, 0.75, 0.85]),
        prop::sample::select(vec![WindowShape::Hann, WindowShape::Hamming]),
    )
        .prop_map(
            |(window_len, zero_pad, overlap_fraction, window)| StftConfig {
                window_len,
                fft_len: window_len * zero_pad,
                overlap_fraction,
                window,
            },
        )
}

pub fn simulation_deterministic() -> Result<(), String> {
    run(
        8,
        (any::<u64>(), 0.2f64..2.0, 0.0f64..8.0),
        |(seed, sigma, gamma)| {
            let cfg = short_scenario(seed, sigma, gamma);
            let a = simulate(&cfg).unwrap();
            let b = simulate(&cfg).unwrap();
            prop_assert_eq!(a.signal, b.signal);
            prop_assert_eq!(a.impulses, b.impulses);
            prop_assert_eq!(a.soi_onsets, b.soi_onsets);
            Ok(())
        },
    )
}

pub fn gaussian_scale_family() -> Result<(), String> {
    run(
        32,
        (any::<u64>(), 0.1f64..3.0, -3i32..4, 1usize..2000),
        |(seed, sigma, k, len)| {
            let c = 2f64.powi(k);
            let base = gen_gaussian(len, &GaussParams { sigma }, seed, FS).unwrap();
            let scaled = gen_gaussian(len, &GaussParams { sigma: c * sigma }, seed, FS).unwrap();
            for (x, y) in base.samples().iter().zip(scaled.samples()) {
                prop_assert_eq!(c * x, *y);
            }
            Ok(())
        },
    )
}

pub fn compose_commutative_associative() -> Result<(), String> {
    run(32, (any::<u64>(), 1usize..500), |(seed, len)| {
        let parts: Vec<Signal> = (0..3)
            .map(|i| signal(gaussian(len, seed.wrapping_add(i))))
            .collect();
        let (a, b, c) = (&parts[0], &parts[1], &parts[2]);
        prop_assert_eq!(
            compose(&[a.clone(), b.clone()]).unwrap(),
            compose(&[b.clone(), a.clone()]).unwrap()
        );
        let left = compose(&[compose(&[a.clone(), b.clone()]).unwrap(), c.clone()]).unwrap();
        let right = compose(&[a.clone(), compose(&[b.clone(), c.clone()]).unwrap()]).unwrap();
        for (x, y) in left.samples().iter().zip(right.samples()) {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
        }
        Ok(())
    })
}

pub fn impulse_counts_binomial() -> Result<(), String> {
    run(
        32,
        (any::<u64>(), 0.0f64..10.0, 0.2f64..3.0),
        |(seed, gamma, duration)| {
            let len = (duration * FS) as usize;
            let params = ImpulseNoiseParams {
                rate_per_second: gamma,
                ..ImpulseNoiseParams::default()
            };
            let real = gen_noncyclic(len, FS, &params, seed).unwrap();
            let p = gamma / FS;
            let mean = len as f64 * p;
            let sd = (len as f64 * p * (1.0 - p)).sqrt();
            for class in [ImpulseClass::Low, ImpulseClass::High] {
                let k = real.count(class) as f64;
                // Six standard deviations plus one for the discreteness at tiny means.
                prop_assert!(
                    (k - mean).abs() <= 6.0 * sd + 1.0,
                    "{class:?}: {k} events, mean {mean}"
                );
            }
            Ok(())
        },
    )
}

pub fn stft_round_trip() -> Result<(), String> {
    run(
        32,
        (stft_configs(), any::<u64>(), 2usize..40),
        |(cfg, seed, extra)| {
            let len = cfg.window_len * extra + seed as usize % cfg.window_len;
            let x = signal(gaussian(len, seed));
            let y = istft(&stft(&x, &cfg).unwrap()).unwrap();
            let peak = x.samples().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let l = cfg.window_len;
            for n in l..y.len().saturating_sub(l) {
                let err = (x.samples()[n] - y.samples()[n]).abs() / peak;
                prop_assert!(err < 1e-8, "sample {n}: relative error {err}");
            }
            Ok(())
        },
    )
}

pub fn istft_linear() -> Result<(), String> {
    run(
        32,
        (stft_configs(), any::<u64>(), 2usize..20),
        |(cfg, seed, extra)| {
            let len = cfg.window_len * extra;
            let a = stft(&signal(gaussian(len, seed)), &cfg).unwrap();
            let b = stft(&signal(gaussian(len, seed ^ 0xABCD)), &cfg).unwrap();
            let sum_values = a
                .values()
                .iter()
                .zip(b.values())
                .map(|(x, y)| x + y)
                .collect();
            let sum = a.with_values(sum_values).unwrap();
            let (ya, yb, ys) = (istft(&a).unwrap(), istft(&b).unwrap(), istft(&sum).unwrap());
            for ((p, q), s) in ya.samples().iter().zip(yb.samples()).zip(ys.samples()) {
                prop_assert!((p + q - s).abs() < 1e-10);
            }
            Ok(())
        },
    )
}

pub fn magnitude_sign_invariant() -> Result<(), String> {
    run(
        32,
        (stft_configs(), any::<u64>(), 1usize..20),
        |(cfg, seed, extra)| {
            let x = signal(gaussian(cfg.window_len * extra, seed));
            let m = magnitude(&stft(&x, &cfg).unwrap());
            let n = magnitude(&stft(&x.scaled(-1.0), &cfg).unwrap());
            prop_assert_eq!(m.values(), n.values());
            Ok(())
        },
    )
}

pub fn griffin_lim_monotone() -> Result<(), String> {
    run(
        20,
        (any::<u64>(), 4usize..40, any::<bool>()),
        |(seed, frames, random_phase)| {
            let mut r = rng(seed);
            let cfg = small_stft();
            let target = spectrogram_from(cfg, frames, |_, _| r.random::<f64>() * 2.0);
            let init_phase = if random_phase {
                PhaseInit::Random(seed)
            } else {
                PhaseInit::Zero
            };
            let rec = griffin_lim(
                &target,
                &GriffinLimConfig {
                    iterations: 60,
                    init_phase,
                    tolerance: 0.0,
                },
            )
            .unwrap();
            for w in rec.residuals.windows(2) {
                prop_assert!(
                    w[1] <= w[0] + 1e-12,
                    "residual rose from {} to {}",
                    w[0],
                    w[1]
                );
            }
            Ok(())
        },
    )
}

pub fn parseval_energy() -> Result<(), String> {
    run(8, any::<u64>(), |seed| {
        let cfg = StftConfig::default();
        let x = signal(gaussian(50_000, seed));
        let spec = stft(&x, &cfg).unwrap();
        let frames = spec.frames();
        let span = cfg.span(frames);
        let (l, hop, nfft) = (cfg.window_len, cfg.hop(), cfg.fft_len);
        let window = cfg.window.coefficients(l);
        let mut coverage = vec![0.0; span];
        for t in 0..frames {
            for (i, w) in window.iter().enumerate() {
                coverage[t * hop + i] += w * w;
            }
        }
        // Average window-square coverage on the fully covered interior.
        let interior = &coverage[l..span - l];
        let c = interior.iter().sum::<f64>() / interior.len() as f64;
        let mut spec_energy = 0.0;
        for t in 0..frames {
            for (k, z) in spec.frame(t).iter().enumerate() {
                let weight = if k == 0 || k == nfft / 2 { 1.0 } else { 2.0 };
                spec_energy += weight * z.norm_sqr();
            }
        }
        spec_energy /= nfft as f64 * c;
        let signal_energy: f64 = x.samples()[..span].iter().map(|v| v * v).sum();
        let rel = (spec_energy - signal_energy).abs() / signal_energy;
        prop_assert!(rel < 0.01, "relative energy gap {rel}");
        Ok(())
    })
}

pub fn distance_matrix_shape() -> Result<(), String> {
    run(32, (any::<u64>(), 2usize..50), |(seed, frames)| {
        let mut r = rng(seed);
        let spec = spectrogram_from(small_stft(), frames, |_, _| r.random::<f64>() * 10.0);
        let d = pairwise_distances(&spec, None).unwrap();
        let n = d.len();
        for i in 0..n {
            prop_assert_eq!(d.get(i, i), 0.0);
            for j in 0..n {
                let v = d.get(i, j);
                prop_assert!(v.is_finite() && v >= 0.0);
                prop_assert_eq!(v, d.get(j, i));
            }
        }
        Ok(())
    })
}

pub fn dbscan_matches_oracle() -> Result<(), String> {
    run(200, any::<u64>(), |seed| {
        let (points, eps, min_pts) = clustering_instance(seed, 60);
        let dist = naive_distances(&points);
        let got = dbscan(&matrix(&dist), &DbscanParams::new(eps, min_pts).unwrap()).unwrap();
        let want = brute_force_dbscan(&dist, eps, min_pts);
        prop_assert_eq!(canonical(&got.labels), canonical(&want));
        Ok(())
    })
}

fn cluster_sets(labels: &[i32]) -> (Vec<Vec<usize>>, Vec<usize>) {
    let mut clusters: std::collections::BTreeMap<i32, Vec<usize>> = Default::default();
    let mut outliers = Vec::new();
    for (i, &l) in labels.iter().enumerate() {
        if l < 0 {
            outliers.push(i);
        } else {
            clusters.entry(l).or_default().push(i);
        }
    }
    let mut sets: Vec<Vec<usize>> = clusters.into_values().collect();
    sets.sort();
    (sets, outliers)
}

pub fn dbscan_permutation_invariant() -> Result<(), String> {
    run(100, (any::<u64>(), any::<u64>()), |(seed, shuffle)| {
        let (points, eps, min_pts) = clustering_instance(seed, 60);
        let n = points.len();
        let mut order: Vec<usize> = (0..n).collect();
        let mut r = rng(shuffle);
        for i in (1..n).rev() {
            order.swap(i, r.random_range(0..=i));
        }
        let shuffled: Vec<Vec<f64>> = order.iter().map(|&i| points[i].clone()).collect();
        let params = DbscanParams::new(eps, min_pts).unwrap();
        let a = dbscan(&matrix(&naive_distances(&points)), &params).unwrap();
        let b = dbscan(&matrix(&naive_distances(&shuffled)), &params).unwrap();
        // Map the shuffled labels back to the original indices.
        let mut back = vec![0; n];
        for (pos, &i) in order.iter().enumerate() {
            back[i] = b.labels[pos];
        }
        let is_core = |labels: &dsc_core::clustering::FrameLabels, i: usize| {
            labels.states[i] == dsc_core::clustering::PointState::Core
        };
        for (pos, &i) in order.iter().enumerate() {
            prop_assert_eq!(is_core(&a, i), is_core(&b, pos));
        }
        // Boundary points reachable from two clusters may switch sides, so
        // compare the core partition and the outlier set.
        let core_only = |labels: &[i32], core: &dyn Fn(usize) -> bool| -> Vec<i32> {
            labels
                .iter()
                .enumerate()
                .map(|(i, &l)| if core(i) { l } else { -2 })
                .collect()
        };
        let a_core = core_only(&a.labels, &|i| is_core(&a, i));
        let b_core = core_only(&back, &|i| is_core(&a, i));
        prop_assert_eq!(cluster_sets(&a_core).0, cluster_sets(&b_core).0);
        prop_assert_eq!(cluster_sets(&a.labels).1, cluster_sets(&back).1);
        Ok(())
    })
}

pub fn dbscan_scale_invariant() -> Result<(), String> {
    run(100, (any::<u64>(), -6i32..7), |(seed, k)| {
        let c = 2f64.powi(k);
        let (points, eps, min_pts) = clustering_instance(seed, 60);
        let d = matrix(&naive_distances(&points));
        let a = dbscan(&d, &DbscanParams::new(eps, min_pts).unwrap()).unwrap();
        let b = dbscan(&d.scaled(c), &DbscanParams::new(c * eps, min_pts).unwrap()).unwrap();
        prop_assert_eq!(a, b);
        Ok(())
    })
}

pub fn epsilon_scale_equivariant() -> Result<(), String> {
    run(
        100,
        (any::<u64>(), -6i32..7, 1usize..8),
        |(seed, k, min_pts)| {
            let c = 2f64.powi(k);
            let (points, _, _) = clustering_instance(seed, 60);
            if points.len() < 2 {
                return Ok(());
            }
            let d = matrix(&naive_distances(&points));
            let a = estimate_epsilon(&d, min_pts).unwrap();
            let b = estimate_epsilon(&d.scaled(c), min_pts).unwrap();
            prop_assert_eq!(b.epsilon, c * a.epsilon);
            prop_assert_eq!(a.knee.index, b.knee.index);
            Ok(())
        },
    )
}

/// Random spectrograms: plain noise, noise with loud frames, constant frames.
fn partition_input(seed: u64) -> dsc_core::tfr::MagnitudeSpectrogram {
    let mut r = rng(seed);
    let frames = r.random_range(4..80);
    let kind = r.random_range(0..3);
    let loud: Vec<bool> = (0..frames).map(|_| r.random::<f64>() < 0.1).collect();
    spectrogram_from(small_stft(), frames, |t, _| match kind {
        0 => r.random::<f64>(),
        1 => r.random::<f64>() * if loud[t] { 40.0 } else { 1.0 },
        _ => 1.5,
    })
}

pub fn partition_exact() -> Result<(), String> {
    run(64, (any::<u64>(), 1usize..8), |(seed, min_pts)| {
        let spec = partition_input(seed);
        let p = match dsc_partition(
            &spec,
            &DscConfig {
                min_pts,
                ..DscConfig::default()
            },
        ) {
            Ok(p) => p,
            Err(dsc_core::DscError::StageCollapse { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        prop_assert_eq!(p.class_of_frame.len(), spec.frames());
        for t in 0..spec.frames() {
            let owner = p.class_of_frame[t];
            for f in 0..spec.bins() {
                let parts = [p.z1.get(f, t), p.z2.get(f, t), p.z3.get(f, t)];
                prop_assert_eq!(parts[0] + parts[1] + parts[2], spec.get(f, t));
                for class in FrameClass::ALL {
                    let v = p.part(class).get(f, t);
                    if class == owner {
                        prop_assert_eq!(v, spec.get(f, t));
                    } else {
                        prop_assert_eq!(v, 0.0);
                    }
                }
            }
        }
        Ok(())
    })
}

pub fn partition_deterministic() -> Result<(), String> {
    run(32, any::<u64>(), |seed| {
        let spec = partition_input(seed);
        let cfg = DscConfig::default();
        match (dsc_partition(&spec, &cfg), dsc_partition(&spec, &cfg)) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.class_of_frame, b.class_of_frame);
                prop_assert_eq!(a.stages, b.stages);
            }
            (Err(a), Err(b)) => prop_assert_eq!(a, b),
            _ => return Err(TestCaseError::fail("one run failed, the other did not")),
        }
        Ok(())
    })
}

fn random_ses(seed: u64) -> EnvelopeSpectrum {
    let mut r = rng(seed);
    let bins = r.random_range(300..3000);
    let df = 0.5;
    EnvelopeSpectrum {
        amplitudes: (0..bins)
            .map(|_| {
                if r.random::<f64>() < 0.3 {
                    0.0
                } else {
                    r.random::<f64>().powi(3)
                }
            })
            .collect(),
        freqs: (0..bins).map(|k| k as f64 * df).collect(),
        source_len: 2 * (bins - 1),
    }
}

fn envsi_config(seed: u64) -> EnvsiConfig {
    let mut r = rng(seed ^ 0x5EED);
    EnvsiConfig {
        fault_freq: r.random_range(3.0..18.0),
        harmonics: r.random_range(1..9),
        tolerance_bins: r.random_range(0..4),
    }
}

pub fn envsi_bounded() -> Result<(), String> {
    run(200, any::<u64>(), |seed| {
        let v = envsi(&random_ses(seed), &envsi_config(seed)).unwrap();
        prop_assert!((0.0..=1.0).contains(&v), "envsi {v}");
        Ok(())
    })
}

pub fn envsi_scale_invariant() -> Result<(), String> {
    run(200, (any::<u64>(), -20.0f64..20.0), |(seed, log_c)| {
        let ses = random_ses(seed);
        let cfg = envsi_config(seed);
        let a = envsi(&ses, &cfg).unwrap();
        let b = envsi(&ses.scaled(log_c.exp()), &cfg).unwrap();
        prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        Ok(())
    })
}

pub fn fault_frequency_scale_invariant() -> Result<(), String> {
    run(
        100,
        (any::<u64>(), -20i32..20, 0.05f64..0.6),
        |(seed, k, prominence_fraction)| {
            let ses = random_ses(seed);
            let cfg = PeakConfig {
                prominence_fraction,
                band: (0.0, 140.0),
            };
            let a = identify_fault_frequency(&ses, &cfg);
            let b = identify_fault_frequency(&ses.scaled(2f64.powi(k)), &cfg);
            match (a, b) {
                (Ok(a), Ok(b)) => {
                    prop_assert_eq!(a.frequency, b.frequency);
                    let bins = |f: &dsc_core::FaultFrequency| {
                        f.peaks.iter().map(|p| p.bin).collect::<Vec<_>>()
                    };
                    prop_assert_eq!(bins(&a), bins(&b));
                }
                (Err(a), Err(b)) => prop_assert_eq!(a, b),
                (a, b) => return Err(TestCaseError::fail(format!("{a:?} vs {b:?}"))),
            }
            Ok(())
        },
    )
}

pub fn ses_sign_invariant() -> Result<(), String> {
    run(32, (any::<u64>(), 16usize..5000), |(seed, len)| {
        let x = signal(gaussian(len, seed));
        let a = squared_envelope_spectrum(&x).unwrap();
        let b = squared_envelope_spectrum(&x.scaled(-1.0)).unwrap();
        prop_assert_eq!(a, b);
        Ok(())
    })
}

fn heavy_spectrogram(seed: u64, frames: usize) -> dsc_core::tfr::MagnitudeSpectrogram {
    let mut r = rng(seed);
    let cfg = small_stft();
    spectrogram_from(cfg, frames, |_, f| {
        let base = r.random::<f64>();
        if f % 3 == 0 {
            base / (r.random::<f64>() + 1e-3)
        } else {
            base
        }
    })
}

pub fn selectors_scale_invariant() -> Result<(), String> {
    run(16, (any::<u64>(), -8i32..9), |(seed, k)| {
        let c = 2f64.powi(k);
        let spec = heavy_spectrogram(seed, 300);
        let scaled = spec.map(|v| v * c);
        let sk = (
            spectral_kurtosis(&spec).unwrap(),
            spectral_kurtosis(&scaled).unwrap(),
        );
        for (a, b) in sk.0.values.iter().zip(&sk.1.values) {
            prop_assert!(
                (a - b).abs() <= 1e-9 * (1.0 + a.abs()),
                "kurtosis {a} vs {b}"
            );
        }
        let alpha = (
            alpha_selector(&spec).unwrap(),
            alpha_selector(&scaled).unwrap(),
        );
        prop_assert_eq!(&alpha.0.values, &alpha.1.values);
        // A single vector, to cover scale factors that are not powers of two.
        let x = gaussian(2000, seed);
        let y: Vec<f64> = x.iter().map(|v| v * 3.7).collect();
        let (kx, ky) = (excess_kurtosis(&x).unwrap(), excess_kurtosis(&y).unwrap());
        prop_assert!((kx - ky).abs() < 1e-9);
        let (ax, ay) = (fit_alpha_stable(&x).unwrap(), fit_alpha_stable(&y).unwrap());
        prop_assert!((ax.alpha - ay.alpha).abs() < 1e-9);
        prop_assert!((ay.scale / ax.scale - 3.7).abs() < 1e-9);
        Ok(())
    })
}

pub fn alpha_selector_range() -> Result<(), String> {
    run(16, any::<u64>(), |seed| {
        let curve = alpha_selector(&heavy_spectrogram(seed, 200)).unwrap();
        for &v in &curve.values {
            prop_assert!((0.0..2.0).contains(&v), "alpha selector {v}");
        }
        Ok(())
    })
}

pub fn cv_quadratic_scaling() -> Result<(), String> {
    run(
        64,
        (any::<u64>(), 250usize..5000, -6i32..7, any::<bool>()),
        |(seed, n, k, heavy)| {
            let c = 2f64.powi(k);
            let x = if heavy {
                super::cauchy(n, seed)
            } else {
                gaussian(n, seed)
            };
            let y: Vec<f64> = x.iter().map(|v| v * c).collect();
            match (conditional_variance(&x), conditional_variance(&y)) {
                (Some(a), Some(b)) => prop_assert!(
                    (b - c * c * a).abs() <= 1e-12 * b.abs().max(1e-300),
                    "{a} {b}"
                ),
                (a, b) => prop_assert_eq!(a.is_none(), b.is_none()),
            }
            Ok(())
        },
    )
}

pub fn single_bin_filter() -> Result<(), String> {
    run(16, (any::<u64>(), 5usize..250), |(seed, bin)| {
        let cfg = StftConfig::default();
        let x = signal(gaussian(20_000, seed));
        let bins = cfg.bins();
        let mut values = vec![0.0; bins];
        values[bin] = 1.0;
        let curve = SelectorCurve {
            kind: SelectorKind::SpectralKurtosis,
            values,
            bin_freqs: (0..bins)
                .map(|k| k as f64 * FS / cfg.fft_len as f64)
                .collect(),
            degenerate: vec![false; bins],
        };
        let y = selector_filter(&x, &curve, &cfg).unwrap();
        // Re-analysis spreads the band by the window's main lobe once more.
        let spec = magnitude(&stft(&y, &cfg).unwrap());
        let mut inside = 0.0;
        let mut total = 0.0;
        for t in 0..spec.frames() {
            for (f, v) in spec.frame(t).iter().enumerate() {
                total += v * v;
                if f.abs_diff(bin) <= 8 {
                    inside += v * v;
                }
            }
        }
        prop_assert!(inside / total > 0.99, "in-band share {}", inside / total);
        Ok(())
    })
}

fn small_grid(base_seed: u64) -> McGrid {
    let mut pipeline = PipelineConfig::default();
    pipeline.griffin_lim.iterations = 20;
    McGrid {
        sigma_levels: vec![0.6, 1.6],
        gamma_levels: vec![1.0, 7.0],
        iterations: 2,
        base_seed,
        simulation: short_scenario(0, 0.6, 3.0),
        pipeline,
        tolerance_hz: 0.5,
    }
}

pub fn montecarlo_deterministic() -> Result<(), String> {
    run(2, any::<u64>(), |seed| {
        let grid = small_grid(seed);
        let a = summarize(&grid, &run_grid(&grid).unwrap()).unwrap();
        let b = summarize(&grid, &run_grid(&grid).unwrap()).unwrap();
        prop_assert_eq!(a, b);
        Ok(())
    })
}

pub fn montecarlo_order_independent() -> Result<(), String> {
    run(2, (any::<u64>(), any::<u64>()), |(seed, shuffle)| {
        let grid = small_grid(seed);
        let whole = summarize(&grid, &run_grid(&grid).unwrap()).unwrap();
        let mut cells = grid.cells();
        let mut r = rng(shuffle);
        for i in (1..cells.len()).rev() {
            cells.swap(i, r.random_range(0..=i));
        }
        // Run the shuffled cells in two separate batches, later batch first.
        let (first, second) = cells.split_at(cells.len() / 2);
        let mut results = run_cells(&grid, second).unwrap();
        results.extend(run_cells(&grid, first).unwrap());
        let pieced = summarize(&grid, &results).unwrap();
        prop_assert_eq!(whole, pieced);
        Ok(())
    })
}

pub fn montecarlo_summary_consistent() -> Result<(), String> {
    run(1, any::<u64>(), |seed| {
        let grid = small_grid(seed);
        let results = run_grid(&grid).unwrap();
        let report = summarize(&grid, &results).unwrap();
        for cell in &results {
            let summary = report.cell(cell.sigma_index, cell.gamma_index).unwrap();
            let rate = report.detection_rate[cell.sigma_index][cell.gamma_index];
            prop_assert!((0.0..=1.0).contains(&rate));
            let detected = cell.runs.iter().filter(|r| r.detected).count();
            prop_assert_eq!(rate, detected as f64 / grid.iterations as f64);
            for class in FrameClass::ALL {
                let mut samples: Vec<f64> = cell
                    .runs
                    .iter()
                    .filter_map(|r| r.class_envsi(class))
                    .collect();
                samples.sort_by(f64::total_cmp);
                match summary.class(class) {
                    None => prop_assert!(samples.is_empty()),
                    Some(b) => {
                        prop_assert_eq!(b.count, samples.len());
                        prop_assert!(b.whisker_low <= b.q1 && b.q1 <= b.median);
                        prop_assert!(b.median <= b.q3 && b.q3 <= b.whisker_high);
                        prop_assert!(
                            samples.contains(&b.whisker_low) && samples.contains(&b.whisker_high)
                        );
                        let fence = 1.5 * b.iqr();
                        let outside = samples
                            .iter()
                            .filter(|&&v| v < b.q1 - fence || v > b.q3 + fence)
                            .count();
                        prop_assert_eq!(b.outliers.len(), outside);
                    }
                }
            }
        }
        Ok(())
    })
}
