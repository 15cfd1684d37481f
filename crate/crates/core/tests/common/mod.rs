//! Helpers shared by the integration suites: independent reference
//! implementations, data generators and the property checks.
#![allow(dead_code)]

pub mod properties;

use std::collections::{BTreeMap, VecDeque};

use dsc_core::clustering::DistanceMatrix;
use dsc_core::tfr::{MagnitudeSpectrogram, Spectrogram};
use dsc_core::StftConfig;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Deterministic runner: fixed RNG stream, no regression files.
pub fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n).map(|_| StandardNormal.sample(&mut r)).collect()
}

/// Standard Cauchy draws as the ratio of two independent standard normals.
pub fn cauchy(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n)
        .map(|_| {
            let a: f64 = StandardNormal.sample(&mut r);
            let b: f64 = StandardNormal.sample(&mut r);
            a / b
        })
        .collect()
}

pub fn uniform_points(n: usize, dims: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    (0..n)
        .map(|_| (0..dims).map(|_| r.random::<f64>()).collect())
        .collect()
}

/// Squared Euclidean distances by a plain double loop.
pub fn naive_distances(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|a| {
            points
                .iter()
                .map(|b| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum())
                .collect()
        })
        .collect()
}

/// Magnitude spectrogram with `frames` frames whose values come from `value(t, f)`.
pub fn spectrogram_from(
    config: StftConfig,
    frames: usize,
    mut value: impl FnMut(usize, usize) -> f64,
) -> MagnitudeSpectrogram {
    let bins = config.bins();
    let mut values = Vec::with_capacity(frames * bins);
    for t in 0..frames {
        for f in 0..bins {
            values.push(value(t, f));
        }
    }
    Spectrogram::from_frames(values, frames, config, 25_000.0).unwrap()
}

/// Small STFT layout (33 bins) so clustering instances stay cheap.
pub fn small_stft() -> StftConfig {
    StftConfig {
        window_len: 64,
        fft_len: 64,
        ..StftConfig::default()
    }
}

/// Reference DBSCAN: exhaustive neighbourhoods, core graph components by
/// BFS, boundary points attached to the component with the smallest core
/// index among those that reach them.
pub fn brute_force_dbscan(dist: &[Vec<f64>], eps: f64, min_pts: usize) -> Vec<i32> {
    let n = dist.len();
    let neighbours: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| dist[i][j] <= eps).collect())
        .collect();
    let core: Vec<bool> = neighbours.iter().map(|nb| nb.len() >= min_pts).collect();

    let mut component = vec![usize::MAX; n];
    let mut roots = Vec::new();
    for start in 0..n {
        if !core[start] || component[start] != usize::MAX {
            continue;
        }
        let id = roots.len();
        roots.push(start);
        component[start] = id;
        let mut queue = VecDeque::from([start]);
        while let Some(p) = queue.pop_front() {
            for &q in &neighbours[p] {
                if core[q] && component[q] == usize::MAX {
                    component[q] = id;
                    queue.push_back(q);
                }
            }
        }
    }

    (0..n)
        .map(|i| {
            if core[i] {
                component[i] as i32
            } else {
                neighbours[i]
                    .iter()
                    .filter(|&&j| core[j])
                    .map(|&j| component[j])
                    .min()
                    .map_or(-1, |c| c as i32)
            }
        })
        .collect()
}

/// Renumbers clusters by first appearance so labelings can be compared up
/// to a permutation of ids.
pub fn canonical(labels: &[i32]) -> Vec<i32> {
    let mut map = BTreeMap::new();
    labels
        .iter()
        .map(|&l| {
            if l < 0 {
                -1
            } else {
                let next = map.len() as i32;
                *map.entry(l).or_insert(next)
            }
        })
        .collect()
}

pub fn matrix(dist: &[Vec<f64>]) -> DistanceMatrix {
    let n = dist.len();
    DistanceMatrix::from_values(n, dist.iter().flatten().copied().collect()).unwrap()
}

/// Random clustering instance: a few blobs plus scattered points in the
/// unit square, with a radius drawn around the typical spacing.
pub fn clustering_instance(seed: u64, max_points: usize) -> (Vec<Vec<f64>>, f64, usize) {
    let mut r = rng(seed);
    let n = r.random_range(1..=max_points);
    let blobs = r.random_range(1..=4usize);
    let centres: Vec<[f64; 2]> = (0..blobs).map(|_| [r.random(), r.random()]).collect();
    let spread = r.random_range(0.01..0.15);
    let points: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            if r.random::<f64>() < 0.2 {
                vec![r.random(), r.random()]
            } else {
                let c = centres[r.random_range(0..blobs)];
                let dx: f64 = StandardNormal.sample(&mut r);
                let dy: f64 = StandardNormal.sample(&mut r);
                vec![c[0] + spread * dx, c[1] + spread * dy]
            }
        })
        .collect();
    let eps = r.random_range(0.0005..0.05);
    let min_pts = r.random_range(1..=8usize);
    (points, eps, min_pts)
}
