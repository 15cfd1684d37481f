use rayon::prelude::*;

use crate::error::{DscError, Result};
use crate::tfr::MagnitudeSpectrogram;

/// Symmetric matrix of squared Euclidean distances between frames.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<f64>,
    /// Original frame index of each row.
    frames: Vec<usize>,
}

impl DistanceMatrix {
    /// Builds a matrix from row-major values, checking symmetry, a zero
    /// diagonal and non-negative finite entries.
    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(DscError::Shape(format!(
                "{} values for a {n}x{n} matrix",
                values.len()
            )));
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(DscError::InvalidInput(format!("non-zero diagonal at {i}")));
            }
            for j in 0..n {
                let v = values[i * n + j];
                if !v.is_finite() || v < 0.0 || v != values[j * n + i] {
                    return Err(DscError::InvalidInput(format!(
                        "entry ({i}, {j}) = {v} breaks symmetry or non-negativity"
                    )));
                }
            }
        }
        Ok(DistanceMatrix {
            n,
            values,
            frames: (0..n).collect(),
        })
    }

    /// Squared Euclidean distances between the rows of `points`.
    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let n = points.len();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = squared_euclidean(&points[i], &points[j]);
                values[i * n + j] = d;
                values[j * n + i] = d;
            }
        }
        Ok(DistanceMatrix {
            n,
            values,
            frames: (0..n).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn frames(&self) -> &[usize] {
        &self.frames
    }

    /// Multiplies every distance by `factor`.
    pub fn scaled(&self, factor: f64) -> DistanceMatrix {
        DistanceMatrix {
            n: self.n,
            values: self.values.iter().map(|v| v * factor).collect(),
            frames: self.frames.clone(),
        }
    }
}

fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    // Four independent accumulators let the compiler vectorize the loop.
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            let d = x[k] - y[k];
            acc[k] += d * d;
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Distances between all frames of `spec`, or only those with `active[t]` set.
pub fn pairwise_distances(
    spec: &MagnitudeSpectrogram,
    active: Option<&[bool]>,
) -> Result<DistanceMatrix> {
    let frames: Vec<usize> = match active {
        Some(mask) => {
            if mask.len() != spec.frames() {
                return Err(DscError::Shape(format!(
                    "frame mask of length {} for {} frames",
                    mask.len(),
                    spec.frames()
                )));
            }
            (0..spec.frames()).filter(|&t| mask[t]).collect()
        }
        None => (0..spec.frames()).collect(),
    };
    let n = frames.len();
    if n < 2 {
        return Err(DscError::InsufficientData { needed: 2, got: n });
    }
    let mut values = vec![0.0; n * n];
    values.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let a = spec.frame(frames[i]);
        for (j, slot) in row.iter_mut().enumerate().skip(i + 1) {
            *slot = squared_euclidean(a, spec.frame(frames[j]));
        }
    });
    // (a - b)^2 == (b - a)^2 term by term, so mirroring is exact.
    for i in 1..n {
        for j in 0..i {
            values[i * n + j] = values[j * n + i];
        }
    }
    Ok(DistanceMatrix { n, values, frames })
}
