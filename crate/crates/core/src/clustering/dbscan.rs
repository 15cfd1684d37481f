use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{DscError, Result};

use super::DistanceMatrix;

/// Label given to points that belong to no cluster.
pub const OUTLIER: i32 = -1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DbscanParams {
    pub epsilon: f64,
    pub min_pts: usize,
}

impl DbscanParams {
    pub fn new(epsilon: f64, min_pts: usize) -> Result<Self> {
        let p = DbscanParams { epsilon, min_pts };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(DscError::InvalidParameter(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.min_pts == 0 {
            return Err(DscError::InvalidParameter(
                "min_pts must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointState {
    Core,
    Boundary,
    Outlier,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameLabels {
    /// Cluster id per point, [`OUTLIER`] for noise.
    pub labels: Vec<i32>,
    pub states: Vec<PointState>,
}

impl FrameLabels {
    pub fn cluster_count(&self) -> usize {
        self.labels
            .iter()
            .copied()
            .max()
            .map_or(0, |m| (m + 1).max(0) as usize)
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.cluster_count()];
        for &l in &self.labels {
            if l >= 0 {
                sizes[l as usize] += 1;
            }
        }
        sizes
    }

    pub fn outlier_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == OUTLIER).count()
    }
}

/// DBSCAN over a precomputed distance matrix.
///
/// A point's neighbourhood is every point within `epsilon`, itself included;
/// it is core when that neighbourhood holds at least `min_pts` points.
/// Clusters are numbered in order of their lowest-index core point and a
/// boundary point joins the first cluster that reaches it.
pub fn dbscan(dist: &DistanceMatrix, params: &DbscanParams) -> Result<FrameLabels> {
    params.validate()?;
    let n = dist.len();
    let neighbors: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            dist.row(i)
                .iter()
                .enumerate()
                .filter(|(_, &d)| d <= params.epsilon)
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    let is_core: Vec<bool> = neighbors
        .iter()
        .map(|nb| nb.len() >= params.min_pts)
        .collect();

    let mut labels = vec![OUTLIER; n];
    let mut next_cluster = 0;
    let mut queue = VecDeque::new();
    for seed in 0..n {
        if !is_core[seed] || labels[seed] != OUTLIER {
            continue;
        }
        labels[seed] = next_cluster;
        queue.push_back(seed);
        while let Some(p) = queue.pop_front() {
            for &q in &neighbors[p] {
                if labels[q] == OUTLIER {
                    labels[q] = next_cluster;
                    if is_core[q] {
                        queue.push_back(q);
                    }
                }
            }
        }
        next_cluster += 1;
    }

    let states = (0..n)
        .map(|i| match (is_core[i], labels[i]) {
            (true, _) => PointState::Core,
            (false, OUTLIER) => PointState::Outlier,
            (false, _) => PointState::Boundary,
        })
        .collect();
    Ok(FrameLabels { labels, states })
}
