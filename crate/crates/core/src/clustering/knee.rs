use crate::error::{DscError, Result};

use super::DistanceMatrix;

/// Normalized chord distance below which a curve counts as having no knee.
const DEGENERATE_KNEE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Knee {
    pub index: usize,
    pub value: f64,
    /// True when the curve is flat or straight and the index carries no information.
    pub degenerate: bool,
}

/// Knee of a descending curve: the point farthest below the chord joining
/// its endpoints, after scaling both axes to the unit interval.
///
/// Only points below the chord count, so the knee is the elbow where large
/// values give way to the bulk of the curve. A curve with no point below the
/// chord is degenerate and reports its first (largest) value.
pub fn knee_point(descending: &[f64]) -> Option<Knee> {
    let n = descending.len();
    let first = *descending.first()?;
    let last = descending[n - 1];
    let range = first - last;
    if n < 3 || range <= 0.0 {
        return Some(Knee {
            index: 0,
            value: first,
            degenerate: true,
        });
    }
    // The chord runs from (0, 1) to (1, 0) in normalized coordinates, so the
    // signed distance below it is proportional to 1 - x - y.
    let (index, dist) = descending
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let x = i as f64 / (n - 1) as f64;
            let y = (v - last) / range;
            (i, (1.0 - x - y) / std::f64::consts::SQRT_2)
        })
        .fold(
            (0, 0.0),
            |best, cur| if cur.1 > best.1 { cur } else { best },
        );
    Some(Knee {
        index,
        value: descending[index],
        degenerate: dist < DEGENERATE_KNEE,
    })
}

/// Distance from each point to its `k`-th nearest point, counting the point
/// itself as the first (so `k = 1` gives zeros).
pub fn kth_neighbor_distances(dist: &DistanceMatrix, k: usize) -> Vec<f64> {
    let n = dist.len();
    let k = k.clamp(1, n);
    let mut row = Vec::with_capacity(n);
    (0..n)
        .map(|i| {
            row.clear();
            row.extend_from_slice(dist.row(i));
            let (_, kth, _) = row.select_nth_unstable_by(k - 1, f64::total_cmp);
            *kth
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonEstimate {
    pub epsilon: f64,
    pub knee: Knee,
    /// Descending k-NN distance curve the knee was taken from.
    pub curve: Vec<f64>,
}

/// DBSCAN radius at the knee of the descending `min_pts`-NN distance curve.
pub fn estimate_epsilon(dist: &DistanceMatrix, min_pts: usize) -> Result<EpsilonEstimate> {
    if dist.len() < 2 {
        return Err(DscError::InsufficientData {
            needed: 2,
            got: dist.len(),
        });
    }
    if min_pts == 0 {
        return Err(DscError::InvalidParameter(
            "min_pts must be at least 1".into(),
        ));
    }
    let mut curve = kth_neighbor_distances(dist, min_pts);
    curve.sort_by(|a, b| b.total_cmp(a));
    let knee = knee_point(&curve).expect("curve is non-empty");
    Ok(EpsilonEstimate {
        epsilon: knee.value,
        knee,
        curve,
    })
}
