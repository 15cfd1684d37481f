//! Counter-based seed derivation.
//!
//! Child seeds are obtained by folding a path of indices into a base seed
//! with the SplitMix64 finalizer, so independent jobs (grid cells, iterations,
//! signal components) draw from unrelated streams without coordination.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from `base` and a path of indices.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(mix(base.wrapping_add(GOLDEN)), |acc, &idx| {
            mix(acc ^ mix(idx.wrapping_add(GOLDEN).wrapping_mul(GOLDEN)))
        })
}
