//! Deterministic sampling helpers over a raw [`RngCore`].
//!
//! Draws are derived from `next_u64` with fixed arithmetic so that every
//! consumer is reproducible across platforms and crate versions; no
//! distribution code from `rand` is involved.

use rand_core::RngCore;

/// Uniform draw in `[0, 1)` with 53 bits of precision.
pub(crate) fn unit_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw in `[lo, hi)`.
#[cfg(test)]
pub(crate) fn range_f64(rng: &mut impl RngCore, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * unit_f64(rng)
}

/// Uniform index in `[0, n)` via widening multiply.
pub(crate) fn index(rng: &mut impl RngCore, n: usize) -> usize {
    debug_assert!(n > 0);
    ((rng.next_u64() as u128 * n as u128) >> 64) as usize
}

/// Samples an index proportional to `weights` (non-negative, not all zero).
pub(crate) fn weighted_index(rng: &mut impl RngCore, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    debug_assert!(total > 0.0);
    let target = unit_f64(rng) * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return i;
        }
    }
    // Float round-off can leave target just past the final accumulator.
    weights.len() - 1
}
