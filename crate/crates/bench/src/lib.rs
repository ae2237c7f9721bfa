//! Inputs shared by the benchmarks.

use gcs_core::OrbSequence;

/// Orb signatures of growing length, `n` orbs of `(i % 3 + 1)` ups and `(i % 4 + 2)` downs.
pub fn orb_ladder(n: usize) -> OrbSequence {
    let ups = (0..n).map(|i| (i % 3 + 1) as u32).collect();
    let downs = (0..n).map(|i| (i % 4 + 2) as u32).collect();
    OrbSequence::new(ups, downs).expect("valid orbs")
}
