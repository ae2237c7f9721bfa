//! Generalized Collatz maps `F_k(n) = (3n + k)/2` for odd `n`, `n/2` for even
//! `n`, with `k` odd and positive.
//!
//! * [`algebra`] solves cycles from orb signatures exactly.
//! * [`engine`] iterates the map and detects cycles.
//! * [`scan`] memoizes whole seed ranges in parallel.
//! * [`catalog`] builds and classifies the cycle set of one `F_k`.
//! * [`diophantine`] finds `2^m − 3^n = k` from cycles.
//! * [`experiments`] reproduces convergence statistics and distributions.

pub mod algebra;
pub mod catalog;
pub mod diophantine;
pub mod dyadic;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod io;
pub mod orb;
pub mod scan;

pub use algebra::{
    collatz_cycle_condition, compute_alpha_term, compute_invariants, cycle_t0, origin_k,
    path_closed_form, rotate_orbs, up_iterate_closed_form, CycleSolution, NoCycle, OrbInvariants,
    Origin,
};
pub use catalog::{
    build_catalog, classify_counts, composition_cycles, family_second, family_two_pow_minus_three,
    inherit_cycle, partition_map, trivial_cycle, ClassCounts, Classification, CycleCatalog,
    CycleRecord, PartitionMap,
};
pub use diophantine::{DiophantineOutcome, DiophantineSolution};
pub use dyadic::Dyadic;
pub use engine::{
    convergence_certificate, detect_cycle, extract_orbs, path_length_to_convergence, sigma, step,
    OutcomeKind, PathOutcome, StepConvention, StepLimits, Value,
};
pub use error::{GcsError, Result};
pub use experiments::{
    convergence_stats, distribution_buckets, max_t0_ratio_study, random_orbs, BucketDistribution,
    Grouping, PathStats,
};
pub use orb::{OrbSequence, OrbTrace};
pub use scan::{scan_range, RangeScan};
