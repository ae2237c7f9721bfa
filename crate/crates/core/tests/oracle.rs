//! Engine and scan results against a plain reference iterator.

use std::collections::HashMap;

use gcs_core::engine::{detect_cycle, StepConvention, StepLimits, Value};
use gcs_core::scan::scan_range;
use num_bigint::BigUint;

/// No memo, no escalation; u64 is wide enough for these ranges.
struct Reference {
    t0: u64,
    cycle: Vec<u64>,
    to_repeat: u64,
    to_cycle: u64,
    to_t0: u64,
}

fn reference(k: u64, n: u64) -> Reference {
    let mut at = HashMap::new();
    let mut path = Vec::new();
    let mut v = n;
    while !at.contains_key(&v) {
        at.insert(v, path.len());
        path.push(v);
        v = if v % 2 == 1 { (3 * v + k) / 2 } else { v / 2 };
    }
    let entry = at[&v];
    let cycle = &path[entry..];
    let t0 = *cycle.iter().min().unwrap();
    let start = cycle.iter().position(|&x| x == t0).unwrap();
    let mut rotated = cycle[start..].to_vec();
    rotated.extend_from_slice(&cycle[..start]);
    Reference {
        t0,
        cycle: rotated,
        to_repeat: path.len() as u64,
        to_cycle: entry as u64,
        to_t0: at[&t0] as u64,
    }
}

#[test]
fn detect_cycle_matches_reference() {
    let l = StepLimits::default();
    for k in (1..=51u64).step_by(2) {
        for n in 1..=10_000u64 {
            let r = reference(k, n);
            let out = detect_cycle(k as u128, &Value::from(n), &l).unwrap();
            assert_eq!(out.t0, Some(BigUint::from(r.t0)), "k={k} n={n}");
            let els: Vec<BigUint> = r.cycle.iter().map(|&x| BigUint::from(x)).collect();
            assert_eq!(out.cycle_elements, els, "k={k} n={n}");
            assert_eq!(
                (out.steps_to_repeat, out.steps_to_cycle, out.steps_to_t0),
                (r.to_repeat, r.to_cycle, r.to_t0),
                "k={k} n={n}"
            );
        }
    }
}

#[test]
fn scan_matches_reference() {
    let l = StepLimits::default();
    for k in [1u64, 5, 13, 29, 47, 101, 187] {
        let scan = scan_range(k as u128, 20_000, &l, 3).unwrap();
        for n in 1..=20_000u64 {
            let r = reference(k, n);
            assert_eq!(scan.t0_of(n), Some(&BigUint::from(r.t0)), "k={k} n={n}");
            let s = scan.steps(n).unwrap();
            assert_eq!(s.get(StepConvention::FirstRepeat), r.to_repeat);
            assert_eq!(s.get(StepConvention::CycleEntry), r.to_cycle);
            assert_eq!(s.get(StepConvention::ReachT0), r.to_t0);
        }
    }
}

#[test]
fn limits_do_not_change_results() {
    let tight = StepLimits::with_bits(5_000, 128).unwrap();
    let wide = StepLimits::default();
    for n in 1..=2_000u64 {
        let a = detect_cycle(29, &Value::from(n), &tight).unwrap();
        let b = detect_cycle(29, &Value::from(n), &wide).unwrap();
        assert_eq!(a, b);
    }
}
