use std::collections::{BTreeMap, BTreeSet, HashSet};

use gcs_core::algebra::{compute_invariants, cycle_t0};
use gcs_core::catalog::{
    build_catalog, composition_cycles, inherit_cycle, partition_map, read_catalog_csv,
    write_catalog_csv, Classification, CycleCatalog,
};
use gcs_core::engine::StepLimits;
use gcs_core::OrbSequence;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::Zero;

fn catalogs(ks: impl Iterator<Item = u128>, seeds: u64) -> BTreeMap<u128, CycleCatalog> {
    ks.map(|k| {
        (
            k,
            build_catalog(k, seeds, &StepLimits::default(), 0).unwrap(),
        )
    })
    .collect()
}

fn signatures(c: &CycleCatalog) -> BTreeSet<OrbSequence> {
    c.nontrivial()
        .map(|r| r.orbs.canonical_rotation())
        .collect()
}

fn is_prime(k: u128) -> bool {
    k >= 2 && (2..).take_while(|d| d * d <= k).all(|d| k % d != 0)
}

#[test]
fn inheritance_closure() {
    let base = catalogs((3..200u128).step_by(2), 2_000);
    for k in (9..200u128).step_by(2).filter(|&k| !is_prime(k)) {
        for f in (3..k).step_by(2).filter(|f| k % f == 0) {
            let r = k / f;
            let big = build_catalog(k, 2_000 * r as u64, &StepLimits::default(), 0).unwrap();
            for rec in base[&f].nontrivial() {
                let scaled = inherit_cycle(rec, r).unwrap();
                let found = big
                    .get(&scaled.t0)
                    .unwrap_or_else(|| panic!("k={k} misses {} from F_{f}", scaled.t0));
                assert_eq!(found.orbs, rec.orbs);
                assert_ne!(found.classification, Classification::Original);
            }
        }
    }
}

#[test]
fn coprime_catalogs_share_no_cycle() {
    let cats = catalogs((3..=100u128).step_by(2), 10_000);
    let sigs: BTreeMap<u128, BTreeSet<OrbSequence>> =
        cats.iter().map(|(&k, c)| (k, signatures(c))).collect();
    for (&a, sa) in &sigs {
        for (&b, sb) in sigs.range(a + 1..) {
            if a.gcd(&b) == 1 {
                assert!(sa.is_disjoint(sb), "F_{a} and F_{b} share a cycle");
            }
        }
    }
}

#[test]
fn three_powers_add_nothing() {
    for k in [1u128, 5, 7] {
        let small = build_catalog(k, 100_000, &StepLimits::default(), 0).unwrap();
        let big = build_catalog(3 * k, 300_000, &StepLimits::default(), 0).unwrap();
        assert_eq!(signatures(&small), signatures(&big), "k={k}");
    }
    assert_eq!(
        build_catalog(3, 10_000, &StepLimits::default(), 1)
            .unwrap()
            .counts()
            .total,
        0
    );
}

#[test]
fn multiples_of_k_reach_the_trivial_cycle() {
    for k in [5u128, 7, 11] {
        let p = partition_map(k, 1, 100_000, &StepLimits::default(), 0).unwrap();
        for (n, t0) in p.iter() {
            let trivial = t0 == Some(&BigUint::from(k));
            assert_eq!(trivial, n as u128 % k == 0, "k={k} n={n}");
        }
    }
}

#[test]
fn partition_is_total() {
    for k in [13u128, 35, 187] {
        let p = partition_map(k, 1, 50_000, &StepLimits::default(), 0).unwrap();
        assert!(p.unresolved().is_empty());
        let classes = p.classes();
        let total: usize = classes.values().map(Vec::len).sum();
        assert_eq!(total, 50_000);
        let mut seen = HashSet::new();
        assert!(classes.values().flatten().all(|n| seen.insert(*n)));
    }
}

#[test]
fn origin_divides_beta() {
    for (k, cat) in catalogs((1..200u128).step_by(2), 20_000) {
        for r in &cat.records {
            let beta = compute_invariants(&r.orbs).beta;
            assert!(
                (&beta % BigInt::from(r.origin_k)).is_zero(),
                "k={k} t0={}",
                r.t0
            );
            assert_eq!(k % r.origin_k, 0);
            if is_prime(k) && r.classification == Classification::Original {
                assert!((&beta % BigInt::from(k)).is_zero());
            }
            assert_eq!(cycle_t0(&r.orbs, &BigUint::from(k)).unwrap().t0, r.t0);
        }
    }
}

#[test]
fn composition_cycles_are_distinct() {
    for n in 1..=8 {
        let cycles = composition_cycles(n).unwrap();
        let t0s: HashSet<&BigUint> = cycles.iter().map(|r| &r.t0).collect();
        assert_eq!(t0s.len(), cycles.len(), "n={n}");
        let sigs: HashSet<OrbSequence> =
            cycles.iter().map(|r| r.orbs.canonical_rotation()).collect();
        assert_eq!(sigs.len(), cycles.len());
        for r in &cycles {
            assert_eq!(r.orbs.total_up(), n as u64);
            assert_eq!(r.orbs.total_down(), n as u64);
        }
    }
    // ([1,1],[1,1]) is the trivial cycle of F_7 traversed twice.
    let seven = composition_cycles(2).unwrap();
    assert!(seven.iter().all(|r| r.t0 != BigUint::from(7u32)));
}

#[test]
fn csv_and_json_round_trip() {
    for k in [5u128, 51, 145] {
        let c = build_catalog(k, 50_000, &StepLimits::default(), 0).unwrap();
        let mut buf = Vec::new();
        write_catalog_csv(&c.records, &mut buf).unwrap();
        assert_eq!(read_catalog_csv(&buf[..]).unwrap(), c.records);
        let back: CycleCatalog = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
