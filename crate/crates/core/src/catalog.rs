//! The cycle set of one `F_k`, classified by where each orb signature
//! originates.
//!
//! A cycle is identified by its minimal element `t0`; its orbs are read in the
//! rotation that starts at `t0`. A signature with `β > 0` first appears in
//! `F_{k0}` with `k0 = β / gcd(α, β)` and reappears, scaled, in every odd
//! multiple of `k0`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::algebra::{alpha, cycle_t0, origin_k, pow2, pow3};
use crate::engine::{detect_cycle, orbs_from_elements, step, StepLimits, Value};
use crate::error::{check_k, GcsError, Result};
use crate::orb::{format_counts, OrbSequence};
use crate::scan::{scan_range, RangeScan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Classification {
    /// The `k -> 2k` cycle.
    Trivial,
    /// The signature originates in this `k`.
    Original,
    /// Scaled copy of an original cycle of `F_k0`, `k0 | k`, `k0 < k`.
    InheritedFrom(u128),
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::Trivial => f.write_str("trivial"),
            Classification::Original => f.write_str("original"),
            Classification::InheritedFrom(k0) => write!(f, "inherited:{k0}"),
        }
    }
}

impl FromStr for Classification {
    type Err = GcsError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trivial" => Ok(Classification::Trivial),
            "original" => Ok(Classification::Original),
            _ => s
                .strip_prefix("inherited:")
                .and_then(|k| k.parse().ok())
                .map(Classification::InheritedFrom)
                .ok_or_else(|| GcsError::Parse(format!("unknown classification {s:?}"))),
        }
    }
}

impl TryFrom<String> for Classification {
    type Error = GcsError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Classification> for String {
    fn from(c: Classification) -> String {
        c.to_string()
    }
}

/// One verified cycle of `F_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub k: u128,
    #[serde(with = "crate::io::big")]
    pub t0: BigUint,
    #[serde(with = "crate::io::big_vec")]
    pub elements: Vec<BigUint>,
    pub orbs: OrbSequence,
    pub total_steps: u64,
    pub origin_k: u128,
    pub classification: Classification,
}

fn classify(k: u128, orbs: &OrbSequence, origin: u128) -> Classification {
    if orbs.is_trivial() {
        Classification::Trivial
    } else if origin == k {
        Classification::Original
    } else {
        Classification::InheritedFrom(origin)
    }
}

impl CycleRecord {
    /// Builds a record from a cycle listing that starts at its minimal element.
    ///
    /// Checks that the listing closes under `F_k` and that `kα/β` gives back `t0`.
    pub fn from_elements(k: u128, elements: Vec<BigUint>) -> Result<Self> {
        check_k(k)?;
        let t0 = elements
            .first()
            .cloned()
            .ok_or_else(|| GcsError::Domain("empty cycle".into()))?;
        if elements.iter().any(|e| *e < t0) {
            return Err(GcsError::Domain(
                "cycle listing must start at its minimum".into(),
            ));
        }
        for (i, e) in elements.iter().enumerate() {
            let next = &elements[(i + 1) % elements.len()];
            if step(k, &Value::from(e)).to_biguint() != *next {
                return Err(GcsError::Domain(format!(
                    "{e} -> {next} is not a step of F_{k}"
                )));
            }
        }
        let orbs = orbs_from_elements(&elements)?;
        let solved = cycle_t0(&orbs, &BigUint::from(k))
            .map_err(|why| GcsError::Domain(format!("cycle of F_{k} at {t0} fails kα/β: {why}")))?;
        if solved.t0 != t0 {
            return Err(GcsError::Domain(format!(
                "kα/β = {} but cycle minimum is {t0}",
                solved.t0
            )));
        }
        let origin = origin_k(&orbs)?.k0.to_u128().expect("origin k divides k");
        Ok(CycleRecord {
            k,
            total_steps: elements.len() as u64,
            classification: classify(k, &orbs, origin),
            t0,
            elements,
            orbs,
            origin_k: origin,
        })
    }

    /// Regenerates the elements from `t0` and the orbs (used when reading CSV).
    pub fn from_t0_and_orbs(k: u128, t0: BigUint, orbs: OrbSequence) -> Result<Self> {
        let mut elements = Vec::with_capacity(orbs.total_steps() as usize);
        let mut v = Value::from(&t0);
        for _ in 0..orbs.total_steps() {
            elements.push(v.to_biguint());
            v = step(k, &v);
        }
        if v.to_biguint() != t0 {
            return Err(GcsError::Domain(format!(
                "orbs do not close a cycle at {t0} in F_{k}"
            )));
        }
        let rec = Self::from_elements(k, elements)?;
        if rec.orbs != orbs {
            return Err(GcsError::Domain(format!(
                "orbs do not match the cycle at {t0}"
            )));
        }
        Ok(rec)
    }

    pub fn is_trivial(&self) -> bool {
        self.classification == Classification::Trivial
    }

    /// Re-simulates the cycle from `t0` and compares every element.
    pub fn verify(&self) -> bool {
        let mut v = Value::from(&self.t0);
        for e in &self.elements {
            if v.to_biguint() != *e {
                return false;
            }
            v = step(self.k, &v);
        }
        v.to_biguint() == self.t0
            && orbs_from_elements(&self.elements).ok().as_ref() == Some(&self.orbs)
    }
}

/// `k -> 2k -> k`, present in every `F_k`.
pub fn trivial_cycle(k: u128) -> Result<CycleRecord> {
    check_k(k)?;
    let k2 = k
        .checked_mul(2)
        .ok_or_else(|| GcsError::Usage("k too large".into()))?;
    CycleRecord::from_elements(k, vec![BigUint::from(k), BigUint::from(k2)])
}

/// The cycle `r·rec` in `F_{r·k}`; `r` must be odd so that `r·k` stays odd.
pub fn inherit_cycle(rec: &CycleRecord, r: u128) -> Result<CycleRecord> {
    if r == 0 || r % 2 == 0 {
        return Err(GcsError::Usage(format!(
            "multiplier {r} must be odd and positive"
        )));
    }
    let k = rec
        .k
        .checked_mul(r)
        .ok_or_else(|| GcsError::Usage("r·k exceeds 128 bits".into()))?;
    let elements = rec.elements.iter().map(|e| e * r).collect();
    let out = CycleRecord::from_elements(k, elements)?;
    debug_assert_eq!(out.orbs, rec.orbs);
    Ok(out)
}

/// Classified cycle set `ζ_k` as seen from seeds `1..=seed_bound`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleCatalog {
    pub k: u128,
    pub seed_bound: u64,
    /// Sorted by `t0`, trivial cycle included when reached.
    pub records: Vec<CycleRecord>,
    /// Seeds that hit a step or magnitude limit.
    pub unresolved: Vec<u64>,
}

/// Nontrivial cycle counts by origin.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClassCounts {
    pub original: usize,
    /// Inherited cycles per originating `k0`.
    pub inherited: BTreeMap<u128, usize>,
    /// Original plus inherited; the trivial cycle is not counted.
    pub total: usize,
}

impl CycleCatalog {
    pub fn originals(&self) -> impl Iterator<Item = &CycleRecord> {
        self.records
            .iter()
            .filter(|r| r.classification == Classification::Original)
    }

    pub fn nontrivial(&self) -> impl Iterator<Item = &CycleRecord> {
        self.records.iter().filter(|r| !r.is_trivial())
    }

    pub fn get(&self, t0: &BigUint) -> Option<&CycleRecord> {
        self.records
            .binary_search_by(|r| r.t0.cmp(t0))
            .ok()
            .map(|i| &self.records[i])
    }

    pub fn is_partial(&self) -> bool {
        !self.unresolved.is_empty()
    }

    pub fn counts(&self) -> ClassCounts {
        classify_counts(self)
    }
}

pub fn classify_counts(catalog: &CycleCatalog) -> ClassCounts {
    let mut c = ClassCounts::default();
    for r in catalog.nontrivial() {
        match r.classification {
            Classification::Original => c.original += 1,
            Classification::InheritedFrom(k0) => *c.inherited.entry(k0).or_default() += 1,
            Classification::Trivial => unreachable!(),
        }
        c.total += 1;
    }
    c
}

/// Classifies every cycle met by a completed range scan.
pub fn catalog_from_scan(scan: &RangeScan) -> Result<CycleCatalog> {
    let mut records = scan
        .cycles
        .iter()
        .filter(|c| !c.over_cap)
        .map(|c| CycleRecord::from_elements(scan.k, c.elements.clone()))
        .collect::<Result<Vec<_>>>()?;
    records.sort_by(|a, b| a.t0.cmp(&b.t0));
    Ok(CycleCatalog {
        k: scan.k,
        seed_bound: scan.n_max,
        records,
        unresolved: scan.unresolved(),
    })
}

/// Seeds `1..=seed_bound` of `F_k`, deduplicated by `t0` and classified.
pub fn build_catalog(
    k: u128,
    seed_bound: u64,
    limits: &StepLimits,
    jobs: usize,
) -> Result<CycleCatalog> {
    catalog_from_scan(&scan_range(k, seed_bound, limits, jobs)?)
}

/// Default seed bound: `max(10^6, 10·k)`.
pub fn default_seed_bound(k: u128) -> u64 {
    let tenk = k.saturating_mul(10).min(u32::MAX as u128) as u64;
    tenk.max(1_000_000)
}

/// Assignment of each `n` in `[start, end]` to the `t0` of its limit cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionMap {
    pub k: u128,
    pub start: u64,
    pub end: u64,
    /// Distinct limit cycles, ascending.
    pub t0s: Vec<BigUint>,
    /// Index into `t0s` for each `n`, `None` if unresolved.
    assignment: Vec<Option<u32>>,
}

impl PartitionMap {
    pub fn from_scan(scan: &RangeScan, start: u64, end: u64) -> Result<Self> {
        if start == 0 || start > end || end > scan.n_max {
            return Err(GcsError::Usage(format!(
                "range [{start}, {end}] not inside the scanned 1..={}",
                scan.n_max
            )));
        }
        let order = scan.ids_by_t0();
        let mut rank = vec![0u32; order.len()];
        let mut t0s = Vec::new();
        let mut used = vec![false; order.len()];
        for n in start..=end {
            if let Some(id) = scan.cycle_of(n) {
                used[id] = true;
            }
        }
        for &id in &order {
            if used[id] {
                rank[id] = t0s.len() as u32;
                t0s.push(scan.cycles[id].t0.clone());
            }
        }
        let assignment = (start..=end)
            .map(|n| scan.cycle_of(n).map(|id| rank[id]))
            .collect();
        Ok(PartitionMap {
            k: scan.k,
            start,
            end,
            t0s,
            assignment,
        })
    }

    pub fn t0_of(&self, n: u64) -> Option<&BigUint> {
        if n < self.start || n > self.end {
            return None;
        }
        self.assignment[(n - self.start) as usize].map(|i| &self.t0s[i as usize])
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, Option<&BigUint>)> + '_ {
        (self.start..=self.end).map(move |n| (n, self.t0_of(n)))
    }

    /// Equivalence classes keyed by `t0`.
    pub fn classes(&self) -> BTreeMap<BigUint, Vec<u64>> {
        let mut out: BTreeMap<BigUint, Vec<u64>> = BTreeMap::new();
        for (n, t0) in self.iter() {
            if let Some(t0) = t0 {
                out.entry(t0.clone()).or_default().push(n);
            }
        }
        out
    }

    pub fn unresolved(&self) -> Vec<u64> {
        self.iter()
            .filter(|(_, t)| t.is_none())
            .map(|(n, _)| n)
            .collect()
    }
}

/// `P_k` restricted to `[start, end]`.
pub fn partition_map(
    k: u128,
    start: u64,
    end: u64,
    limits: &StepLimits,
    jobs: usize,
) -> Result<PartitionMap> {
    let scan = scan_range(k, end, limits, jobs)?;
    PartitionMap::from_scan(&scan, start, end)
}

/// The cycle `1 -> 2^(r-1) -> ... -> 2 -> 1` of `F_{2^r - 3}`.
pub fn family_two_pow_minus_three(r: u32) -> Result<CycleRecord> {
    if !(3..=127).contains(&r) {
        return Err(GcsError::Usage(format!("r = {r} outside 3..=127")));
    }
    let k = (1u128 << r) - 3;
    let elements: Vec<BigUint> = std::iter::once(BigUint::one())
        .chain((1..r).rev().map(|e| BigUint::one() << e))
        .collect();
    let rec = CycleRecord::from_elements(k, elements)?;
    debug_assert_eq!(rec.orbs, OrbSequence::new(vec![1], vec![r - 1]).unwrap());
    Ok(rec)
}

/// The cycle through `n` of `F_k` with `k = n(4·2^r − 9)/5`: two odd steps
/// lead to `n·2^r`, then `r` halvings return to `n`.
pub fn family_second(n: u64, r: u32) -> Result<CycleRecord> {
    if n == 0 || !(2..=120).contains(&r) {
        return Err(GcsError::Usage(format!(
            "need n >= 1 and 2 <= r <= 120, got n={n}, r={r}"
        )));
    }
    let factor = (4u128 << r) - 9;
    let num = factor
        .checked_mul(n as u128)
        .ok_or_else(|| GcsError::Usage("k exceeds 128 bits".into()))?;
    if num % 5 != 0 {
        return Err(GcsError::Domain(format!(
            "5 does not divide {n}·(4·2^{r} − 9)"
        )));
    }
    let k = num / 5;
    if k % 2 == 0 {
        return Err(GcsError::Domain(format!("k = {k} is even")));
    }
    let nb = BigUint::from(n);
    let out = detect_cycle(k, &Value::from(n), &StepLimits::default())?;
    let shape_ok = out.steps_to_cycle == 0 && out.cycle_elements.len() == r as usize + 2 && {
        let a = step(k, &Value::from(n));
        let b = step(k, &a);
        nb.bit(0) && a.is_odd() && b.to_biguint() == &nb << r
    };
    if !shape_ok {
        return Err(GcsError::Domain(format!(
            "{n} does not start the expected cycle in F_{k}"
        )));
    }
    CycleRecord::from_elements(k, out.cycle_elements)
}

/// All compositions of `total` into `parts` positive parts.
pub fn compositions(total: u32, parts: u32) -> Vec<Vec<u32>> {
    fn rec(left: u32, parts: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for first in 1..=left - (parts - 1) {
            cur.push(first);
            rec(left - first, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if parts >= 1 && parts <= total {
        rec(total, parts, &mut Vec::new(), &mut out);
    }
    out
}

/// Largest `n` accepted by [`composition_cycles`]; the pair count is `C(2n−2, n−1)`.
pub const MAX_COMPOSITION_N: u32 = 12;

/// Cycles of `F_k`, `k = 2^(2n) − 3^n`, from every pair of compositions of
/// `U = D = n` into the same number of parts. For this `k`, `β = k` and each
/// orb start equals its `α`.
///
/// Rotations of one signature and repeated signatures are the same cycle and
/// are dropped. Each cycle is verified by simulation.
pub fn composition_cycles(n: u32) -> Result<Vec<CycleRecord>> {
    if !(1..=MAX_COMPOSITION_N).contains(&n) {
        return Err(GcsError::Usage(format!(
            "n = {n} outside 1..={MAX_COMPOSITION_N}"
        )));
    }
    let k = (pow2(2 * n as u64) - pow3(n as u64))
        .to_u128()
        .expect("fits for n <= 63");
    let kb = BigUint::from(k);
    let mut seen: HashSet<OrbSequence> = HashSet::new();
    let mut out = Vec::new();
    for s in 1..=n {
        let comps = compositions(n, s);
        for ups in &comps {
            for downs in &comps {
                let orbs = OrbSequence::new(ups.clone(), downs.clone())?;
                if !orbs.is_primitive() {
                    continue;
                }
                let canon = orbs.canonical_rotation();
                if !seen.insert(canon.clone()) {
                    continue;
                }
                let t0 = (0..canon.len())
                    .map(|i| alpha(&canon.rotated_by(i)))
                    .min()
                    .expect("non-empty");
                debug_assert_eq!(cycle_t0(&canon, &kb).map(|c| c.t0.bit(0)), Ok(true));
                let found = detect_cycle(k, &Value::from(&t0), &StepLimits::default())?;
                if found.t0.as_ref() != Some(&t0) || found.steps_to_cycle != 0 {
                    return Err(GcsError::Domain(format!(
                        "{canon} did not simulate back to {t0}"
                    )));
                }
                let rec = CycleRecord::from_elements(k, found.cycle_elements)?;
                if rec.orbs.canonical_rotation() != canon {
                    return Err(GcsError::Domain(format!(
                        "{canon} simulated to {}",
                        rec.orbs
                    )));
                }
                out.push(rec);
            }
        }
    }
    out.sort_by(|a, b| a.t0.cmp(&b.t0));
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    k: String,
    t0: String,
    classification: String,
    origin_k: String,
    total_steps: u64,
    ups: String,
    downs: String,
}

/// Writes `k,t0,classification,origin_k,total_steps,ups,downs`.
pub fn write_catalog_csv<W: Write>(records: &[CycleRecord], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in records {
        wr.serialize(CsvRow {
            k: r.k.to_string(),
            t0: r.t0.to_string(),
            classification: r.classification.to_string(),
            origin_k: r.origin_k.to_string(),
            total_steps: r.total_steps,
            ups: format_counts(r.orbs.ups()),
            downs: format_counts(r.orbs.downs()),
        })?;
    }
    wr.flush()?;
    Ok(())
}

/// Reads catalog CSV back; elements are regenerated and every column re-checked.
pub fn read_catalog_csv<R: Read>(r: R) -> Result<Vec<CycleRecord>> {
    let mut rd = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for row in rd.deserialize::<CsvRow>() {
        let row = row?;
        let bad = |what: &str| GcsError::Parse(format!("bad {what} in catalog row"));
        let k: u128 = row.k.parse().map_err(|_| bad("k"))?;
        let t0: BigUint = row.t0.parse().map_err(|_| bad("t0"))?;
        let orbs = OrbSequence::new(
            crate::orb::parse_counts(&row.ups)?,
            crate::orb::parse_counts(&row.downs)?,
        )?;
        let rec = CycleRecord::from_t0_and_orbs(k, t0, orbs)?;
        if rec.classification.to_string() != row.classification
            || rec.origin_k.to_string() != row.origin_k
            || rec.total_steps != row.total_steps
        {
            return Err(GcsError::Parse(format!(
                "row for t0={} disagrees with its orbs",
                rec.t0
            )));
        }
        out.push(rec);
    }
    Ok(out)
}
