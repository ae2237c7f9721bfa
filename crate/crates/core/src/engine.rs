//! Exact iteration of `F_k(n) = (3n + k)/2` (n odd), `n/2` (n even).
//!
//! Values live in `u128` while they fit; any step that would overflow moves
//! the value to a `BigUint` and iteration continues from there. A value that
//! shrinks back under `2^128` is moved back, so equal values always compare
//! and hash equal.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{trace_closed_form, CycleSolution};
use crate::error::{check_k, GcsError, Result};
use crate::orb::{OrbSequence, OrbTrace};

/// Iteration budget for one path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepLimits {
    /// Largest allowed number of map applications up to the first repeat.
    pub max_steps: u64,
    /// Largest allowed value anywhere on the path.
    pub max_magnitude: BigUint,
}

pub const DEFAULT_MAX_STEPS: u64 = 10_000_000;
pub const DEFAULT_MAGNITUDE_BITS: u64 = 512;

impl Default for StepLimits {
    fn default() -> Self {
        Self {
            max_steps: DEFAULT_MAX_STEPS,
            max_magnitude: BigUint::one() << DEFAULT_MAGNITUDE_BITS,
        }
    }
}

impl StepLimits {
    pub fn new(max_steps: u64, max_magnitude: BigUint) -> Result<Self> {
        if max_steps == 0 || max_magnitude.is_zero() {
            return Err(GcsError::Usage(
                "step limits must be strictly positive".into(),
            ));
        }
        Ok(Self {
            max_steps,
            max_magnitude,
        })
    }

    /// `max_magnitude = 2^bits`.
    pub fn with_bits(max_steps: u64, bits: u64) -> Result<Self> {
        Self::new(max_steps, BigUint::one() << bits)
    }

    /// The magnitude cap as `u128`, or `None` if no `u128` can exceed it.
    pub(crate) fn small_cap(&self) -> Option<u128> {
        self.max_magnitude.to_u128()
    }

    pub(crate) fn exceeds(&self, v: &Value) -> bool {
        match v {
            Value::Small(x) => self.small_cap().is_some_and(|cap| *x > cap),
            Value::Big(b) => *b > self.max_magnitude,
        }
    }
}

/// A path value; `Big` only holds values above `u128::MAX`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Small(u128),
    Big(BigUint),
}

impl Value {
    pub fn from_big(b: BigUint) -> Self {
        match b.to_u128() {
            Some(x) => Value::Small(x),
            None => Value::Big(b),
        }
    }

    pub fn is_odd(&self) -> bool {
        match self {
            Value::Small(x) => x & 1 == 1,
            Value::Big(b) => b.bit(0),
        }
    }

    pub fn to_biguint(&self) -> BigUint {
        match self {
            Value::Small(x) => BigUint::from(*x),
            Value::Big(b) => b.clone(),
        }
    }
}

impl From<u128> for Value {
    fn from(x: u128) -> Self {
        Value::Small(x)
    }
}

impl From<u64> for Value {
    fn from(x: u64) -> Self {
        Value::Small(x as u128)
    }
}

impl From<&BigUint> for Value {
    fn from(b: &BigUint) -> Self {
        Value::from_big(b.clone())
    }
}

/// One application of `F_k` in `u128`; `None` on overflow.
#[inline]
pub fn step_u128(k: u128, n: u128) -> Option<u128> {
    if n & 1 == 0 {
        Some(n >> 1)
    } else {
        // (3n + k)/2 = n + (n + k)/2 with n, k odd; avoids forming 3n.
        let half = (n >> 1) + (k >> 1) + 1;
        n.checked_add(half)
    }
}

pub fn step_big(k: u128, n: &BigUint) -> BigUint {
    if n.bit(0) {
        (n * 3u32 + k) >> 1
    } else {
        n >> 1
    }
}

/// `F_k(n)` with transparent escalation past `u128`.
pub fn step(k: u128, n: &Value) -> Value {
    match n {
        Value::Small(x) => match step_u128(k, *x) {
            Some(y) => Value::Small(y),
            None => Value::Big(step_big(k, &BigUint::from(*x))),
        },
        Value::Big(b) => Value::from_big(step_big(k, b)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    Converged,
    StepBudgetExceeded,
    MagnitudeExceeded,
}

/// Result of iterating one seed to its first repeated value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathOutcome {
    pub kind: OutcomeKind,
    /// Minimal cycle element, when converged.
    #[serde(with = "crate::io::big_opt")]
    pub t0: Option<BigUint>,
    /// Steps from the seed to the first value that lies on the cycle.
    pub steps_to_cycle: u64,
    /// Steps from the seed to the first arrival at `t0`.
    pub steps_to_t0: u64,
    /// Steps from the seed until a value is generated for the second time.
    pub steps_to_repeat: u64,
    /// The cycle, starting at `t0`. Empty unless converged.
    #[serde(with = "crate::io::big_vec")]
    pub cycle_elements: Vec<BigUint>,
}

impl PathOutcome {
    pub fn is_converged(&self) -> bool {
        self.kind == OutcomeKind::Converged
    }

    pub fn steps(&self) -> ConvergenceSteps {
        ConvergenceSteps {
            to_repeat: self.steps_to_repeat,
            to_cycle: self.steps_to_cycle,
            to_t0: self.steps_to_t0,
        }
    }
}

/// Which step count is reported as "path length to convergence".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepConvention {
    /// Steps until a value repeats (default).
    #[default]
    FirstRepeat,
    /// Steps until the path first touches the cycle.
    CycleEntry,
    /// Steps until the path first reaches the minimal cycle element.
    ReachT0,
}

impl StepConvention {
    pub const ALL: [StepConvention; 3] = [
        StepConvention::FirstRepeat,
        StepConvention::CycleEntry,
        StepConvention::ReachT0,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StepConvention::FirstRepeat => "first_repeat",
            StepConvention::CycleEntry => "cycle_entry",
            StepConvention::ReachT0 => "reach_t0",
        }
    }
}

impl std::str::FromStr for StepConvention {
    type Err = GcsError;
    fn from_str(s: &str) -> Result<Self> {
        StepConvention::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| GcsError::Usage(format!("unknown step convention {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConvergenceSteps {
    pub to_repeat: u64,
    pub to_cycle: u64,
    pub to_t0: u64,
}

impl ConvergenceSteps {
    pub fn get(&self, c: StepConvention) -> u64 {
        match c {
            StepConvention::FirstRepeat => self.to_repeat,
            StepConvention::CycleEntry => self.to_cycle,
            StepConvention::ReachT0 => self.to_t0,
        }
    }
}

struct Walk {
    kind: OutcomeKind,
    path: Vec<Value>,
    /// Index in `path` of the first cycle element, when converged.
    entry: usize,
}

fn walk(k: u128, n: Value, limits: &StepLimits) -> Walk {
    let mut seen: HashMap<Value, usize> = HashMap::new();
    let mut path: Vec<Value> = Vec::new();
    let mut v = n;
    loop {
        if limits.exceeds(&v) {
            return Walk {
                kind: OutcomeKind::MagnitudeExceeded,
                path,
                entry: 0,
            };
        }
        if let Some(&j) = seen.get(&v) {
            return Walk {
                kind: OutcomeKind::Converged,
                path,
                entry: j,
            };
        }
        seen.insert(v.clone(), path.len());
        path.push(v.clone());
        if path.len() as u64 > limits.max_steps {
            return Walk {
                kind: OutcomeKind::StepBudgetExceeded,
                path,
                entry: 0,
            };
        }
        v = step(k, &v);
    }
}

/// Iterates `F_k` from `n` until a value repeats and reports the cycle.
pub fn detect_cycle(k: u128, n: &Value, limits: &StepLimits) -> Result<PathOutcome> {
    check_k(k)?;
    if matches!(n, Value::Small(0)) {
        return Err(GcsError::Usage("seed must be positive".into()));
    }
    let w = walk(k, n.clone(), limits);
    if w.kind != OutcomeKind::Converged {
        return Ok(PathOutcome {
            kind: w.kind,
            t0: None,
            steps_to_cycle: 0,
            steps_to_t0: 0,
            steps_to_repeat: 0,
            cycle_elements: Vec::new(),
        });
    }
    let cycle = &w.path[w.entry..];
    let (offset, _) = cycle
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.cmp(b.1))
        .expect("cycle is non-empty");
    let elements: Vec<BigUint> = cycle[offset..]
        .iter()
        .chain(&cycle[..offset])
        .map(Value::to_biguint)
        .collect();
    Ok(PathOutcome {
        kind: OutcomeKind::Converged,
        t0: Some(elements[0].clone()),
        steps_to_cycle: w.entry as u64,
        steps_to_t0: (w.entry + offset) as u64,
        steps_to_repeat: w.path.len() as u64,
        cycle_elements: elements,
    })
}

/// The path of `F_k(n)` up to and including the first repeated value.
pub fn trace_path(k: u128, n: &Value, limits: &StepLimits) -> Result<(Vec<BigUint>, OutcomeKind)> {
    check_k(k)?;
    let w = walk(k, n.clone(), limits);
    let mut out: Vec<BigUint> = w.path.iter().map(Value::to_biguint).collect();
    if w.kind == OutcomeKind::Converged {
        out.push(w.path[w.entry].to_biguint());
    }
    Ok((out, w.kind))
}

/// Orb signature of a cycle given as its elements starting at an orb start.
pub fn orbs_from_elements(elements: &[BigUint]) -> Result<OrbSequence> {
    let mut ups = Vec::new();
    let mut downs = Vec::new();
    let mut i = 0;
    while i < elements.len() {
        let start = i;
        while i < elements.len() && elements[i].bit(0) {
            i += 1;
        }
        let u = i - start;
        let start = i;
        while i < elements.len() && !elements[i].bit(0) {
            i += 1;
        }
        let d = i - start;
        if u == 0 || d == 0 {
            return Err(GcsError::Domain(
                "cycle listing does not start at an orb start".into(),
            ));
        }
        ups.push(u as u32);
        downs.push(d as u32);
    }
    OrbSequence::new(ups, downs)
}

/// Same as [`orbs_from_elements`] for `u128` cycle listings.
pub fn orbs_from_small_elements(elements: &[u128]) -> Result<OrbSequence> {
    let big: Vec<BigUint> = elements.iter().map(|&x| BigUint::from(x)).collect();
    orbs_from_elements(&big)
}

/// Orb signature `{u_i, d_i}` of the cycle of `F_k` that starts at `t0`.
///
/// `t0` must be odd, lie on a cycle, and be entered by a halving step (the
/// minimal element always is).
pub fn extract_orbs(k: u128, t0: &BigUint, limits: &StepLimits) -> Result<OrbSequence> {
    check_k(k)?;
    if !t0.bit(0) {
        return Err(GcsError::Domain(format!(
            "{t0} is even; cycles are read from an odd orb start"
        )));
    }
    let out = detect_cycle(k, &Value::from(t0), limits)?;
    if !out.is_converged() {
        return Err(GcsError::Domain(format!(
            "no cycle through {t0} within limits ({:?})",
            out.kind
        )));
    }
    if out.steps_to_cycle != 0 {
        return Err(GcsError::Domain(format!("{t0} is not on a cycle of F_{k}")));
    }
    let els = &out.cycle_elements;
    let pos = els
        .iter()
        .position(|e| e == t0)
        .expect("t0 is on its own cycle");
    let rotated: Vec<BigUint> = els[pos..].iter().chain(&els[..pos]).cloned().collect();
    if rotated.last().is_some_and(|p| p.bit(0)) {
        return Err(GcsError::Domain(format!(
            "{t0} is inside an odd run, not an orb start"
        )));
    }
    orbs_from_elements(&rotated)
}

/// Steps from `n` until a value repeats; the outcome kind if limits were hit.
pub fn path_length_to_convergence(
    k: u128,
    n: &Value,
    limits: &StepLimits,
) -> Result<std::result::Result<u64, OutcomeKind>> {
    let out = detect_cycle(k, n, limits)?;
    Ok(if out.is_converged() {
        Ok(out.steps_to_repeat)
    } else {
        Err(out.kind)
    })
}

/// Normalized path length `steps / ln(n)`.
pub fn sigma(n: u64, steps: u64) -> Result<f64> {
    if n < 2 {
        return Err(GcsError::Domain("sigma needs n >= 2 (ln 1 = 0)".into()));
    }
    Ok(steps as f64 / (n as f64).ln())
}

/// Orb word from odd `n` to its first arrival at `t0` as an orb start.
///
/// Returns the trace together with `t0`. The trace is empty when `n == t0`.
pub fn trace_orbs_to_cycle(
    k: u128,
    n: &BigUint,
    limits: &StepLimits,
) -> Result<(OrbTrace, BigUint)> {
    check_k(k)?;
    if !n.bit(0) {
        return Err(GcsError::Domain("orb traces start at an odd seed".into()));
    }
    let out = detect_cycle(k, &Value::from(n), limits)?;
    let t0 = out
        .t0
        .clone()
        .ok_or_else(|| GcsError::Domain(format!("F_{k}({n}) did not converge within limits")))?;
    let target = Value::from(&t0);
    let mut trace = OrbTrace::empty();
    let mut v = Value::from(n);
    let budget = out.steps_to_repeat + out.cycle_elements.len() as u64 + 1;
    let (mut up, mut down) = (0u32, 0u32);
    for _ in 0..budget {
        if v == target && up == 0 && down == 0 {
            return Ok((trace, t0));
        }
        if v.is_odd() {
            if down > 0 {
                trace.push(up, down);
                up = 0;
                down = 0;
                if v == target {
                    return Ok((trace, t0));
                }
            }
            up += 1;
        } else {
            down += 1;
        }
        v = step(k, &v);
    }
    if v == target && down > 0 {
        trace.push(up, down);
        return Ok((trace, t0));
    }
    Err(GcsError::Domain(
        "trace did not reach t0 at an orb boundary".into(),
    ))
}

/// True iff the orb trace carries `n` exactly onto `cycle.t0` in `F_k`.
pub fn convergence_certificate(
    k: u128,
    n: &BigUint,
    trace: &OrbTrace,
    cycle: &CycleSolution,
) -> bool {
    if cycle.k != BigUint::from(k) {
        return false;
    }
    trace_closed_form(n, trace, &cycle.k).to_biguint().as_ref() == Some(&cycle.t0)
}
