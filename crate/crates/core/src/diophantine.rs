//! `2^m − 3^n = k` from cycles: every cycle of `F_k` with `U` odd steps and
//! `D` halvings gives a candidate `M = 2^(U+D) − 3^U`, and `M = k` is a
//! solution with `m = U + D`, `n = U`.

use std::collections::HashSet;

use num_bigint::{BigInt, BigUint};
use serde::{Deserialize, Serialize};

use crate::algebra::{beta, cycle_t0, pow2, pow3};
use crate::engine::{detect_cycle, extract_orbs, orbs_from_elements, StepLimits, Value};
use crate::error::{check_k, GcsError, Result};
use crate::orb::OrbSequence;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiophantineSolution {
    pub m: u64,
    pub n: u64,
    pub k: u128,
    /// Seed whose cycle gave the solution.
    pub witness_seed: u64,
    #[serde(with = "crate::io::big")]
    pub witness_t0: BigUint,
    pub witness_orbs: OrbSequence,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum DiophantineOutcome {
    Found(DiophantineSolution),
    /// Seed budget spent; inconclusive.
    NotFound {
        k: u128,
        /// Distinct `M` values met, in seed order.
        #[serde(with = "crate::io::signed_vec")]
        observed_m: Vec<BigInt>,
        /// Odd seeds whose path hit a limit.
        unresolved_seeds: Vec<u64>,
    },
    /// Provably no solution.
    NoSolution {
        k: u128,
        reason: String,
    },
}

impl DiophantineOutcome {
    pub fn solution(&self) -> Option<&DiophantineSolution> {
        match self {
            DiophantineOutcome::Found(s) => Some(s),
            _ => None,
        }
    }
}

/// Tries odd seeds `r = 1, 3, 5, ... <= seed_budget` in order and returns the
/// first cycle with `M = k`. Each distinct cycle is evaluated once.
pub fn solve(k: u128, seed_budget: u64, limits: &StepLimits) -> Result<DiophantineOutcome> {
    check_k(k)?;
    if seed_budget == 0 {
        return Err(GcsError::Usage("seed budget must be positive".into()));
    }
    if k % 3 == 0 {
        return Ok(DiophantineOutcome::NoSolution {
            k,
            reason: "3 divides k, but 2^m − 3^n is never divisible by 3 for n >= 1".into(),
        });
    }
    let target = BigInt::from(k);
    let mut seen: HashSet<BigUint> = HashSet::new();
    let mut observed = Vec::new();
    let mut unresolved = Vec::new();
    for r in (1..=seed_budget).step_by(2) {
        let out = detect_cycle(k, &Value::from(r), limits)?;
        let Some(t0) = out.t0.clone().filter(|_| out.is_converged()) else {
            unresolved.push(r);
            continue;
        };
        if !seen.insert(t0.clone()) {
            continue;
        }
        let orbs = orbs_from_elements(&out.cycle_elements)?;
        let m_value = beta(orbs.total_up(), orbs.total_down());
        if m_value == target {
            let sol = DiophantineSolution {
                m: orbs.total_steps(),
                n: orbs.total_up(),
                k,
                witness_seed: r,
                witness_t0: t0,
                witness_orbs: orbs,
            };
            debug_assert!(verify(&sol, limits));
            return Ok(DiophantineOutcome::Found(sol));
        }
        observed.push(m_value);
    }
    Ok(DiophantineOutcome::NotFound {
        k,
        observed_m: observed,
        unresolved_seeds: unresolved,
    })
}

/// Exact check of `2^m − 3^n = k` and of the witness cycle.
pub fn verify(sol: &DiophantineSolution, limits: &StepLimits) -> bool {
    if !equation_holds(sol.m, sol.n, sol.k) {
        return false;
    }
    let o = &sol.witness_orbs;
    if o.total_up() != sol.n || o.total_steps() != sol.m {
        return false;
    }
    match cycle_t0(o, &BigUint::from(sol.k)) {
        Ok(c) if c.t0 == sol.witness_t0 => {}
        _ => return false,
    }
    extract_orbs(sol.k, &sol.witness_t0, limits).is_ok_and(|got| got == *o)
}

pub fn equation_holds(m: u64, n: u64, k: u128) -> bool {
    BigInt::from(pow2(m)) - BigInt::from(pow3(n)) == BigInt::from(k)
}

/// Every `(m, n)` with `1 <= m <= m_max`, `n >= 1` and `2^m − 3^n = k`.
pub fn grid_check(k: u128, m_max: u32) -> Result<Vec<(u64, u64)>> {
    if m_max > 128 {
        return Err(GcsError::Usage("grid check is limited to m <= 128".into()));
    }
    let k = BigUint::from(k);
    let mut out = Vec::new();
    for m in 1..=m_max as u64 {
        let p = pow2(m);
        if p <= k {
            continue;
        }
        let rest = p - &k;
        let mut n = 0u64;
        let mut q = BigUint::from(1u32);
        while q < rest {
            q *= 3u32;
            n += 1;
        }
        if q == rest && n >= 1 {
            out.push((m, n));
        }
    }
    Ok(out)
}
