//! Exact cycle algebra over orb signatures.
//!
//! For orbs `{u_i, d_i}` with `U = Σu_i`, `D = Σd_i`:
//!
//! ```text
//! α_i = 2^(Σ_{j<i} u_j + d_j) · (3^u_i − 2^u_i) · 3^(Σ_{j>i} u_j)
//! α   = Σ α_i
//! β   = 2^(U+D) − 3^U
//! ```
//!
//! Starting at an odd orb start `t0`, `s` orbs lead to `(3^U·t0 + kα) / 2^(U+D)`,
//! so a cycle of `F_k` with these orbs exists exactly when `t0 = kα/β` is a
//! positive integer. Everything here is arbitrary precision; no floating point.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Pow, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::dyadic::Dyadic;
use crate::error::{GcsError, Result};
use crate::orb::{OrbSequence, OrbTrace};

pub fn pow2(e: u64) -> BigUint {
    BigUint::one() << e
}

pub fn pow3(e: u64) -> BigUint {
    BigUint::from(3u32).pow(e)
}

/// `U`, `D`, `α`, `β` and the individual `α_i` of an orb signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbInvariants {
    pub big_u: u64,
    pub big_d: u64,
    pub alpha: BigUint,
    pub beta: BigInt,
    pub alpha_terms: Vec<BigUint>,
}

/// `β = 2^(U+D) − 3^U`, exact and possibly negative.
pub fn beta(big_u: u64, big_d: u64) -> BigInt {
    BigInt::from(pow2(big_u + big_d)) - BigInt::from(pow3(big_u))
}

fn alpha_terms_of(ups: &[u32], downs: &[u32]) -> Vec<BigUint> {
    let s = ups.len();
    // suffix[i] = Σ_{j>i} u_j
    let mut suffix = vec![0u64; s];
    for i in (0..s.saturating_sub(1)).rev() {
        suffix[i] = suffix[i + 1] + ups[i + 1] as u64;
    }
    let mut prefix = 0u64;
    let mut terms = Vec::with_capacity(s);
    for i in 0..s {
        let u = ups[i] as u64;
        let core = pow3(u) - pow2(u);
        terms.push((core * pow3(suffix[i])) << prefix);
        prefix += u + downs[i] as u64;
    }
    terms
}

fn alpha_of(ups: &[u32], downs: &[u32]) -> BigUint {
    alpha_terms_of(ups, downs).into_iter().sum()
}

/// `α_i` for a 1-based orb index.
pub fn compute_alpha_term(orbs: &OrbSequence, i: usize) -> Result<BigUint> {
    if i == 0 || i > orbs.len() {
        return Err(GcsError::Usage(format!(
            "orb index {i} outside 1..={}",
            orbs.len()
        )));
    }
    let (ups, downs) = orbs.parts();
    let prefix: u64 = ups[..i - 1]
        .iter()
        .zip(&downs[..i - 1])
        .map(|(&u, &d)| u as u64 + d as u64)
        .sum();
    let suffix: u64 = ups[i..].iter().map(|&u| u as u64).sum();
    let u = ups[i - 1] as u64;
    Ok(((pow3(u) - pow2(u)) * pow3(suffix)) << prefix)
}

pub fn compute_invariants(orbs: &OrbSequence) -> OrbInvariants {
    let (ups, downs) = orbs.parts();
    let alpha_terms = alpha_terms_of(ups, downs);
    let alpha = alpha_terms.iter().sum();
    let big_u = orbs.total_up();
    let big_d = orbs.total_down();
    OrbInvariants {
        big_u,
        big_d,
        alpha,
        beta: beta(big_u, big_d),
        alpha_terms,
    }
}

/// `α` alone.
pub fn alpha(orbs: &OrbSequence) -> BigUint {
    let (ups, downs) = orbs.parts();
    alpha_of(ups, downs)
}

/// Exact test of `2^(U+D) > 3^U`.
pub fn beta_is_positive(orbs: &OrbSequence) -> bool {
    pow2(orbs.total_steps()) > pow3(orbs.total_up())
}

/// Value after `u` odd-branch steps from `t0`: `(3^u·t0 + k(3^u − 2^u)) / 2^u`.
///
/// A non-integer result means `t0` does not actually take `u` consecutive odd
/// steps.
pub fn up_iterate_closed_form(t0: &BigUint, u: u32, k: &BigUint) -> Dyadic {
    let u = u as u64;
    let num = pow3(u) * t0 + k * (pow3(u) - pow2(u));
    Dyadic::new(BigInt::from(num), u)
}

fn closed_form(t0: &BigUint, ups: &[u32], downs: &[u32], k: &BigUint) -> Dyadic {
    let big_u: u64 = ups.iter().map(|&u| u as u64).sum();
    let big_d: u64 = downs.iter().map(|&d| d as u64).sum();
    let num = pow3(big_u) * t0 + k * alpha_of(ups, downs);
    Dyadic::new(BigInt::from(num), big_u + big_d)
}

/// `T_s = (3^U·t0 + kα) / 2^(U+D)` after all orbs of `orbs`.
pub fn path_closed_form(t0: &BigUint, orbs: &OrbSequence, k: &BigUint) -> Dyadic {
    let (ups, downs) = orbs.parts();
    closed_form(t0, ups, downs, k)
}

/// Same as [`path_closed_form`] for a possibly empty trace (empty: returns `n`).
pub fn trace_closed_form(n: &BigUint, trace: &OrbTrace, k: &BigUint) -> Dyadic {
    let (ups, downs) = trace.parts();
    closed_form(n, ups, downs, k)
}

/// A cycle of `F_k` solved from its orb signature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleSolution {
    #[serde(with = "crate::io::big")]
    pub k: BigUint,
    #[serde(with = "crate::io::big")]
    pub t0: BigUint,
    pub orbs: OrbSequence,
}

/// Why a signature yields no cycle in a given `F_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoCycle {
    BetaNonpositive,
    NonIntegral,
}

impl std::fmt::Display for NoCycle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NoCycle::BetaNonpositive => "beta-nonpositive",
            NoCycle::NonIntegral => "non-integral",
        })
    }
}

/// `t0 = kα/β` when `β > 0` and `β | kα`.
pub fn cycle_t0(orbs: &OrbSequence, k: &BigUint) -> std::result::Result<CycleSolution, NoCycle> {
    let inv = compute_invariants(orbs);
    let Some(beta) = inv.beta.to_biguint().filter(|b| !b.is_zero()) else {
        return Err(NoCycle::BetaNonpositive);
    };
    let (t0, rem) = (k * &inv.alpha).div_rem(&beta);
    if !rem.is_zero() {
        return Err(NoCycle::NonIntegral);
    }
    debug_assert!(t0.bit(0) || !k.bit(0));
    Ok(CycleSolution {
        k: k.clone(),
        t0,
        orbs: orbs.clone(),
    })
}

/// The unique `k0` where `orbs` first appears as a cycle, with its orb-start element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Origin {
    #[serde(with = "crate::io::big")]
    pub k0: BigUint,
    #[serde(with = "crate::io::big")]
    pub t0: BigUint,
}

/// `k0 = β / gcd(α, β)`, `t0 = α / gcd(α, β)`.
pub fn origin_k(orbs: &OrbSequence) -> Result<Origin> {
    let inv = compute_invariants(orbs);
    let beta = inv
        .beta
        .to_biguint()
        .filter(|b| !b.is_zero())
        .ok_or_else(|| {
            GcsError::Domain(format!(
                "beta = {} is not positive; no positive cycle has these orbs",
                inv.beta
            ))
        })?;
    let g = inv.alpha.gcd(&beta);
    Ok(Origin {
        k0: &beta / &g,
        t0: &inv.alpha / &g,
    })
}

/// `{u_2, d_2, ..., u_s, d_s, u_1, d_1}`.
pub fn rotate_orbs(orbs: &OrbSequence) -> OrbSequence {
    orbs.rotated()
}

/// Whether the orbs describe a cycle of the original `3n+1` map (`β > 0`, `β | α`).
pub fn collatz_cycle_condition(orbs: &OrbSequence) -> bool {
    let inv = compute_invariants(orbs);
    inv.beta.is_positive() && (BigInt::from(inv.alpha) % &inv.beta).is_zero()
}
