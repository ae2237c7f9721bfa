//! Orb signatures `{u_1, d_1, ..., u_s, d_s}`.
//!
//! An orb is one maximal run of odd-branch steps followed by one maximal run
//! of even-branch steps. A closed cycle is described by a non-empty
//! [`OrbSequence`]; the path from an arbitrary seed to a cycle is described by
//! an [`OrbTrace`], which may be empty.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{GcsError, Result};

/// Non-empty orb signature of a cycle. Every step count is at least one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawOrbs", into = "RawOrbs")]
pub struct OrbSequence {
    ups: Vec<u32>,
    downs: Vec<u32>,
}

/// Possibly empty orb word, used for paths leading into a cycle.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawOrbs", into = "RawOrbs")]
pub struct OrbTrace {
    ups: Vec<u32>,
    downs: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct RawOrbs {
    ups: Vec<u32>,
    downs: Vec<u32>,
}

fn validate(ups: &[u32], downs: &[u32]) -> Result<()> {
    if ups.len() != downs.len() {
        return Err(GcsError::Usage(format!(
            "ups and downs differ in length ({} vs {})",
            ups.len(),
            downs.len()
        )));
    }
    if ups.iter().chain(downs).any(|&c| c == 0) {
        return Err(GcsError::Usage("orb step counts must be positive".into()));
    }
    Ok(())
}

impl OrbSequence {
    pub fn new(ups: Vec<u32>, downs: Vec<u32>) -> Result<Self> {
        validate(&ups, &downs)?;
        if ups.is_empty() {
            return Err(GcsError::Usage(
                "an orb sequence needs at least one orb".into(),
            ));
        }
        Ok(Self { ups, downs })
    }

    pub fn from_pairs(pairs: &[(u32, u32)]) -> Result<Self> {
        Self::new(
            pairs.iter().map(|p| p.0).collect(),
            pairs.iter().map(|p| p.1).collect(),
        )
    }

    /// The single-orb signature `{1, 1}` of the `k -> 2k` cycle.
    pub fn trivial() -> Self {
        Self {
            ups: vec![1],
            downs: vec![1],
        }
    }

    pub fn ups(&self) -> &[u32] {
        &self.ups
    }

    pub fn downs(&self) -> &[u32] {
        &self.downs
    }

    /// Number of orbs `s`.
    pub fn len(&self) -> usize {
        self.ups.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.ups.iter().copied().zip(self.downs.iter().copied())
    }

    pub fn total_up(&self) -> u64 {
        self.ups.iter().map(|&u| u as u64).sum()
    }

    pub fn total_down(&self) -> u64 {
        self.downs.iter().map(|&d| d as u64).sum()
    }

    /// `U + D`, the number of map applications around the cycle.
    pub fn total_steps(&self) -> u64 {
        self.total_up() + self.total_down()
    }

    pub fn is_trivial(&self) -> bool {
        self.ups == [1] && self.downs == [1]
    }

    /// Moves the first orb to the back.
    pub fn rotated(&self) -> Self {
        self.rotated_by(1)
    }

    /// Rotation that starts at orb `shift` (0-based, taken modulo `s`).
    pub fn rotated_by(&self, shift: usize) -> Self {
        let s = self.len();
        let shift = shift % s;
        let mut ups = Vec::with_capacity(s);
        let mut downs = Vec::with_capacity(s);
        ups.extend_from_slice(&self.ups[shift..]);
        ups.extend_from_slice(&self.ups[..shift]);
        downs.extend_from_slice(&self.downs[shift..]);
        downs.extend_from_slice(&self.downs[..shift]);
        Self { ups, downs }
    }

    /// Smallest `p` such that the signature is the first `p` orbs repeated.
    pub fn primitive_period(&self) -> usize {
        let s = self.len();
        (1..=s)
            .filter(|p| s % p == 0)
            .find(|&p| {
                (p..s).all(|i| self.ups[i] == self.ups[i - p] && self.downs[i] == self.downs[i - p])
            })
            .unwrap_or(s)
    }

    pub fn is_primitive(&self) -> bool {
        self.primitive_period() == self.len()
    }

    /// Lexicographically smallest rotation of the interleaved `(u, d)` word.
    pub fn canonical_rotation(&self) -> Self {
        (0..self.len())
            .map(|i| self.rotated_by(i))
            .min_by(|a, b| a.pairs().cmp(b.pairs()))
            .expect("non-empty")
    }

    pub fn as_trace(&self) -> OrbTrace {
        OrbTrace {
            ups: self.ups.clone(),
            downs: self.downs.clone(),
        }
    }

    /// CSV cell form, e.g. `"3 1|2 2"`.
    pub fn to_cell(&self) -> String {
        cell(&self.ups, &self.downs)
    }

    pub fn parse_cell(s: &str) -> Result<Self> {
        let (ups, downs) = parse_cell_parts(s)?;
        Self::new(ups, downs)
    }

    pub(crate) fn parts(&self) -> (&[u32], &[u32]) {
        (&self.ups, &self.downs)
    }
}

impl OrbTrace {
    pub fn new(ups: Vec<u32>, downs: Vec<u32>) -> Result<Self> {
        validate(&ups, &downs)?;
        Ok(Self { ups, downs })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn ups(&self) -> &[u32] {
        &self.ups
    }

    pub fn downs(&self) -> &[u32] {
        &self.downs
    }

    pub fn len(&self) -> usize {
        self.ups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ups.is_empty()
    }

    pub fn push(&mut self, up: u32, down: u32) {
        assert!(up > 0 && down > 0, "orb step counts must be positive");
        self.ups.push(up);
        self.downs.push(down);
    }

    pub fn total_up(&self) -> u64 {
        self.ups.iter().map(|&u| u as u64).sum()
    }

    pub fn total_down(&self) -> u64 {
        self.downs.iter().map(|&d| d as u64).sum()
    }

    /// Converts to a cycle signature; fails when empty.
    pub fn into_sequence(self) -> Result<OrbSequence> {
        OrbSequence::new(self.ups, self.downs)
    }

    pub fn to_cell(&self) -> String {
        cell(&self.ups, &self.downs)
    }

    pub fn parse_cell(s: &str) -> Result<Self> {
        let (ups, downs) = parse_cell_parts(s)?;
        Self::new(ups, downs)
    }

    pub(crate) fn parts(&self) -> (&[u32], &[u32]) {
        (&self.ups, &self.downs)
    }
}

impl From<OrbSequence> for OrbTrace {
    fn from(o: OrbSequence) -> Self {
        OrbTrace {
            ups: o.ups,
            downs: o.downs,
        }
    }
}

impl TryFrom<RawOrbs> for OrbSequence {
    type Error = GcsError;
    fn try_from(r: RawOrbs) -> Result<Self> {
        OrbSequence::new(r.ups, r.downs)
    }
}

impl From<OrbSequence> for RawOrbs {
    fn from(o: OrbSequence) -> Self {
        RawOrbs {
            ups: o.ups,
            downs: o.downs,
        }
    }
}

impl TryFrom<RawOrbs> for OrbTrace {
    type Error = GcsError;
    fn try_from(r: RawOrbs) -> Result<Self> {
        OrbTrace::new(r.ups, r.downs)
    }
}

impl From<OrbTrace> for RawOrbs {
    fn from(o: OrbTrace) -> Self {
        RawOrbs {
            ups: o.ups,
            downs: o.downs,
        }
    }
}

fn join(v: &[u32]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn cell(ups: &[u32], downs: &[u32]) -> String {
    format!("{}|{}", join(ups), join(downs))
}

/// Space-separated counts, the inverse of [`parse_counts`].
pub fn format_counts(v: &[u32]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Parses a whitespace- or comma-separated list of positive counts.
pub fn parse_counts(s: &str) -> Result<Vec<u32>> {
    s.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<u32>()
                .map_err(|_| GcsError::Parse(format!("bad step count {t:?}")))
        })
        .collect()
}

fn parse_cell_parts(s: &str) -> Result<(Vec<u32>, Vec<u32>)> {
    let (u, d) = s
        .split_once('|')
        .ok_or_else(|| GcsError::Parse(format!("orb cell {s:?} lacks '|'")))?;
    Ok((parse_counts(u)?, parse_counts(d)?))
}

impl fmt::Display for OrbSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{{{}}} {{{}}}",
            join(&self.ups).replace(' ', ","),
            join(&self.downs).replace(' ', ",")
        )
    }
}

impl FromStr for OrbSequence {
    type Err = GcsError;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse_cell(s)
    }
}
