//! Memoized, data-parallel scan of every seed `1..=n_max` of one `F_k`.
//!
//! Seeds are processed in doubling blocks `[lo, 2lo)`. Inside a block each seed
//! is walked until it
//!
//! * drops below `lo`, where the final answer of every smaller seed is already
//!   recorded, or
//! * hits an element of a cycle registered by an earlier block, or
//! * repeats a value of its own walk, which discovers a cycle.
//!
//! Blocks are fixed by `n_max` alone and every recorded quantity is a function
//! of the seed's full path, so the result does not depend on the worker count.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::engine::{detect_cycle, step_u128, ConvergenceSteps, StepLimits, Value};
use crate::error::{check_k, GcsError, Result};

const UNRESOLVED: u32 = u32::MAX;

/// Per-seed record: cycle id plus steps to the cycle and to its `t0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Entry {
    cycle: u32,
    to_cycle: u32,
    to_t0: u32,
}

impl Entry {
    const UNRESOLVED: Entry = Entry {
        cycle: UNRESOLVED,
        to_cycle: 0,
        to_t0: 0,
    };
}

/// One distinct cycle met during a scan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScannedCycle {
    pub t0: BigUint,
    /// Elements starting at `t0`.
    pub elements: Vec<BigUint>,
    /// Some element exceeds the magnitude cap; seeds reaching it are unresolved.
    pub over_cap: bool,
}

impl ScannedCycle {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Outcome of [`scan_range`].
#[derive(Debug, Clone)]
pub struct RangeScan {
    pub k: u128,
    pub n_max: u64,
    pub limits: StepLimits,
    /// Cycles in discovery order; ids index this vector.
    pub cycles: Vec<ScannedCycle>,
    entries: Vec<Entry>,
}

impl RangeScan {
    fn entry(&self, n: u64) -> Option<&Entry> {
        if n == 0 || n > self.n_max {
            return None;
        }
        let e = &self.entries[(n - 1) as usize];
        (e.cycle != UNRESOLVED).then_some(e)
    }

    /// Id of the cycle `n` converges to; `None` when unresolved or out of range.
    pub fn cycle_of(&self, n: u64) -> Option<usize> {
        self.entry(n).map(|e| e.cycle as usize)
    }

    pub fn t0_of(&self, n: u64) -> Option<&BigUint> {
        self.cycle_of(n).map(|id| &self.cycles[id].t0)
    }

    /// All three step counts for seed `n`.
    pub fn steps(&self, n: u64) -> Option<ConvergenceSteps> {
        self.entry(n).map(|e| ConvergenceSteps {
            to_repeat: e.to_cycle as u64 + self.cycles[e.cycle as usize].len() as u64,
            to_cycle: e.to_cycle as u64,
            to_t0: e.to_t0 as u64,
        })
    }

    pub fn unresolved(&self) -> Vec<u64> {
        (1..=self.n_max)
            .filter(|&n| self.entry(n).is_none())
            .collect()
    }

    pub fn unresolved_count(&self) -> u64 {
        self.entries
            .iter()
            .filter(|e| e.cycle == UNRESOLVED)
            .count() as u64
    }

    /// Cycle ids ordered by `t0`.
    pub fn ids_by_t0(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = (0..self.cycles.len()).collect();
        ids.sort_by(|&a, &b| self.cycles[a].t0.cmp(&self.cycles[b].t0));
        ids
    }
}

enum SeedResult {
    Known {
        cycle: u32,
        to_cycle: u64,
        to_t0: u64,
    },
    Fresh {
        elements: Vec<u128>,
        to_cycle: u64,
        to_t0: u64,
    },
    Unresolved,
    /// Left `u128`; answered by the general engine from scratch.
    Wide {
        t0: BigUint,
        elements: Vec<BigUint>,
        to_cycle: u64,
        to_t0: u64,
    },
}

struct Shared<'a> {
    k: u128,
    lo: u64,
    entries: &'a [Entry],
    cycles: &'a [ScannedCycle],
    members: &'a FxHashMap<u128, (u32, u32)>,
    limits: &'a StepLimits,
    cap: Option<u128>,
}

#[derive(Default)]
struct Scratch {
    seen: FxHashMap<u128, u32>,
    walk: Vec<u128>,
}

impl Shared<'_> {
    fn finish(&self, cycle: u32, to_cycle: u64, to_t0: u64) -> SeedResult {
        let c = &self.cycles[cycle as usize];
        if c.over_cap || to_cycle + c.len() as u64 > self.limits.max_steps {
            return SeedResult::Unresolved;
        }
        SeedResult::Known {
            cycle,
            to_cycle,
            to_t0,
        }
    }

    fn resolve(&self, n: u64, scratch: &mut Scratch) -> SeedResult {
        scratch.seen.clear();
        scratch.walk.clear();
        let mut v = n as u128;
        let mut steps: u64 = 0;
        loop {
            if v < self.lo as u128 {
                let e = self.entries[(v - 1) as usize];
                if e.cycle == UNRESOLVED {
                    return SeedResult::Unresolved;
                }
                return self.finish(e.cycle, steps + e.to_cycle as u64, steps + e.to_t0 as u64);
            }
            if let Some(&(id, pos)) = self.members.get(&v) {
                let len = self.cycles[id as usize].len() as u64;
                let to_t0 = steps + (len - pos as u64) % len;
                return self.finish(id, steps, to_t0);
            }
            if let Some(&j) = scratch.seen.get(&v) {
                let cycle = &scratch.walk[j as usize..];
                let (off, _) = cycle
                    .iter()
                    .enumerate()
                    .min_by_key(|p| *p.1)
                    .expect("non-empty");
                let elements: Vec<u128> =
                    cycle[off..].iter().chain(&cycle[..off]).copied().collect();
                let to_cycle = j as u64;
                if to_cycle + elements.len() as u64 > self.limits.max_steps {
                    return SeedResult::Unresolved;
                }
                return SeedResult::Fresh {
                    elements,
                    to_cycle,
                    to_t0: to_cycle + off as u64,
                };
            }
            if self.cap.is_some_and(|c| v > c) {
                return SeedResult::Unresolved;
            }
            if steps >= self.limits.max_steps {
                return SeedResult::Unresolved;
            }
            scratch.seen.insert(v, steps as u32);
            scratch.walk.push(v);
            v = match step_u128(self.k, v) {
                Some(next) => next,
                None => return self.wide(n),
            };
            steps += 1;
        }
    }

    fn wide(&self, n: u64) -> SeedResult {
        match detect_cycle(self.k, &Value::from(n), self.limits) {
            Ok(out) if out.is_converged() => SeedResult::Wide {
                t0: out.t0.expect("converged"),
                elements: out.cycle_elements,
                to_cycle: out.steps_to_cycle,
                to_t0: out.steps_to_t0,
            },
            _ => SeedResult::Unresolved,
        }
    }
}

/// Scans seeds `1..=n_max` of `F_k` on `jobs` worker threads (`0` = rayon default).
pub fn scan_range(k: u128, n_max: u64, limits: &StepLimits, jobs: usize) -> Result<RangeScan> {
    check_k(k)?;
    if n_max == 0 {
        return Err(GcsError::Usage("seed bound must be at least 1".into()));
    }
    if n_max > u32::MAX as u64 {
        return Err(GcsError::Usage(
            "seed bound above 2^32 is not supported".into(),
        ));
    }
    if limits.max_steps >= UNRESOLVED as u64 {
        return Err(GcsError::Usage(
            "scans need max_steps below 2^32 - 1".into(),
        ));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| GcsError::Usage(format!("cannot start {jobs} workers: {e}")))?;

    let cap = limits.max_magnitude.to_u128();
    let mut entries: Vec<Entry> = Vec::with_capacity(n_max as usize);
    let mut cycles: Vec<ScannedCycle> = Vec::new();
    let mut members: FxHashMap<u128, (u32, u32)> = FxHashMap::default();
    let mut by_t0: FxHashMap<BigUint, u32> = FxHashMap::default();

    let mut lo: u64 = 1;
    while lo <= n_max {
        let hi = (lo.saturating_mul(2)).min(n_max + 1);
        let results: Vec<SeedResult> = {
            let shared = Shared {
                k,
                lo,
                entries: &entries,
                cycles: &cycles,
                members: &members,
                limits,
                cap,
            };
            if jobs == 1 || hi - lo < 256 {
                let mut scratch = Scratch::default();
                (lo..hi).map(|n| shared.resolve(n, &mut scratch)).collect()
            } else {
                pool.install(|| {
                    (lo as usize..hi as usize)
                        .into_par_iter()
                        .with_min_len(512)
                        .map_init(Scratch::default, |s, n| shared.resolve(n as u64, s))
                        .collect()
                })
            }
        };

        // Register new cycles in t0 order so ids do not depend on scheduling.
        let mut fresh: Vec<(BigUint, Vec<BigUint>)> = Vec::new();
        for r in &results {
            match r {
                SeedResult::Fresh { elements, .. } => {
                    let t0 = BigUint::from(elements[0]);
                    if !by_t0.contains_key(&t0) {
                        fresh.push((t0, elements.iter().map(|&x| BigUint::from(x)).collect()));
                    }
                }
                SeedResult::Wide { t0, elements, .. } if !by_t0.contains_key(t0) => {
                    fresh.push((t0.clone(), elements.clone()));
                }
                _ => {}
            }
        }
        fresh.sort_by(|a, b| a.0.cmp(&b.0));
        fresh.dedup_by(|a, b| a.0 == b.0);
        for (t0, elements) in fresh {
            let id = cycles.len() as u32;
            let over_cap = elements.iter().any(|e| *e > limits.max_magnitude);
            for (pos, e) in elements.iter().enumerate() {
                if let Some(x) = e.to_u128() {
                    members.insert(x, (id, pos as u32));
                }
            }
            by_t0.insert(t0.clone(), id);
            cycles.push(ScannedCycle {
                t0,
                elements,
                over_cap,
            });
        }

        for r in results {
            let entry = match r {
                SeedResult::Known {
                    cycle,
                    to_cycle,
                    to_t0,
                } => Entry {
                    cycle,
                    to_cycle: to_cycle as u32,
                    to_t0: to_t0 as u32,
                },
                SeedResult::Fresh {
                    elements,
                    to_cycle,
                    to_t0,
                } => {
                    let id = by_t0[&BigUint::from(elements[0])];
                    if cycles[id as usize].over_cap {
                        Entry::UNRESOLVED
                    } else {
                        Entry {
                            cycle: id,
                            to_cycle: to_cycle as u32,
                            to_t0: to_t0 as u32,
                        }
                    }
                }
                SeedResult::Wide {
                    t0,
                    to_cycle,
                    to_t0,
                    ..
                } => Entry {
                    cycle: by_t0[&t0],
                    to_cycle: to_cycle as u32,
                    to_t0: to_t0 as u32,
                },
                SeedResult::Unresolved => Entry::UNRESOLVED,
            };
            entries.push(entry);
        }
        lo = hi;
    }

    Ok(RangeScan {
        k,
        n_max,
        limits: limits.clone(),
        cycles,
        entries,
    })
}
