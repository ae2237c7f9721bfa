//! Convergence statistics, bucketed distributions, random orb sequences and
//! the max-`t0` ratio study, with their CSV and manifest outputs.

use std::collections::BTreeMap;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::Path;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{beta_is_positive, cycle_t0, origin_k};
use crate::catalog::{build_catalog, catalog_from_scan, Classification};
use crate::engine::{extract_orbs, StepConvention, StepLimits};
use crate::error::{GcsError, Result};
use crate::orb::{format_counts, OrbSequence};
use crate::scan::{scan_range, RangeScan};

/// Max, argmax and averages of the path length over `n = 1..=n_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathStats {
    pub k: u128,
    pub n_max: u64,
    pub convention: StepConvention,
    pub max_steps: u64,
    /// Smallest `n` attaining `max_steps`.
    pub arg_max: u64,
    pub avg_steps: f64,
    /// Mean of `steps / ln n` over `n >= 2`.
    pub avg_sigma: f64,
    pub unresolved_count: u64,
}

impl PathStats {
    pub fn is_partial(&self) -> bool {
        self.unresolved_count > 0
    }
}

/// Statistics under one convention, from an existing scan.
pub fn stats_from_scan(scan: &RangeScan, convention: StepConvention) -> PathStats {
    let (mut max, mut arg, mut sum, mut count) = (0u64, 0u64, 0u128, 0u64);
    let (mut sigma_sum, mut sigma_count) = (0f64, 0u64);
    for n in 1..=scan.n_max {
        let Some(s) = scan.steps(n) else { continue };
        let v = s.get(convention);
        if v > max || count == 0 {
            max = v;
            arg = n;
        }
        sum += v as u128;
        count += 1;
        if n >= 2 {
            sigma_sum += v as f64 / (n as f64).ln();
            sigma_count += 1;
        }
    }
    PathStats {
        k: scan.k,
        n_max: scan.n_max,
        convention,
        max_steps: max,
        arg_max: arg,
        avg_steps: if count == 0 {
            0.0
        } else {
            sum as f64 / count as f64
        },
        avg_sigma: if sigma_count == 0 {
            0.0
        } else {
            sigma_sum / sigma_count as f64
        },
        unresolved_count: scan.unresolved_count(),
    }
}

pub fn convergence_stats(
    k: u128,
    n_max: u64,
    limits: &StepLimits,
    convention: StepConvention,
    jobs: usize,
) -> Result<PathStats> {
    if n_max == 0 {
        return Err(GcsError::Usage("n_max must be at least 1".into()));
    }
    Ok(stats_from_scan(
        &scan_range(k, n_max, limits, jobs)?,
        convention,
    ))
}

/// One scan, all three conventions.
pub fn convergence_stats_all(
    k: u128,
    n_max: u64,
    limits: &StepLimits,
    jobs: usize,
) -> Result<Vec<PathStats>> {
    if n_max == 0 {
        return Err(GcsError::Usage("n_max must be at least 1".into()));
    }
    let scan = scan_range(k, n_max, limits, jobs)?;
    Ok(StepConvention::ALL
        .iter()
        .map(|&c| stats_from_scan(&scan, c))
        .collect())
}

/// `(max_steps, arg_max, avg_steps)` reference row for matching a convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatsTarget {
    pub max_steps: u64,
    pub arg_max: u64,
    /// Compared after rounding to the nearest integer.
    pub avg_steps: u64,
}

impl StatsTarget {
    pub fn matches(&self, s: &PathStats) -> bool {
        s.max_steps == self.max_steps
            && s.arg_max == self.arg_max
            && s.avg_steps.round() as u64 == self.avg_steps
    }
}

/// Conventions whose statistics reproduce `target`.
pub fn matching_conventions(stats: &[PathStats], target: &StatsTarget) -> Vec<StepConvention> {
    stats
        .iter()
        .filter(|s| target.matches(s))
        .map(|s| s.convention)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grouping {
    /// One column per limit cycle `t0`.
    PerCycle,
    /// One column per classification of the limit cycle.
    PerOriginGroup,
}

impl std::str::FromStr for Grouping {
    type Err = GcsError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cycle" | "per_cycle" => Ok(Grouping::PerCycle),
            "origin" | "per_origin_group" => Ok(Grouping::PerOriginGroup),
            _ => Err(GcsError::Usage(format!("unknown grouping {s:?}"))),
        }
    }
}

/// Exact per-bucket counts of where seeds converge.
///
/// Bucket `i` covers `i·size + 1 ..= (i + 1)·size`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BucketDistribution {
    pub k: u128,
    pub bucket_size: u64,
    pub grouping: Grouping,
    /// Column labels: `t0` values, or classification names.
    pub labels: Vec<String>,
    /// `counts[bucket][column]`.
    pub counts: Vec<Vec<u64>>,
    pub unresolved: Vec<u64>,
}

impl BucketDistribution {
    pub fn bucket_start(&self, i: usize) -> u64 {
        i as u64 * self.bucket_size + 1
    }

    pub fn resolved(&self, i: usize) -> u64 {
        self.counts[i].iter().sum()
    }

    /// Percentages of resolved seeds in bucket `i`.
    pub fn percentages(&self, i: usize) -> Vec<f64> {
        let total = self.resolved(i);
        self.counts[i]
            .iter()
            .map(|&c| {
                if total == 0 {
                    0.0
                } else {
                    100.0 * c as f64 / total as f64
                }
            })
            .collect()
    }

    pub fn column(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

pub fn distribution_from_scan(
    scan: &RangeScan,
    bucket_size: u64,
    grouping: Grouping,
) -> Result<BucketDistribution> {
    if bucket_size == 0 || scan.n_max % bucket_size != 0 {
        return Err(GcsError::Usage(format!(
            "bucket size {bucket_size} must divide the scanned range {}",
            scan.n_max
        )));
    }
    let mut column_of = vec![usize::MAX; scan.cycles.len()];
    let labels: Vec<String> = match grouping {
        Grouping::PerCycle => {
            let order = scan.ids_by_t0();
            for (col, &id) in order.iter().enumerate() {
                column_of[id] = col;
            }
            order
                .iter()
                .map(|&id| scan.cycles[id].t0.to_string())
                .collect()
        }
        Grouping::PerOriginGroup => {
            let catalog = catalog_from_scan(scan)?;
            let groups: BTreeMap<Classification, usize> = catalog
                .records
                .iter()
                .map(|r| r.classification)
                .collect::<std::collections::BTreeSet<_>>()
                .into_iter()
                .enumerate()
                .map(|(i, c)| (c, i))
                .collect();
            for (id, c) in scan.cycles.iter().enumerate() {
                if let Some(rec) = catalog.get(&c.t0) {
                    column_of[id] = groups[&rec.classification];
                }
            }
            groups.keys().map(|c| c.to_string()).collect()
        }
    };
    let buckets = (scan.n_max / bucket_size) as usize;
    let mut counts = vec![vec![0u64; labels.len()]; buckets];
    let mut unresolved = vec![0u64; buckets];
    for n in 1..=scan.n_max {
        let b = ((n - 1) / bucket_size) as usize;
        match scan.cycle_of(n).map(|id| column_of[id]) {
            Some(col) if col != usize::MAX => counts[b][col] += 1,
            _ => unresolved[b] += 1,
        }
    }
    Ok(BucketDistribution {
        k: scan.k,
        bucket_size,
        grouping,
        labels,
        counts,
        unresolved,
    })
}

pub fn distribution_buckets(
    k: u128,
    bucket_size: u64,
    bucket_count: u64,
    grouping: Grouping,
    limits: &StepLimits,
    jobs: usize,
) -> Result<BucketDistribution> {
    let n_max = bucket_size
        .checked_mul(bucket_count)
        .filter(|&n| n > 0)
        .ok_or_else(|| GcsError::Usage("bucket size and count must be positive".into()))?;
    distribution_from_scan(&scan_range(k, n_max, limits, jobs)?, bucket_size, grouping)
}

/// A random orb sequence together with the number of rejected draws.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomOrbs {
    pub seed: u64,
    pub orbs: OrbSequence,
    /// Draws rejected because `β <= 0`.
    pub redraws: u32,
}

/// Orb count uniform in `orb_count`, every `u_i`, `d_i` uniform in `steps`,
/// redrawn until `β > 0`. Uses ChaCha8 seeded with `seed_from_u64`.
pub fn random_orbs(
    seed: u64,
    orb_count: RangeInclusive<u32>,
    steps: RangeInclusive<u32>,
) -> Result<RandomOrbs> {
    if orb_count.is_empty() || *orb_count.start() == 0 || steps.is_empty() || *steps.start() == 0 {
        return Err(GcsError::Usage(
            "orb count and step ranges must be non-empty and positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut redraws = 0u32;
    loop {
        let s = rng.gen_range(orb_count.clone()) as usize;
        let ups: Vec<u32> = (0..s).map(|_| rng.gen_range(steps.clone())).collect();
        let downs: Vec<u32> = (0..s).map(|_| rng.gen_range(steps.clone())).collect();
        let orbs = OrbSequence::new(ups, downs)?;
        if beta_is_positive(&orbs) {
            return Ok(RandomOrbs {
                seed,
                orbs,
                redraws,
            });
        }
        redraws += 1;
        if redraws == 1_000_000 {
            return Err(GcsError::Domain(
                "no draw with β > 0 after a million tries".into(),
            ));
        }
    }
}

/// A random orb sequence taken to the `k` where it originates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OriginRow {
    pub seed: u64,
    pub orbs: OrbSequence,
    pub redraws: u32,
    #[serde(with = "crate::io::big")]
    pub k: BigUint,
    #[serde(with = "crate::io::big")]
    pub t0: BigUint,
    /// Simulation from `t0` in `F_k` gives back the orbs.
    pub verified: bool,
}

/// Origin of one orb sequence, checked by `kα/β` and by simulation.
pub fn origin_row(
    seed: u64,
    orbs: OrbSequence,
    redraws: u32,
    limits: &StepLimits,
) -> Result<OriginRow> {
    let o = origin_k(&orbs)?;
    let solved =
        cycle_t0(&orbs, &o.k0).map_err(|e| GcsError::Domain(format!("origin k fails: {e}")))?;
    let verified = solved.t0 == o.t0
        && match o.k0.to_u128() {
            Some(k) => {
                let got = extract_orbs(k, &o.t0, limits);
                got.map(|g| g == orbs).unwrap_or(false)
            }
            None => false,
        };
    Ok(OriginRow {
        seed,
        orbs,
        redraws,
        k: o.k0,
        t0: o.t0,
        verified,
    })
}

/// `count` draws with seeds `seed, seed + 1, ...`.
pub fn random_origin_study(seed: u64, count: u64, limits: &StepLimits) -> Result<Vec<OriginRow>> {
    (0..count)
        .map(|i| {
            let s = seed.wrapping_add(i);
            let r = random_orbs(s, 5..=15, 1..=3)?;
            origin_row(s, r.orbs, r.redraws, limits)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub k: u128,
    pub seed_bound: u64,
    pub original_count: usize,
    #[serde(with = "crate::io::big_opt")]
    pub max_t0: Option<BigUint>,
    /// `max_t0 / k`.
    pub ratio: Option<f64>,
    pub partial: bool,
}

/// Original-cycle count and largest original `t0` relative to `k`.
pub fn max_t0_ratio_study(
    ks: &[u128],
    seed_bound: u64,
    limits: &StepLimits,
    jobs: usize,
) -> Result<Vec<RatioRow>> {
    ks.iter()
        .map(|&k| {
            let cat = build_catalog(k, seed_bound, limits, jobs)?;
            let max_t0 = cat.originals().map(|r| r.t0.clone()).max();
            let ratio = max_t0
                .as_ref()
                .map(|t| t.to_f64().unwrap_or(f64::INFINITY) / k as f64);
            Ok(RatioRow {
                k,
                seed_bound,
                original_count: cat.originals().count(),
                max_t0,
                ratio,
                partial: cat.is_partial(),
            })
        })
        .collect()
}

/// `k,max_steps,max_step_n,avg_steps,avg_sigma,convention,unresolved`.
pub fn write_stats_csv<W: Write>(rows: &[PathStats], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record([
        "k",
        "max_steps",
        "max_step_n",
        "avg_steps",
        "avg_sigma",
        "convention",
        "unresolved",
    ])?;
    for s in rows {
        wr.write_record([
            s.k.to_string(),
            s.max_steps.to_string(),
            s.arg_max.to_string(),
            format!("{:.2}", s.avg_steps),
            format!("{:.2}", s.avg_sigma),
            s.convention.name().to_string(),
            s.unresolved_count.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

/// `bucket_index,bucket_start,<label>...,unresolved`, percentages to two decimals.
pub fn write_distribution_csv<W: Write>(d: &BucketDistribution, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let mut header = vec!["bucket_index".to_string(), "bucket_start".to_string()];
    header.extend(d.labels.iter().cloned());
    header.push("unresolved".into());
    wr.write_record(&header)?;
    for i in 0..d.counts.len() {
        let mut row = vec![i.to_string(), d.bucket_start(i).to_string()];
        row.extend(d.percentages(i).iter().map(|p| format!("{p:.2}")));
        row.push(d.unresolved[i].to_string());
        wr.write_record(&row)?;
    }
    wr.flush()?;
    Ok(())
}

/// `seed,redraws,ups,downs,k,t0,verified`.
pub fn write_origin_csv<W: Write>(rows: &[OriginRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["seed", "redraws", "ups", "downs", "k", "t0", "verified"])?;
    for r in rows {
        wr.write_record([
            r.seed.to_string(),
            r.redraws.to_string(),
            format_counts(r.orbs.ups()),
            format_counts(r.orbs.downs()),
            r.k.to_string(),
            r.t0.to_string(),
            r.verified.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

/// `k,seed_bound,original_count,max_t0,ratio,partial`.
pub fn write_ratio_csv<W: Write>(rows: &[RatioRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record([
        "k",
        "seed_bound",
        "original_count",
        "max_t0",
        "ratio",
        "partial",
    ])?;
    for r in rows {
        wr.write_record([
            r.k.to_string(),
            r.seed_bound.to_string(),
            r.original_count.to_string(),
            r.max_t0.as_ref().map(|t| t.to_string()).unwrap_or_default(),
            r.ratio.map(|x| format!("{x:.4}")).unwrap_or_default(),
            r.partial.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

/// Description of one experiment run, written next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub inputs: serde_json::Value,
    pub max_steps: u64,
    /// `floor(log2)` of the magnitude cap.
    pub max_magnitude_bits: u64,
    pub seed: Option<u64>,
    pub build: String,
    pub outputs: Vec<String>,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub notes: serde_json::Value,
}

impl Manifest {
    pub fn new(command: &str, inputs: serde_json::Value, limits: &StepLimits) -> Self {
        Manifest {
            command: command.to_string(),
            inputs,
            max_steps: limits.max_steps,
            max_magnitude_bits: limits.max_magnitude.bits().saturating_sub(1),
            seed: None,
            build: build_description().to_string(),
            outputs: Vec::new(),
            notes: serde_json::Value::Null,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let f = std::fs::File::create(dir.join("manifest.json"))?;
        serde_json::to_writer_pretty(f, self)?;
        Ok(())
    }
}

/// `git describe` of the source tree this library was built from.
pub fn build_description() -> &'static str {
    env!("GCS_GIT_DESCRIBE")
}
