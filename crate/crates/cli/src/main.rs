//! `gcs-lab`: every operation of the toolkit as a subcommand.
//!
//! Exit codes: 0 success, 1 no result for the input (for example orbs that
//! close no cycle), 2 usage error, 3 a step or magnitude limit was hit.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gcs_core::engine::StepLimits;
use gcs_core::experiments::Manifest;
use gcs_core::{GcsError, StepConvention};

use report::Format;

#[derive(Parser, Debug)]
#[command(
    name = "gcs-lab",
    version,
    about = "Cycles and convergence of F_k(n) = (3n+k)/2 | n/2"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Output format.
    #[arg(long, value_enum, default_value = "human", global = true)]
    pub format: Format,
    /// Iteration limits, e.g. `steps=10000000,mag=512`.
    #[arg(long, value_parser = parse_limits, default_value = "steps=10000000,mag=512", global = true)]
    pub limits: StepLimits,
    /// Worker threads for range scans; 0 uses every core.
    #[arg(long, env = "GCS_LAB_JOBS", default_value_t = 0, global = true)]
    pub jobs: usize,
    /// Write output and a manifest.json into this directory instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Path of F_k from n up to the first repeated value.
    Trace {
        #[arg(long, value_parser = parse_k)]
        k: u128,
        #[arg(long)]
        n: num_bigint::BigUint,
    },
    /// The cycle that n falls into.
    Cycle {
        #[arg(long, value_parser = parse_k)]
        k: u128,
        #[arg(long)]
        n: num_bigint::BigUint,
    },
    /// Orb signature of the cycle starting at t0.
    Orbs {
        #[arg(long, value_parser = parse_k)]
        k: u128,
        #[arg(long)]
        t0: num_bigint::BigUint,
    },
    /// t0 = kα/β for an orb signature.
    T0 {
        #[arg(long, value_parser = parse_k)]
        k: u128,
        /// Up-step counts, space or comma separated.
        #[arg(long)]
        ups: String,
        /// Down-step counts, space or comma separated.
        #[arg(long)]
        downs: String,
    },
    /// The k where an orb signature first forms a cycle.
    Origin {
        #[arg(long)]
        ups: String,
        #[arg(long)]
        downs: String,
    },
    /// All cycles reached from seeds 1..=seeds, classified.
    Catalog {
        #[arg(long, value_parser = parse_k)]
        k: u128,
        /// Defaults to max(10^6, 10k).
        #[arg(long)]
        seeds: Option<u64>,
    },
    /// Limit cycle of every n in [start, end].
    Partition {
        #[arg(long, value_parser = parse_k)]
        k: u128,
        #[arg(long, default_value_t = 1)]
        start: u64,
        #[arg(long)]
        end: u64,
    },
    /// Cycles from the two closed-form families.
    Families {
        #[command(subcommand)]
        family: Family,
    },
    /// Cycles of F_k, k = 4^n − 3^n, from composition pairs of n.
    #[command(alias = "compositions")]
    T10 {
        #[arg(long)]
        n: u32,
    },
    /// Solve 2^m − 3^n = k from cycles of F_k.
    Dioph {
        #[arg(long, value_parser = parse_k)]
        k: u128,
        #[arg(long, default_value_t = 100)]
        seed_budget: u64,
        /// Also list every solution with m <= 128 by direct search.
        #[arg(long)]
        grid_check: bool,
    },
    /// Max, argmax and average path length over n = 1..=n-max.
    Stats {
        #[arg(long = "k", value_parser = parse_k, required = true, num_args = 1..)]
        ks: Vec<u128>,
        #[arg(long, default_value_t = 1_000_000)]
        n_max: u64,
        /// first_repeat, cycle_entry, reach_t0 or all.
        #[arg(long, default_value = "first_repeat")]
        convention: String,
    },
    /// Per-bucket shares of the limit cycles.
    Dist {
        #[arg(long, value_parser = parse_k)]
        k: u128,
        #[arg(long)]
        bucket_size: u64,
        #[arg(long, default_value_t = 200)]
        buckets: u64,
        /// cycle or origin.
        #[arg(long, default_value = "cycle")]
        grouping: String,
    },
    /// Random orb sequences taken to their originating k.
    Randorbs {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        count: u64,
    },
    /// Original-cycle count and largest original t0 relative to k.
    Ratio {
        #[arg(long = "k", value_parser = parse_k, required = true, num_args = 1..)]
        ks: Vec<u128>,
        /// Defaults to max(10^6, 10k) per k.
        #[arg(long)]
        seeds: Option<u64>,
    },
}

#[derive(Subcommand, Debug)]
enum Family {
    /// 1 -> 2^(r-1) -> ... -> 1 in F_k, k = 2^r − 3.
    TwoPow {
        #[arg(long)]
        r: u32,
    },
    /// Cycle through n in F_k, k = n(4·2^r − 9)/5.
    Second {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        r: u32,
    },
}

fn parse_k(s: &str) -> Result<u128, String> {
    let k: u128 = s
        .trim()
        .parse()
        .map_err(|_| format!("{s:?} is not a positive integer"))?;
    if k % 2 == 0 {
        return Err(format!("k must be odd and positive, got {k}"));
    }
    Ok(k)
}

fn parse_limits(s: &str) -> Result<StepLimits, String> {
    let (mut steps, mut bits) = (
        gcs_core::engine::DEFAULT_MAX_STEPS,
        gcs_core::engine::DEFAULT_MAGNITUDE_BITS,
    );
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got {part:?}"))?;
        let value: u64 = value
            .trim()
            .parse()
            .map_err(|_| format!("bad number in {part:?}"))?;
        match key.trim() {
            "steps" => steps = value,
            "mag" => bits = value,
            other => return Err(format!("unknown limit {other:?}; use steps= and mag=")),
        }
    }
    StepLimits::with_bits(steps, bits).map_err(|e| e.to_string())
}

fn exit_code(e: &GcsError) -> u8 {
    match e {
        GcsError::Usage(_) | GcsError::Parse(_) => 2,
        GcsError::Domain(_) | GcsError::Io(_) => 1,
    }
}

fn run(cli: Cli) -> gcs_core::Result<bool> {
    let g = &cli.global;
    let (name, report, mut manifest) = commands::dispatch(cli.command, g)?;
    let written = report.emit(g.format, g.out.as_deref(), name)?;
    if let (Some(dir), Some(file)) = (g.out.as_deref(), written) {
        manifest.outputs.push(file);
        manifest.write(dir)?;
        eprintln!("wrote {}", dir.display());
    }
    Ok(report.partial)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("gcs-lab: some paths hit the step or magnitude limit; output is partial");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("gcs-lab: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

pub(crate) fn manifest(command: &str, inputs: serde_json::Value, g: &Global) -> Manifest {
    let mut m = Manifest::new(command, inputs, &g.limits);
    m.notes = serde_json::json!({ "jobs": g.jobs });
    m
}

pub(crate) fn conventions(s: &str) -> gcs_core::Result<Vec<StepConvention>> {
    if s == "all" {
        Ok(StepConvention::ALL.to_vec())
    } else {
        Ok(vec![s.parse()?])
    }
}
