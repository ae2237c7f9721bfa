use std::collections::BTreeMap;

use gcs_core::algebra::{cycle_t0, origin_k};
use gcs_core::catalog::{
    build_catalog, composition_cycles, default_seed_bound, family_second,
    family_two_pow_minus_three, partition_map, write_catalog_csv, CycleCatalog, CycleRecord,
};
use gcs_core::diophantine::{grid_check, solve, DiophantineOutcome};
use gcs_core::engine::{detect_cycle, extract_orbs, trace_path, OutcomeKind, Value};
use gcs_core::experiments::{
    distribution_buckets, max_t0_ratio_study, random_origin_study, stats_from_scan,
    write_distribution_csv, write_origin_csv, write_ratio_csv, write_stats_csv, Grouping, Manifest,
    PathStats,
};
use gcs_core::orb::{format_counts, parse_counts};
use gcs_core::scan::scan_range;
use gcs_core::{GcsError, OrbSequence, Result};
use num_bigint::BigUint;
use serde::Serialize;
use serde_json::json;

use crate::report::{row, Report};
use crate::{conventions, manifest, Command, Family, Global};

fn csv_rows(write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<Vec<String>>> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    let mut rd = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(&buf[..]);
    rd.records()
        .map(|r| Ok(r?.iter().map(str::to_string).collect()))
        .collect()
}

fn orbs_from_flags(ups: &str, downs: &str) -> Result<OrbSequence> {
    OrbSequence::new(parse_counts(ups)?, parse_counts(downs)?)
}

fn positive(n: &BigUint) -> Result<Value> {
    if n.bits() == 0 {
        return Err(GcsError::Usage("n must be a positive integer".into()));
    }
    Ok(Value::from(n))
}

fn join_big(v: &[BigUint]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn kind_name(kind: OutcomeKind) -> &'static str {
    match kind {
        OutcomeKind::Converged => "converged",
        OutcomeKind::StepBudgetExceeded => "step_budget_exceeded",
        OutcomeKind::MagnitudeExceeded => "magnitude_exceeded",
    }
}

pub fn dispatch(cmd: Command, g: &Global) -> Result<(&'static str, Report, Manifest)> {
    match cmd {
        Command::Trace { k, n } => {
            let (path, kind) = trace_path(k, &positive(&n)?, &g.limits)?;
            #[derive(Serialize)]
            struct Out<'a> {
                k: u128,
                #[serde(with = "gcs_core::io::big")]
                n: &'a BigUint,
                status: &'static str,
                steps: usize,
                #[serde(with = "gcs_core::io::big_vec")]
                path: &'a [BigUint],
            }
            let out = Out {
                k,
                n: &n,
                status: kind_name(kind),
                steps: path.len().saturating_sub(1),
                path: &path,
            };
            let mut csv = vec![row(["step", "value"])];
            csv.extend(
                path.iter()
                    .enumerate()
                    .map(|(i, v)| row([i.to_string(), v.to_string()])),
            );
            let human = format!(
                "{} ({} steps, {})",
                join_big(&path),
                path.len().saturating_sub(1),
                kind_name(kind)
            );
            let report = Report::new(&out, csv, human)?.partial(kind != OutcomeKind::Converged);
            Ok((
                "trace",
                report,
                manifest("trace", json!({"k": k.to_string(), "n": n.to_string()}), g),
            ))
        }
        Command::Cycle { k, n } => {
            let out = detect_cycle(k, &positive(&n)?, &g.limits)?;
            #[derive(Serialize)]
            struct Out<'a> {
                k: u128,
                #[serde(with = "gcs_core::io::big")]
                n: &'a BigUint,
                status: &'static str,
                #[serde(with = "gcs_core::io::big_opt")]
                t0: Option<BigUint>,
                #[serde(with = "gcs_core::io::big_vec")]
                elements: &'a [BigUint],
                steps_to_repeat: u64,
                steps_to_cycle: u64,
                steps_to_t0: u64,
            }
            let o = Out {
                k,
                n: &n,
                status: kind_name(out.kind),
                t0: out.t0.clone(),
                elements: &out.cycle_elements,
                steps_to_repeat: out.steps_to_repeat,
                steps_to_cycle: out.steps_to_cycle,
                steps_to_t0: out.steps_to_t0,
            };
            let t0 = out.t0.as_ref().map(|t| t.to_string()).unwrap_or_default();
            let csv = vec![
                row([
                    "k",
                    "n",
                    "status",
                    "t0",
                    "elements",
                    "steps_to_repeat",
                    "steps_to_cycle",
                    "steps_to_t0",
                ]),
                row([
                    k.to_string(),
                    n.to_string(),
                    kind_name(out.kind).to_string(),
                    t0.clone(),
                    join_big(&out.cycle_elements),
                    out.steps_to_repeat.to_string(),
                    out.steps_to_cycle.to_string(),
                    out.steps_to_t0.to_string(),
                ]),
            ];
            let human = if out.is_converged() {
                format!(
                    "t0 {t0}: {}\nsteps to repeat {}, to cycle {}, to t0 {}",
                    join_big(&out.cycle_elements),
                    out.steps_to_repeat,
                    out.steps_to_cycle,
                    out.steps_to_t0
                )
            } else {
                format!(
                    "{} after {} steps",
                    kind_name(out.kind),
                    out.steps_to_repeat
                )
            };
            let report = Report::new(&o, csv, human)?.partial(!out.is_converged());
            Ok((
                "cycle",
                report,
                manifest("cycle", json!({"k": k.to_string(), "n": n.to_string()}), g),
            ))
        }
        Command::Orbs { k, t0 } => {
            let orbs = extract_orbs(k, &t0, &g.limits)?;
            let sol =
                cycle_t0(&orbs, &BigUint::from(k)).map_err(|e| GcsError::Domain(e.to_string()))?;
            let csv = vec![
                row(["k", "t0", "ups", "downs"]),
                row([
                    k.to_string(),
                    t0.to_string(),
                    format_counts(orbs.ups()),
                    format_counts(orbs.downs()),
                ]),
            ];
            let human = format!("{orbs}");
            let report = Report::new(&sol, csv, human)?;
            Ok((
                "orbs",
                report,
                manifest("orbs", json!({"k": k.to_string(), "t0": t0.to_string()}), g),
            ))
        }
        Command::T0 { k, ups, downs } => {
            let orbs = orbs_from_flags(&ups, &downs)?;
            let sol = cycle_t0(&orbs, &BigUint::from(k))
                .map_err(|why| GcsError::Domain(format!("no cycle of F_{k} for {orbs}: {why}")))?;
            let csv = vec![
                row(["k", "t0", "ups", "downs"]),
                row([
                    k.to_string(),
                    sol.t0.to_string(),
                    format_counts(orbs.ups()),
                    format_counts(orbs.downs()),
                ]),
            ];
            let human = sol.t0.to_string();
            let report = Report::new(&sol, csv, human)?;
            Ok((
                "t0",
                report,
                manifest(
                    "t0",
                    json!({"k": k.to_string(), "ups": ups, "downs": downs}),
                    g,
                ),
            ))
        }
        Command::Origin { ups, downs } => {
            let orbs = orbs_from_flags(&ups, &downs)?;
            let o = origin_k(&orbs)?;
            #[derive(Serialize)]
            struct Out<'a> {
                #[serde(with = "gcs_core::io::big")]
                k: &'a BigUint,
                #[serde(with = "gcs_core::io::big")]
                t0: &'a BigUint,
                orbs: &'a OrbSequence,
            }
            let csv = vec![
                row(["k", "t0", "ups", "downs"]),
                row([
                    o.k0.to_string(),
                    o.t0.to_string(),
                    format_counts(orbs.ups()),
                    format_counts(orbs.downs()),
                ]),
            ];
            let human = format!("k {} t0 {}", o.k0, o.t0);
            let report = Report::new(
                &Out {
                    k: &o.k0,
                    t0: &o.t0,
                    orbs: &orbs,
                },
                csv,
                human,
            )?;
            Ok((
                "origin",
                report,
                manifest("origin", json!({"ups": ups, "downs": downs}), g),
            ))
        }
        Command::Catalog { k, seeds } => {
            let seeds = seeds.unwrap_or_else(|| default_seed_bound(k));
            let cat = build_catalog(k, seeds, &g.limits, g.jobs)?;
            let report = catalog_report(&cat)?;
            Ok((
                "catalog",
                report,
                manifest("catalog", json!({"k": k.to_string(), "seeds": seeds}), g),
            ))
        }
        Command::Partition { k, start, end } => {
            let p = partition_map(k, start, end, &g.limits, g.jobs)?;
            #[derive(Serialize)]
            struct Out {
                k: u128,
                start: u64,
                end: u64,
                /// Limit-cycle t0 per n, in order; null when unresolved.
                #[serde(with = "gcs_core::io::big_opt_vec")]
                t0: Vec<Option<BigUint>>,
            }
            let t0: Vec<Option<BigUint>> = p.iter().map(|(_, t)| t.cloned()).collect();
            let mut csv = vec![row(["n", "t0"])];
            csv.extend(
                p.iter().map(|(n, t)| {
                    row([n.to_string(), t.map(|t| t.to_string()).unwrap_or_default()])
                }),
            );
            let mut human = String::new();
            for (t0, ns) in p.classes() {
                let shown: Vec<String> = ns.iter().take(12).map(|n| n.to_string()).collect();
                let more = if ns.len() > 12 {
                    format!(" ... ({} total)", ns.len())
                } else {
                    String::new()
                };
                human.push_str(&format!("{t0}: {}{more}\n", shown.join(" ")));
            }
            let unresolved = p.unresolved();
            if !unresolved.is_empty() {
                human.push_str(&format!("unresolved: {}\n", unresolved.len()));
            }
            let report = Report::new(&Out { k, start, end, t0 }, csv, human)?
                .partial(!unresolved.is_empty());
            Ok((
                "partition",
                report,
                manifest(
                    "partition",
                    json!({"k": k.to_string(), "start": start, "end": end}),
                    g,
                ),
            ))
        }
        Command::Families { family } => {
            let (rec, inputs) = match family {
                Family::TwoPow { r } => (
                    family_two_pow_minus_three(r)?,
                    json!({"family": "two-pow", "r": r}),
                ),
                Family::Second { n, r } => (
                    family_second(n, r)?,
                    json!({"family": "second", "n": n, "r": r}),
                ),
            };
            Ok((
                "families",
                records_report(std::slice::from_ref(&rec), &rec)?,
                manifest("families", inputs, g),
            ))
        }
        Command::T10 { n } => {
            let recs = composition_cycles(n)?;
            let mut report = records_report(&recs, &recs)?;
            report.human = format!(
                "{} cycles of F_{}\n{}",
                recs.len(),
                recs.first().map_or(0, |r| r.k),
                report.human
            );
            Ok(("t10", report, manifest("t10", json!({"n": n}), g)))
        }
        Command::Dioph {
            k,
            seed_budget,
            grid_check: grid,
        } => dioph(k, seed_budget, grid, g),
        Command::Stats {
            ks,
            n_max,
            convention,
        } => {
            let convs = conventions(&convention)?;
            let mut rows: Vec<PathStats> = Vec::new();
            for &k in &ks {
                let scan = scan_range(k, n_max, &g.limits, g.jobs)?;
                rows.extend(convs.iter().map(|&c| stats_from_scan(&scan, c)));
            }
            let partial = rows.iter().any(PathStats::is_partial);
            let csv = csv_rows(|w| write_stats_csv(&rows, w))?;
            let human = rows
                .iter()
                .map(|s| {
                    format!(
                        "k {} {}: max {} at n={}, avg {:.2}, avg sigma {:.2}{}",
                        s.k,
                        s.convention.name(),
                        s.max_steps,
                        s.arg_max,
                        s.avg_steps,
                        s.avg_sigma,
                        if s.is_partial() {
                            format!(", {} unresolved", s.unresolved_count)
                        } else {
                            String::new()
                        }
                    )
                })
                .collect::<Vec<_>>()
                .join("\n");
            let report = Report::new(&rows, csv, human)?.partial(partial);
            let mut m = manifest(
                "stats",
                json!({"k": ks.iter().map(|k| k.to_string()).collect::<Vec<_>>(), "n_max": n_max}),
                g,
            );
            m.notes = json!({
                "jobs": g.jobs,
                "conventions": convs.iter().map(|c| c.name()).collect::<Vec<_>>(),
                "rows": rows,
            });
            Ok(("stats", report, m))
        }
        Command::Dist {
            k,
            bucket_size,
            buckets,
            grouping,
        } => {
            let grouping: Grouping = grouping.parse()?;
            let d = distribution_buckets(k, bucket_size, buckets, grouping, &g.limits, g.jobs)?;
            let csv = csv_rows(|w| write_distribution_csv(&d, w))?;
            let mut human = format!("columns: {}\n", d.labels.join(" "));
            for i in 0..d.counts.len() {
                let p: Vec<String> = d.percentages(i).iter().map(|x| format!("{x:.2}")).collect();
                human.push_str(&format!("{:>6} {}\n", d.bucket_start(i), p.join(" ")));
            }
            let partial = d.unresolved.iter().any(|&u| u > 0);
            let report = Report::new(&d, csv, human)?.partial(partial);
            Ok((
                "dist",
                report,
                manifest(
                    "dist",
                    json!({"k": k.to_string(), "bucket_size": bucket_size, "buckets": buckets, "grouping": grouping}),
                    g,
                ),
            ))
        }
        Command::Randorbs { seed, count } => {
            let rows = random_origin_study(seed, count, &g.limits)?;
            let csv = csv_rows(|w| write_origin_csv(&rows, w))?;
            let human = rows
                .iter()
                .map(|r| {
                    format!(
                        "seed {} orbs {} -> k {} t0 {} verified {}",
                        r.seed, r.orbs, r.k, r.t0, r.verified
                    )
                })
                .collect::<Vec<_>>()
                .join("\n");
            let partial = rows.iter().any(|r| !r.verified);
            let report = Report::new(&rows, csv, human)?.partial(partial);
            let mut m = manifest(
                "randorbs",
                json!({"count": count, "orb_count": [5, 15], "steps": [1, 3]}),
                g,
            );
            m.seed = Some(seed);
            Ok(("randorbs", report, m))
        }
        Command::Ratio { ks, seeds } => {
            let mut rows = Vec::new();
            for &k in &ks {
                let bound = seeds.unwrap_or_else(|| default_seed_bound(k));
                rows.extend(max_t0_ratio_study(&[k], bound, &g.limits, g.jobs)?);
            }
            let csv = csv_rows(|w| write_ratio_csv(&rows, w))?;
            let human = rows
                .iter()
                .map(|r| {
                    format!(
                        "k {}: {} original, max t0 {}, ratio {}{}",
                        r.k,
                        r.original_count,
                        r.max_t0
                            .as_ref()
                            .map(|t| t.to_string())
                            .unwrap_or_else(|| "-".into()),
                        r.ratio
                            .map(|x| format!("{x:.4}"))
                            .unwrap_or_else(|| "-".into()),
                        if r.partial { " (partial)" } else { "" }
                    )
                })
                .collect::<Vec<_>>()
                .join("\n");
            let partial = rows.iter().any(|r| r.partial);
            let report = Report::new(&rows, csv, human)?.partial(partial);
            Ok((
                "ratio",
                report,
                manifest(
                    "ratio",
                    json!({"k": ks.iter().map(|k| k.to_string()).collect::<Vec<_>>(), "seeds": seeds}),
                    g,
                ),
            ))
        }
    }
}

fn records_report<T: Serialize>(recs: &[CycleRecord], json_value: &T) -> Result<Report> {
    let csv = csv_rows(|w| write_catalog_csv(recs, w))?;
    let human = recs
        .iter()
        .map(|r| {
            format!(
                "k {} t0 {} {} {} ({} steps)",
                r.k, r.t0, r.classification, r.orbs, r.total_steps
            )
        })
        .collect::<Vec<_>>()
        .join("\n");
    Report::new(json_value, csv, human)
}

fn catalog_report(cat: &CycleCatalog) -> Result<Report> {
    #[derive(Serialize)]
    struct Out<'a> {
        #[serde(flatten)]
        catalog: &'a CycleCatalog,
        counts: gcs_core::ClassCounts,
    }
    let counts = cat.counts();
    let mut report = records_report(
        &cat.records,
        &Out {
            catalog: cat,
            counts: counts.clone(),
        },
    )?;
    let inherited: BTreeMap<String, usize> = counts
        .inherited
        .iter()
        .map(|(k, n)| (k.to_string(), *n))
        .collect();
    report.human = format!(
        "F_{} seeds 1..={}: {} original, {} total nontrivial, inherited {:?}{}\n{}",
        cat.k,
        cat.seed_bound,
        counts.original,
        counts.total,
        inherited,
        if cat.is_partial() {
            format!(", {} unresolved seeds", cat.unresolved.len())
        } else {
            String::new()
        },
        report.human
    );
    Ok(report.partial(cat.is_partial()))
}

fn dioph(
    k: u128,
    seed_budget: u64,
    grid: bool,
    g: &Global,
) -> Result<(&'static str, Report, Manifest)> {
    let outcome = solve(k, seed_budget, &g.limits)?;
    let grid_solutions = if grid {
        Some(grid_check(k, 128)?)
    } else {
        None
    };
    #[derive(Serialize)]
    struct Found {
        k: u128,
        status: &'static str,
        m: u64,
        n: u64,
        witness_seed: u64,
        #[serde(with = "gcs_core::io::big")]
        witness_t0: BigUint,
        ups: Vec<u32>,
        downs: Vec<u32>,
        #[serde(skip_serializing_if = "Option::is_none")]
        grid: Option<Vec<(u64, u64)>>,
    }
    #[derive(Serialize)]
    struct Missing<'a> {
        k: u128,
        status: &'static str,
        #[serde(rename = "observed_M", with = "gcs_core::io::signed_vec")]
        observed_m: Vec<num_bigint::BigInt>,
        #[serde(skip_serializing_if = "str::is_empty")]
        reason: &'a str,
        #[serde(skip_serializing_if = "Option::is_none")]
        grid: Option<Vec<(u64, u64)>>,
    }
    let grid_cell = grid_solutions
        .as_ref()
        .map(|g| {
            g.iter()
                .map(|(m, n)| format!("{m}:{n}"))
                .collect::<Vec<_>>()
                .join(" ")
        })
        .unwrap_or_default();
    let header = row([
        "k",
        "status",
        "m",
        "n",
        "witness_seed",
        "witness_t0",
        "ups",
        "downs",
        "observed_M",
        "grid",
    ]);
    let report = match &outcome {
        DiophantineOutcome::Found(s) => {
            let out = Found {
                k,
                status: "found",
                m: s.m,
                n: s.n,
                witness_seed: s.witness_seed,
                witness_t0: s.witness_t0.clone(),
                ups: s.witness_orbs.ups().to_vec(),
                downs: s.witness_orbs.downs().to_vec(),
                grid: grid_solutions.clone(),
            };
            let csv = vec![
                header,
                row([
                    k.to_string(),
                    "found".into(),
                    s.m.to_string(),
                    s.n.to_string(),
                    s.witness_seed.to_string(),
                    s.witness_t0.to_string(),
                    format_counts(s.witness_orbs.ups()),
                    format_counts(s.witness_orbs.downs()),
                    String::new(),
                    grid_cell.clone(),
                ]),
            ];
            let mut human = format!(
                "2^{} - 3^{} = {k} (seed {}, cycle t0 {} {})",
                s.m, s.n, s.witness_seed, s.witness_t0, s.witness_orbs
            );
            if grid {
                human.push_str(&format!("\ngrid m<=128: {grid_cell}"));
            }
            Report::new(&out, csv, human)?
        }
        DiophantineOutcome::NotFound {
            observed_m,
            unresolved_seeds,
            ..
        } => {
            let shown: Vec<String> = observed_m.iter().map(|m| m.to_string()).collect();
            let out = Missing {
                k,
                status: "not_found",
                observed_m: observed_m.clone(),
                reason: "",
                grid: grid_solutions.clone(),
            };
            let csv = vec![
                header,
                row([
                    k.to_string(),
                    "not_found".into(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    shown.join(" "),
                    grid_cell.clone(),
                ]),
            ];
            let mut human = format!(
                "no solution from odd seeds <= {seed_budget} (inconclusive); cycles gave M = {}",
                shown.join(", ")
            );
            if grid {
                human.push_str(&format!(
                    "\ngrid m<=128: {}",
                    if grid_cell.is_empty() {
                        "none"
                    } else {
                        &grid_cell
                    }
                ));
            }
            Report::new(&out, csv, human)?.partial(!unresolved_seeds.is_empty())
        }
        DiophantineOutcome::NoSolution { reason, .. } => {
            let out = Missing {
                k,
                status: "no_solution",
                observed_m: Vec::new(),
                reason,
                grid: grid_solutions.clone(),
            };
            let csv = vec![
                header,
                row([
                    k.to_string(),
                    "no_solution".into(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    grid_cell.clone(),
                ]),
            ];
            Report::new(&out, csv, format!("no solution: {reason}"))?
        }
    };
    Ok((
        "dioph",
        report,
        manifest(
            "dioph",
            json!({"k": k.to_string(), "seed_budget": seed_budget, "grid_check": grid}),
            g,
        ),
    ))
}
