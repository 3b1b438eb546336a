//! CSV and JSON artifacts of `crunch run`. Column sets are pinned by
//! `SCHEMA_VERSION`; bump it whenever a header changes.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use crunch_core::provisioner::DecisionRecord;
use crunch_core::sim::{Comparison, CLASS_COUNT};
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct DailyRow<'a> {
    pub policy: &'a str,
    pub seed: u64,
    pub day: u32,
    pub revenue: f64,
    pub blocking_cost: f64,
    pub profit: f64,
    pub crunch_window_profit: f64,
    pub offered: u64,
    pub crunched_interactive: u64,
    pub crunched_elastic: u64,
    pub crunched_background: u64,
    pub served_interactive: u64,
    pub served_elastic: u64,
    pub served_background: u64,
    pub exec_failures: u64,
    pub mean_served_path_len: Option<f64>,
}

#[derive(Serialize)]
pub struct SummaryRow<'a> {
    pub policy: &'a str,
    pub seeds: usize,
    pub crunch_profit_mean: f64,
    pub crunch_profit_ci95: f64,
    pub crunch_profit_gap_vs_baseline: f64,
    pub crunch_profit_gap_ci95: f64,
    pub daily_profit_mean: f64,
    pub daily_profit_ci95: f64,
    pub daily_revenue: f64,
    pub daily_blocking_cost: f64,
    pub crunched_per_day_interactive: f64,
    pub crunched_per_day_elastic: f64,
    pub crunched_per_day_background: f64,
    pub acceptance_interactive: Option<f64>,
    pub acceptance_elastic: Option<f64>,
    pub acceptance_background: Option<f64>,
    pub crunched_fraction: f64,
    pub mean_served_path_len: Option<f64>,
    pub mean_decision_us: Option<f64>,
    pub own_crunch_windows: f64,
    pub exec_failures: u64,
    pub violations: u64,
}

#[derive(Serialize)]
pub struct WindowRow {
    pub seed: u64,
    pub start_s: f64,
    pub end_s: f64,
}

#[derive(Serialize)]
struct LoggedDecision<'a> {
    seed: u64,
    #[serde(flatten)]
    record: &'a DecisionRecord,
}

#[derive(Serialize)]
struct RunInfo<'a> {
    schema_version: u32,
    scenario: &'a str,
    seeds: &'a [u64],
    policies: Vec<&'a str>,
    reference: &'a str,
}

pub fn daily_rows<'a>(cmp: &'a Comparison) -> Vec<DailyRow<'a>> {
    let mut rows = Vec::new();
    for (p, policy) in cmp.policies.iter().enumerate() {
        for (s, frame) in cmp.frames(p).enumerate() {
            for d in &frame.days {
                let bins = &frame.bins[d.day as usize * frame.bins_per_day..][..frame.bins_per_day];
                let window_profit = cmp.windows[s]
                    .iter()
                    .flat_map(|w| &bins[w.start..w.end])
                    .map(|b| b.profit())
                    .sum();
                let served = d.served_total();
                rows.push(DailyRow {
                    policy: &policy.name,
                    seed: frame.seed,
                    day: d.day,
                    revenue: d.revenue,
                    blocking_cost: d.blocking_cost,
                    profit: d.profit(),
                    crunch_window_profit: window_profit,
                    offered: d.offered,
                    crunched_interactive: d.crunched[0],
                    crunched_elastic: d.crunched[1],
                    crunched_background: d.crunched[2],
                    served_interactive: d.crunched_served[0],
                    served_elastic: d.crunched_served[1],
                    served_background: d.crunched_served[2],
                    exec_failures: d.exec_failures,
                    mean_served_path_len: (served > 0)
                        .then(|| d.served_crunched_hops as f64 / served as f64),
                });
            }
        }
    }
    rows
}

pub fn summary_rows(cmp: &Comparison) -> Vec<SummaryRow<'_>> {
    const _: () = assert!(CLASS_COUNT == 3);
    cmp.summary()
        .into_iter()
        .enumerate()
        .map(|(p, s)| {
            let gap = cmp.gap(p, cmp.reference);
            SummaryRow {
                policy: &cmp.policies[p].name,
                seeds: cmp.seeds.len(),
                crunch_profit_mean: s.crunch_profit.mean,
                crunch_profit_ci95: s.crunch_profit.half_width,
                crunch_profit_gap_vs_baseline: gap.mean,
                crunch_profit_gap_ci95: gap.half_width,
                daily_profit_mean: s.daily_profit.mean,
                daily_profit_ci95: s.daily_profit.half_width,
                daily_revenue: s.daily_revenue,
                daily_blocking_cost: s.daily_blocking_cost,
                crunched_per_day_interactive: s.crunched_per_day[0],
                crunched_per_day_elastic: s.crunched_per_day[1],
                crunched_per_day_background: s.crunched_per_day[2],
                acceptance_interactive: s.crunched_acceptance[0],
                acceptance_elastic: s.crunched_acceptance[1],
                acceptance_background: s.crunched_acceptance[2],
                crunched_fraction: s.crunched_fraction,
                mean_served_path_len: s.mean_served_path_len,
                mean_decision_us: s.mean_decision_us,
                own_crunch_windows: s.own_crunch_windows,
                exec_failures: s.exec_failures,
                violations: s.violations,
            }
        })
        .collect()
}

pub fn window_rows(cmp: &Comparison, frame_bin_s: f64) -> Vec<WindowRow> {
    cmp.seeds
        .iter()
        .zip(&cmp.windows)
        .flat_map(|(&seed, ws)| {
            ws.iter().map(move |w| WindowRow {
                seed,
                start_s: w.start as f64 * frame_bin_s,
                end_s: w.end as f64 * frame_bin_s,
            })
        })
        .collect()
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `daily.csv`, `summary.csv`, `windows.csv`, `run.json` and, when
/// decisions were logged, `decisions.jsonl` into `dir`.
pub fn write_all(dir: &Path, cmp: &Comparison) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    write_csv(&dir.join("daily.csv"), &daily_rows(cmp))?;
    write_csv(&dir.join("summary.csv"), &summary_rows(cmp))?;
    let bin_s = cmp.runs[cmp.reference].first().map_or(300.0, |r| r.metrics.bin_s);
    write_csv(&dir.join("windows.csv"), &window_rows(cmp, bin_s))?;

    let info = RunInfo {
        schema_version: SCHEMA_VERSION,
        scenario: &cmp.scenario,
        seeds: &cmp.seeds,
        policies: cmp.policies.iter().map(|p| p.name.as_str()).collect(),
        reference: &cmp.policies[cmp.reference].name,
    };
    fs::write(dir.join("run.json"), serde_json::to_string_pretty(&info)?)?;

    if cmp.runs.iter().flatten().any(|r| !r.decisions.is_empty()) {
        let path = dir.join("decisions.jsonl");
        let mut out = BufWriter::new(File::create(&path).with_context(|| format!("cannot write {}", path.display()))?);
        for runs in &cmp.runs {
            for r in runs {
                for record in &r.decisions {
                    let line = LoggedDecision { seed: r.metrics.seed, record };
                    serde_json::to_writer(&mut out, &line)?;
                    out.write_all(b"\n")?;
                }
            }
        }
        out.flush()?;
    }
    Ok(())
}

