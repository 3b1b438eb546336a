//! `crunch`: run comparisons, replay the worked example, calibrate scenarios
//! and dump CAG views.

mod example;
mod manifest;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use crunch_core::cag::{Cag, CagView, FreePolicy, WeightPolicy};
use crunch_core::net::Topology;
use crunch_core::sim::{calibrate, compare, CalibrationOptions, CompareOptions, CrunchTarget, RunOptions, ScenarioConfig, SimError};
use crunch_core::snapshot::Snapshot;
use crunch_core::Bandwidth;

use manifest::{load_scenario, load_topology, parse_seeds, RunManifest};

#[derive(Parser)]
#[command(name = "crunch", version, about = "Profit-aware provisioning under resource crunch")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate every policy of a manifest and write CSV reports.
    Run {
        #[arg(long)]
        manifest: PathBuf,
        /// Comma-separated seeds or inclusive ranges, e.g. `0-9`.
        #[arg(long, value_parser = parse_seed_list)]
        seeds: Option<SeedList>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay the seven-node worked example.
    Example,
    /// Fit a scenario's arrival profile to a target Baseline crunch.
    Calibrate {
        /// Peak crunched share, in percent.
        #[arg(long)]
        peak: f64,
        /// Daily time above the crunch threshold, in minutes.
        #[arg(long)]
        duration: f64,
        /// Starting scenario; the bundled one when absent.
        #[arg(long)]
        template: Option<PathBuf>,
        #[arg(long)]
        topology: Option<PathBuf>,
        #[arg(long, default_value = "scenario.json")]
        out: PathBuf,
        #[arg(long, default_value_t = CalibrationOptions::default().eval_days)]
        eval_days: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print a CAG view of a snapshot as Graphviz DOT.
    DumpCag {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        src: String,
        #[arg(long)]
        dst: String,
        #[arg(long, value_parser = ["relaxed-min", "relaxed-req", "cap-min", "cap-req"])]
        view: String,
        #[arg(long)]
        bw: f64,
        #[arg(long, value_enum, default_value = "zero")]
        free: FreeArg,
    },
}

/// A parsed `--seeds` value; a newtype so clap treats it as a single argument.
#[derive(Clone, Debug)]
struct SeedList(Vec<u64>);

fn parse_seed_list(list: &str) -> Result<SeedList, String> {
    parse_seeds(list).map(SeedList)
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum FreeArg {
    Zero,
    MeanRate,
}

/// Input problems exit with 2, everything else with 1.
enum Failure {
    Input(anyhow::Error),
    Runtime(anyhow::Error),
}

trait InputErr<T> {
    fn input(self) -> Result<T, Failure>;
}

impl<T> InputErr<T> for Result<T> {
    fn input(self) -> Result<T, Failure> {
        self.map_err(Failure::Input)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("CRUNCH_THREADS") {
        let n: usize = v.parse().map_err(|_| anyhow!("CRUNCH_THREADS must be a positive integer, got '{v}'"))?;
        if n == 0 {
            bail!("CRUNCH_THREADS must be a positive integer, got '{v}'");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn cmd_run(manifest: PathBuf, seeds: Option<Vec<u64>>, out: Option<PathBuf>) -> Result<(), Failure> {
    let m = RunManifest::load(&manifest).input()?;
    let seeds = seeds.or(m.seeds).unwrap_or_else(|| (0..10).collect());
    let out = out.or(m.out).ok_or_else(|| Failure::Input(anyhow!("no output directory: pass --out")))?;
    let opts = CompareOptions {
        seeds,
        run: RunOptions { check_invariants: true, log_decisions: m.log_decisions },
    };
    let started = Instant::now();
    let cmp = compare(&m.scenario, &m.topology, &m.policies, &opts).context("simulation failed")?;
    report::write_all(&out, &cmp)?;
    eprintln!(
        "{} policies x {} seeds in {:.1} s -> {}",
        cmp.policies.len(),
        cmp.seeds.len(),
        started.elapsed().as_secs_f64(),
        out.display()
    );
    for row in report::summary_rows(&cmp) {
        println!(
            "{:<14} crunch profit/day {:>12.2} +- {:<10.2} gap vs baseline {:>10.2} +- {:.2}",
            row.policy,
            row.crunch_profit_mean,
            row.crunch_profit_ci95,
            row.crunch_profit_gap_vs_baseline,
            row.crunch_profit_gap_ci95
        );
    }
    Ok(())
}

fn cmd_calibrate(
    peak: f64,
    duration: f64,
    template: Option<PathBuf>,
    topology: Option<PathBuf>,
    out: PathBuf,
    eval_days: u32,
    seed: u64,
) -> Result<(), Failure> {
    let template = match template {
        Some(p) => load_scenario(&p).input()?,
        None => ScenarioConfig::scenario_a(),
    };
    let topo = match topology {
        Some(p) => load_topology(&p).input()?,
        None => Topology::usnet(),
    };
    if !(0.0..100.0).contains(&peak) || duration < 0.0 {
        return Err(Failure::Input(anyhow!("--peak must lie in [0, 100) and --duration must be non-negative")));
    }
    let target = CrunchTarget { peak_ratio: peak / 100.0, duration_s: duration * 60.0 };
    let opts = CalibrationOptions { eval_days, seed, ..CalibrationOptions::default() };
    let trace = out.with_extension("calibration.json");
    let (cfg, record) = match calibrate(&template, &topo, target, opts) {
        Ok(done) => done,
        Err(SimError::NoConvergence(steps)) => {
            std::fs::write(&trace, serde_json::to_string_pretty(&steps).map_err(anyhow::Error::from)?)
                .with_context(|| format!("cannot write {}", trace.display()))?;
            return Err(Failure::Runtime(anyhow!(
                "calibration did not converge after {} trials; search trace in {}",
                steps.len(),
                trace.display()
            )));
        }
        Err(e) => return Err(Failure::Runtime(anyhow::Error::from(e).context("calibration failed"))),
    };
    std::fs::write(&out, serde_json::to_string_pretty(&cfg).map_err(anyhow::Error::from)?)
        .with_context(|| format!("cannot write {}", out.display()))?;
    std::fs::write(&trace, serde_json::to_string_pretty(&record).map_err(anyhow::Error::from)?)
        .with_context(|| format!("cannot write {}", trace.display()))?;
    println!(
        "lambda_base {:.6}/s, amplitude {:.4}: peak {:.2}%, {:.0} min above threshold after {} trials",
        cfg.lambda_base,
        cfg.amplitude,
        record.peak_ratio * 100.0,
        record.duration_s / 60.0,
        record.steps.len()
    );
    println!("wrote {} and {}", out.display(), trace.display());
    Ok(())
}

fn cmd_dump_cag(state: PathBuf, src: String, dst: String, view: String, bw: f64, free: FreeArg) -> Result<(), Failure> {
    let text = manifest::read_to_string(&state).input()?;
    let snap = Snapshot::from_json(&text)
        .with_context(|| format!("invalid snapshot {}", state.display()))
        .input()?;
    let loaded = snap.materialize::<f64>().map_err(anyhow::Error::from).input()?;
    let topo = loaded.state.topology();
    let node = |name: &str| topo.node_by_name(name).ok_or_else(|| anyhow!("unknown node '{name}'"));
    let s = node(&src).input()?;
    let t = node(&dst).input()?;
    if s == t {
        return Err(Failure::Input(anyhow!("--src and --dst must differ")));
    }
    if !(bw > 0.0) {
        return Err(Failure::Input(anyhow!("--bw must be positive")));
    }
    let view: CagView = view.parse().map_err(anyhow::Error::from).input()?;
    let free = match free {
        FreeArg::Zero => FreePolicy::Zero,
        FreeArg::MeanRate => FreePolicy::MeanRate,
    };
    let cag = Cag::build(&loaded.state);
    let policy = WeightPolicy { free, horizon: loaded.horizon };
    print!("{}", cag.to_dot(s, t, view, Bandwidth::from_gbps(bw), &policy));
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    configure_threads().input()?;
    match cli.command {
        Command::Run { manifest, seeds, out } => cmd_run(manifest, seeds.map(|s| s.0), out),
        Command::Example => {
            for l in example::report()? {
                println!("{l}");
            }
            Ok(())
        }
        Command::Calibrate { peak, duration, template, topology, out, eval_days, seed } => {
            cmd_calibrate(peak, duration, template, topology, out, eval_days, seed)
        }
        Command::DumpCag { state, src, dst, view, bw, free } => cmd_dump_cag(state, src, dst, view, bw, free),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
