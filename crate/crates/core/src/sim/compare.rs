//! Paired multi-seed comparison of approaches on common request streams.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::engine::{run, RunOptions, RunOutput};
use super::metrics::{MetricsFrame, CLASS_COUNT};
use super::windows::{detect_crunch_windows, CrunchWindow};
use super::{ScenarioConfig, SimError};
use crate::baselines::{Approach, ApproachPolicy};
use crate::net::Topology;
use crate::pricing::ServiceClassKind;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareOptions {
    pub seeds: Vec<u64>,
    pub run: RunOptions,
}

/// Sample mean with a two-sided 95 % Student-t half width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanCi {
    pub mean: f64,
    pub half_width: f64,
    pub n: usize,
}

impl MeanCi {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return MeanCi { mean: f64::NAN, half_width: f64::INFINITY, n };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return MeanCi { mean, half_width: f64::INFINITY, n };
        }
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
            .expect("positive degrees of freedom")
            .inverse_cdf(0.975);
        MeanCi { mean, half_width: t * (var / n as f64).sqrt(), n }
    }

    pub fn lower(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.half_width
    }

    /// The whole interval lies above zero.
    pub fn positive(&self) -> bool {
        self.lower() > 0.0
    }
}

/// Mean and CI of `a[i] - b[i]`.
pub fn paired_difference(a: &[f64], b: &[f64]) -> MeanCi {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    MeanCi::from_samples(&d)
}

/// One row of the summary table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicySummary {
    pub policy: String,
    /// Mean daily profit inside the reference crunch windows, across seeds.
    pub crunch_profit: MeanCi,
    pub daily_profit: MeanCi,
    pub daily_revenue: f64,
    pub daily_blocking_cost: f64,
    pub crunched_per_day: [f64; CLASS_COUNT],
    pub crunched_acceptance: [Option<f64>; CLASS_COUNT],
    pub crunched_fraction: f64,
    pub mean_served_path_len: Option<f64>,
    pub mean_decision_us: Option<f64>,
    /// Windows the policy's own run shows, averaged over seeds.
    pub own_crunch_windows: f64,
    pub exec_failures: u64,
    pub violations: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub scenario: String,
    pub seeds: Vec<u64>,
    pub policies: Vec<ApproachPolicy>,
    /// Index of the Baseline that defines crunch windows.
    pub reference: usize,
    /// Time-of-day windows per seed, from the reference run.
    pub windows: Vec<Vec<CrunchWindow>>,
    /// `runs[policy][seed]`.
    pub runs: Vec<Vec<RunOutput>>,
    threshold: f64,
}

impl Comparison {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.policies.iter().position(|p| p.name == name)
    }

    /// Per-seed mean daily profit inside the reference windows.
    pub fn crunch_profit(&self, policy: usize) -> Vec<f64> {
        self.runs[policy]
            .iter()
            .zip(&self.windows)
            .map(|(r, w)| r.metrics.daily_profit_in(w))
            .collect()
    }

    /// Paired crunch-window profit difference `a - b`.
    pub fn gap(&self, a: usize, b: usize) -> MeanCi {
        paired_difference(&self.crunch_profit(a), &self.crunch_profit(b))
    }

    pub fn own_windows(&self, policy: usize, seed: usize) -> Vec<CrunchWindow> {
        detect_crunch_windows(&self.runs[policy][seed].metrics.daily_profile(), self.threshold)
    }

    pub fn frames(&self, policy: usize) -> impl Iterator<Item = &MetricsFrame> {
        self.runs[policy].iter().map(|r| &r.metrics)
    }

    pub fn summary(&self) -> Vec<PolicySummary> {
        (0..self.policies.len()).map(|p| self.summarize(p)).collect()
    }

    fn summarize(&self, p: usize) -> PolicySummary {
        let frames: Vec<&MetricsFrame> = self.frames(p).collect();
        let days: f64 = frames.iter().map(|f| f.days.len() as f64).sum();
        let per_day = |x: f64| if days > 0.0 { x / days } else { 0.0 };
        let sum_u = |f: &dyn Fn(&MetricsFrame) -> u64| frames.iter().map(|m| f(m)).sum::<u64>();
        let mut crunched_per_day = [0.0; CLASS_COUNT];
        let mut crunched_acceptance = [None; CLASS_COUNT];
        for class in ServiceClassKind::ALL {
            let c = sum_u(&|m| m.crunched(class));
            let s = sum_u(&|m| m.crunched_served(class));
            crunched_per_day[class.index()] = per_day(c as f64);
            crunched_acceptance[class.index()] = (c > 0).then(|| s as f64 / c as f64);
        }
        let offered = sum_u(&|m| m.offered());
        let crunched = sum_u(&|m| m.crunched_total());
        let served: u64 = frames.iter().flat_map(|m| &m.days).map(|d| d.served_total()).sum();
        let hops: u64 = frames.iter().flat_map(|m| &m.days).map(|d| d.served_crunched_hops).sum();
        let decisions: u64 = self.runs[p].iter().map(|r| r.timing.decisions).sum();
        let wall: f64 = self.runs[p].iter().map(|r| r.timing.total_us).sum();
        let daily_profit: Vec<f64> =
            frames.iter().map(|m| m.profit() / m.days.len().max(1) as f64).collect();
        let own_windows: usize = (0..self.seeds.len()).map(|s| self.own_windows(p, s).len()).sum();
        PolicySummary {
            policy: self.policies[p].name.clone(),
            crunch_profit: MeanCi::from_samples(&self.crunch_profit(p)),
            daily_profit: MeanCi::from_samples(&daily_profit),
            daily_revenue: per_day(frames.iter().map(|m| m.revenue()).sum()),
            daily_blocking_cost: per_day(frames.iter().map(|m| m.blocking_cost()).sum()),
            crunched_per_day,
            crunched_acceptance,
            crunched_fraction: if offered > 0 { crunched as f64 / offered as f64 } else { 0.0 },
            mean_served_path_len: (served > 0).then(|| hops as f64 / served as f64),
            mean_decision_us: (decisions > 0).then(|| wall / decisions as f64),
            own_crunch_windows: own_windows as f64 / self.seeds.len().max(1) as f64,
            exec_failures: sum_u(&|m| m.exec_failures()),
            violations: sum_u(&|m| m.violations),
        }
    }
}

/// Runs every policy on every seed (in parallel on the current rayon pool)
/// and fixes crunch windows from the Baseline at the scenario capacity.
pub fn compare(
    cfg: &ScenarioConfig,
    topology: &Topology,
    policies: &[ApproachPolicy],
    opts: &CompareOptions,
) -> Result<Comparison, SimError> {
    if opts.seeds.is_empty() {
        return Err(SimError::InvalidConfig("at least one seed is required".into()));
    }
    let reference = policies
        .iter()
        .position(|p| {
            p.approach == Approach::Baseline
                && p.capacity_gbps.is_none_or(|c| c == cfg.capacity_gbps)
        })
        .ok_or(SimError::NoBaseline)?;
    let jobs: Vec<(usize, u64)> = (0..policies.len())
        .flat_map(|p| opts.seeds.iter().map(move |&s| (p, s)))
        .collect();
    let outputs: Vec<RunOutput> = jobs
        .par_iter()
        .map(|&(p, seed)| run::<f64>(cfg, topology, &policies[p], seed, opts.run))
        .collect::<Result<_, _>>()?;
    let mut it = outputs.into_iter();
    let runs: Vec<Vec<RunOutput>> =
        policies.iter().map(|_| it.by_ref().take(opts.seeds.len()).collect()).collect();
    let windows = runs[reference]
        .iter()
        .map(|r| detect_crunch_windows(&r.metrics.daily_profile(), cfg.crunch_threshold))
        .collect();
    Ok(Comparison {
        scenario: cfg.name.clone(),
        seeds: opts.seeds.clone(),
        policies: policies.to_vec(),
        reference,
        windows,
        runs,
        threshold: cfg.crunch_threshold,
    })
}
