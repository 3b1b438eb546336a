use serde::{Deserialize, Serialize};

use super::windows::{CrunchWindow, IntervalCounts};
use crate::pricing::ServiceClassKind;

pub const CLASS_COUNT: usize = ServiceClassKind::ALL.len();

/// Totals for one detection interval.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub revenue: f64,
    pub blocking_cost: f64,
    pub offered: u64,
    pub crunched: u64,
}

impl Bin {
    pub fn profit(&self) -> f64 {
        self.revenue - self.blocking_cost
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DayMetrics {
    pub day: u32,
    /// Revenue realised during the day, integrated over allocated bandwidth.
    pub revenue: f64,
    pub blocking_cost: f64,
    pub offered: u64,
    pub crunched: [u64; CLASS_COUNT],
    pub crunched_served: [u64; CLASS_COUNT],
    /// Crunched requests whose chosen degradation could not be executed.
    pub exec_failures: u64,
    /// Summed hop count of served crunched requests.
    pub served_crunched_hops: u64,
}

impl DayMetrics {
    pub fn profit(&self) -> f64 {
        self.revenue - self.blocking_cost
    }

    pub fn crunched_total(&self) -> u64 {
        self.crunched.iter().sum()
    }

    pub fn served_total(&self) -> u64 {
        self.crunched_served.iter().sum()
    }
}

/// Deterministic outcome of one replication. Wall-clock timings live in
/// [`DecisionTiming`] so that equal inputs give equal frames.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsFrame {
    pub policy: String,
    pub seed: u64,
    pub bin_s: f64,
    pub bins_per_day: usize,
    pub days: Vec<DayMetrics>,
    /// Measured-period bins, `bins_per_day` per day.
    pub bins: Vec<Bin>,
    /// Safety checks that failed after a decision, with the first message.
    pub violations: u64,
    pub first_violation: Option<String>,
}

impl MetricsFrame {
    pub fn new(policy: &str, seed: u64, days: u32, bins_per_day: usize, bin_s: f64) -> Self {
        MetricsFrame {
            policy: policy.to_string(),
            seed,
            bin_s,
            bins_per_day,
            days: (0..days).map(|day| DayMetrics { day, ..Default::default() }).collect(),
            bins: vec![Bin::default(); days as usize * bins_per_day],
            violations: 0,
            first_violation: None,
        }
    }

    /// Copies bin totals into the per-day records.
    pub(crate) fn roll_up(&mut self) {
        for (day, chunk) in self.days.iter_mut().zip(self.bins.chunks(self.bins_per_day)) {
            day.revenue = chunk.iter().map(|b| b.revenue).sum();
            day.blocking_cost = chunk.iter().map(|b| b.blocking_cost).sum();
            day.offered = chunk.iter().map(|b| b.offered).sum();
        }
    }

    pub fn revenue(&self) -> f64 {
        self.days.iter().map(|d| d.revenue).sum()
    }

    pub fn blocking_cost(&self) -> f64 {
        self.days.iter().map(|d| d.blocking_cost).sum()
    }

    pub fn profit(&self) -> f64 {
        self.revenue() - self.blocking_cost()
    }

    pub fn offered(&self) -> u64 {
        self.days.iter().map(|d| d.offered).sum()
    }

    pub fn crunched(&self, class: ServiceClassKind) -> u64 {
        self.days.iter().map(|d| d.crunched[class.index()]).sum()
    }

    pub fn crunched_served(&self, class: ServiceClassKind) -> u64 {
        self.days.iter().map(|d| d.crunched_served[class.index()]).sum()
    }

    pub fn crunched_total(&self) -> u64 {
        self.days.iter().map(DayMetrics::crunched_total).sum()
    }

    pub fn exec_failures(&self) -> u64 {
        self.days.iter().map(|d| d.exec_failures).sum()
    }

    /// Fraction of crunched requests in `classes` that were served.
    pub fn crunched_acceptance(&self, classes: &[ServiceClassKind]) -> Option<f64> {
        let crunched: u64 = classes.iter().map(|&c| self.crunched(c)).sum();
        let served: u64 = classes.iter().map(|&c| self.crunched_served(c)).sum();
        (crunched > 0).then(|| served as f64 / crunched as f64)
    }

    pub fn mean_served_path_len(&self) -> Option<f64> {
        let served: u64 = self.days.iter().map(DayMetrics::served_total).sum();
        let hops: u64 = self.days.iter().map(|d| d.served_crunched_hops).sum();
        (served > 0).then(|| hops as f64 / served as f64)
    }

    /// Crunched and offered counts per time-of-day interval, summed over days.
    pub fn daily_profile(&self) -> Vec<IntervalCounts> {
        let mut out = vec![IntervalCounts::default(); self.bins_per_day];
        for chunk in self.bins.chunks(self.bins_per_day) {
            for (acc, b) in out.iter_mut().zip(chunk) {
                acc.crunched += b.crunched;
                acc.offered += b.offered;
            }
        }
        out
    }

    /// Mean daily profit inside the given time-of-day windows.
    pub fn daily_profit_in(&self, windows: &[CrunchWindow]) -> f64 {
        if self.days.is_empty() {
            return 0.0;
        }
        let total: f64 = self
            .bins
            .chunks(self.bins_per_day)
            .map(|chunk| windows.iter().map(|w| chunk[w.start..w.end].iter().map(Bin::profit).sum::<f64>()).sum::<f64>())
            .sum();
        total / self.days.len() as f64
    }
}

/// Wall-clock cost of policy decisions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DecisionTiming {
    pub decisions: u64,
    pub total_us: f64,
    pub max_us: f64,
}

impl DecisionTiming {
    pub fn record(&mut self, us: f64) {
        self.decisions += 1;
        self.total_us += us;
        self.max_us = self.max_us.max(us);
    }

    pub fn mean_us(&self) -> Option<f64> {
        (self.decisions > 0).then(|| self.total_us / self.decisions as f64)
    }
}
