//! Fits `(lambda_base, amplitude)` so the Baseline run shows a target crunch profile.
//!
//! For a fixed amplitude the peak crunch ratio grows with the peak arrival
//! rate, and for a fixed peak ratio the time above threshold shrinks as the
//! amplitude sharpens the daily wave. The search nests two bisections on
//! those monotone relations: the inner one on the peak rate, the outer one
//! on the amplitude.

use serde::{Deserialize, Serialize};

use super::engine::{run, RunOptions};
use super::windows::crunch_profile;
use super::{CrunchTarget, ScenarioConfig, SimError};
use crate::baselines::{Approach, ApproachPolicy};
use crate::net::Topology;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOptions {
    /// Measured days per trial run, after `warmup_days`.
    pub eval_days: u32,
    pub warmup_days: u32,
    pub seed: u64,
    /// Acceptance band on the peak ratio (absolute) and duration (relative).
    pub peak_tolerance: f64,
    pub duration_tolerance: f64,
    pub max_steps: usize,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions {
            eval_days: 60,
            warmup_days: 2,
            seed: 0,
            peak_tolerance: 0.005,
            duration_tolerance: 0.1,
            max_steps: 240,
        }
    }
}

/// One trial of the search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationStep {
    pub lambda_base: f64,
    pub amplitude: f64,
    pub peak_ratio: f64,
    pub duration_s: f64,
}

/// Provenance stored alongside a calibrated scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    pub target: CrunchTarget,
    pub options: CalibrationOptions,
    pub peak_ratio: f64,
    pub duration_s: f64,
    pub steps: Vec<CalibrationStep>,
}

/// Peak crunched ratio and daily time above threshold of the Baseline run,
/// from the time-of-day profile summed over the measured days.
pub fn measure_profile(cfg: &ScenarioConfig, topology: &Topology, seed: u64) -> Result<(f64, f64), SimError> {
    let policy = ApproachPolicy::new("baseline", Approach::Baseline);
    let opts = RunOptions { check_invariants: false, log_decisions: false };
    let out = run::<f64>(cfg, topology, &policy, seed, opts)?;
    Ok(crunch_profile(&out.metrics.daily_profile(), cfg.crunch_threshold, cfg.bin_s))
}

struct Search<'a> {
    template: ScenarioConfig,
    topology: &'a Topology,
    target: CrunchTarget,
    opts: CalibrationOptions,
    steps: Vec<CalibrationStep>,
}

impl Search<'_> {
    fn trial(&mut self, lambda_peak: f64, amplitude: f64) -> Result<CalibrationStep, SimError> {
        if self.steps.len() >= self.opts.max_steps {
            return Err(SimError::NoConvergence(std::mem::take(&mut self.steps)));
        }
        let mut cfg = self.template.clone();
        cfg.amplitude = amplitude;
        cfg.lambda_base = lambda_peak / cfg.peak_factor(amplitude);
        let (peak_ratio, duration_s) = measure_profile(&cfg, self.topology, self.opts.seed)?;
        let step = CalibrationStep { lambda_base: cfg.lambda_base, amplitude, peak_ratio, duration_s };
        self.steps.push(step);
        Ok(step)
    }

    fn peak_ok(&self, s: &CalibrationStep) -> bool {
        (s.peak_ratio - self.target.peak_ratio).abs() <= self.opts.peak_tolerance
    }

    fn duration_ok(&self, s: &CalibrationStep) -> bool {
        (s.duration_s - self.target.duration_s).abs() <= self.opts.duration_tolerance * self.target.duration_s
    }

    /// Peak arrival rate giving the target peak ratio at `amplitude`.
    fn fit_peak(&mut self, amplitude: f64, guess: f64) -> Result<CalibrationStep, SimError> {
        let first = self.trial(guess, amplitude)?;
        if self.peak_ok(&first) {
            return Ok(first);
        }
        let (mut lo, mut hi) = (guess, guess);
        if first.peak_ratio < self.target.peak_ratio {
            loop {
                hi *= 1.25;
                let s = self.trial(hi, amplitude)?;
                if self.peak_ok(&s) {
                    return Ok(s);
                }
                if s.peak_ratio > self.target.peak_ratio {
                    break;
                }
                lo = hi;
            }
        } else {
            loop {
                lo /= 1.25;
                let s = self.trial(lo, amplitude)?;
                if self.peak_ok(&s) {
                    return Ok(s);
                }
                if s.peak_ratio < self.target.peak_ratio {
                    break;
                }
                hi = lo;
            }
        }
        loop {
            let mid = (lo * hi).sqrt();
            let s = self.trial(mid, amplitude)?;
            if self.peak_ok(&s) || hi / lo < 1.0005 {
                return Ok(s);
            }
            if s.peak_ratio < self.target.peak_ratio {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
}

/// Searches `(lambda_base, amplitude)` for `target` and returns the template
/// with the fitted profile and the search record attached.
pub fn calibrate(
    template: &ScenarioConfig,
    topology: &Topology,
    target: CrunchTarget,
    opts: CalibrationOptions,
) -> Result<(ScenarioConfig, CalibrationRecord), SimError> {
    template.validate()?;
    if !(0.0..1.0).contains(&target.peak_ratio) || target.duration_s < 0.0 {
        return Err(SimError::InvalidConfig("peak ratio must lie in [0, 1)".into()));
    }
    let mut trial_cfg = template.clone();
    trial_cfg.days = opts.eval_days;
    trial_cfg.warmup_days = opts.warmup_days;
    trial_cfg.target = Some(target);
    let mut search = Search { template: trial_cfg, topology, target, opts, steps: Vec::new() };

    let fitted = if target.peak_ratio == 0.0 {
        // Degenerate target: a flat profile that never crunches.
        let s = search.trial(template.lambda_max(), 0.0)?;
        if s.peak_ratio > 0.0 {
            return Err(SimError::NoConvergence(search.steps));
        }
        s
    } else {
        let mut guess = template.lambda_max().max(1e-3);
        let (mut lo, mut hi) = (0.0_f64, 0.99_f64);
        let mut amplitude = template.amplitude.clamp(0.05, 0.95);
        loop {
            let s = search.fit_peak(amplitude, guess)?;
            guess = s.lambda_base * search.template.peak_factor(s.amplitude);
            if search.peak_ok(&s) && search.duration_ok(&s) {
                break s;
            }
            // A sharper wave shortens the crunch.
            if s.duration_s > target.duration_s {
                lo = amplitude;
            } else {
                hi = amplitude;
            }
            if hi - lo < 1e-3 {
                return Err(SimError::NoConvergence(search.steps));
            }
            amplitude = 0.5 * (lo + hi);
        }
    };

    let mut cfg = template.clone();
    cfg.lambda_base = fitted.lambda_base;
    cfg.amplitude = fitted.amplitude;
    cfg.target = Some(target);
    let record = CalibrationRecord {
        target,
        options: opts,
        peak_ratio: fitted.peak_ratio,
        duration_s: fitted.duration_s,
        steps: search.steps,
    };
    Ok((cfg, record))
}
