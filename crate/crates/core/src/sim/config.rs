use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::cag::FreePolicy;
use crate::pricing::TrafficMix;

pub const SCENARIO_A_JSON: &str = include_str!("../../data/scenario_a.json");

/// Observable crunch profile a scenario is calibrated to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrunchTarget {
    /// Peak fraction of requests crunched within a detection interval.
    pub peak_ratio: f64,
    /// Daily time above the crunch threshold, in seconds.
    pub duration_s: f64,
}

/// Shape of the daily arrival wave, with `s(t) = sin(2 pi t / day + phase)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArrivalProfile {
    /// `lambda(t) = lambda_base * (1 + amplitude * s(t))`.
    #[default]
    SinusoidalRate,
    /// The mean inter-arrival time follows the sinusoid instead:
    /// `lambda(t) = lambda_base / (1 - amplitude * s(t))`. Peaks are much sharper.
    SinusoidalInterarrival,
}

/// A scheduled capacity override, e.g. a partial link failure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityEvent {
    pub time_s: f64,
    /// Endpoint names of the link.
    pub link: (String, String),
    pub capacity_gbps: f64,
}

fn default_capacity() -> f64 {
    100.0
}
fn default_day() -> f64 {
    86_400.0
}
fn default_phase() -> f64 {
    -FRAC_PI_2
}
fn default_horizon() -> f64 {
    1800.0
}
fn default_bin() -> f64 {
    300.0
}
fn default_threshold() -> f64 {
    0.02
}
fn default_days() -> u32 {
    100
}
fn default_warmup() -> u32 {
    5
}

/// Load profile, run length and decision parameters of one scenario.
///
/// Arrivals follow the daily wave given by `profile`. The default phase puts
/// the peak at mid-day.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default = "default_capacity")]
    pub capacity_gbps: f64,
    #[serde(default = "default_day")]
    pub day_s: f64,
    /// Base arrival rate in requests per second: the daily mean under the
    /// rate profile, the rate at the mean inter-arrival time otherwise.
    pub lambda_base: f64,
    pub amplitude: f64,
    #[serde(default)]
    pub profile: ArrivalProfile,
    #[serde(default = "default_phase")]
    pub phase: f64,
    #[serde(default)]
    pub target: Option<CrunchTarget>,
    #[serde(default = "default_days")]
    pub days: u32,
    #[serde(default = "default_warmup")]
    pub warmup_days: u32,
    #[serde(default)]
    pub seed: u64,
    /// Seconds of revenue a decision weighs; the mean remaining holding time.
    #[serde(default = "default_horizon")]
    pub horizon_s: f64,
    #[serde(default)]
    pub free_policy: FreePolicy,
    /// Crunch detection interval.
    #[serde(default = "default_bin")]
    pub bin_s: f64,
    #[serde(default = "default_threshold")]
    pub crunch_threshold: f64,
    #[serde(default)]
    pub mix: TrafficMix,
    #[serde(default)]
    pub capacity_events: Vec<CapacityEvent>,
}

impl ScenarioConfig {
    /// A template with the default traffic mix and the given load profile.
    pub fn new(name: &str, lambda_base: f64, amplitude: f64) -> Self {
        ScenarioConfig {
            name: name.to_string(),
            capacity_gbps: default_capacity(),
            day_s: default_day(),
            lambda_base,
            amplitude,
            profile: ArrivalProfile::default(),
            phase: default_phase(),
            target: None,
            days: default_days(),
            warmup_days: default_warmup(),
            seed: 0,
            horizon_s: default_horizon(),
            free_policy: FreePolicy::default(),
            bin_s: default_bin(),
            crunch_threshold: default_threshold(),
            mix: TrafficMix::default(),
            capacity_events: Vec::new(),
        }
    }

    /// The bundled, calibrated 5 % / 1 h scenario on the 100 Gbps US backbone.
    pub fn scenario_a() -> Self {
        Self::from_json(SCENARIO_A_JSON).expect("bundled scenario parses")
    }

    pub fn from_json(json: &str) -> Result<Self, SimError> {
        let cfg: ScenarioConfig =
            serde_json::from_str(json).map_err(|e| SimError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &FsPath) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::InvalidConfig(m.to_string()));
        if !(self.lambda_base >= 0.0 && self.lambda_base.is_finite()) {
            return bad("lambda_base must be finite and non-negative");
        }
        if !(0.0..1.0).contains(&self.amplitude) {
            return bad("amplitude must lie in [0, 1)");
        }
        if !(self.capacity_gbps > 0.0) || !(self.day_s > 0.0) || !(self.horizon_s > 0.0) {
            return bad("capacity, day length and horizon must be positive");
        }
        if self.days == 0 {
            return bad("at least one measured day is required");
        }
        if !(self.bin_s > 0.0) || (self.day_s / self.bin_s).fract() != 0.0 {
            return bad("bin_s must divide the day length");
        }
        if !(0.0..1.0).contains(&self.crunch_threshold) {
            return bad("crunch_threshold must lie in [0, 1)");
        }
        self.mix.validate().map_err(|e| SimError::InvalidConfig(e.to_string()))
    }

    /// Arrival rate at time `t`, requests per second.
    pub fn lambda(&self, t: f64) -> f64 {
        let s = (TAU * t / self.day_s + self.phase).sin();
        match self.profile {
            ArrivalProfile::SinusoidalRate => self.lambda_base * (1.0 + self.amplitude * s),
            ArrivalProfile::SinusoidalInterarrival => self.lambda_base / (1.0 - self.amplitude * s),
        }
    }

    /// Upper envelope used for thinning.
    pub fn lambda_max(&self) -> f64 {
        self.lambda_base * self.peak_factor(self.amplitude)
    }

    /// `lambda_max / lambda_base` at the given amplitude.
    pub fn peak_factor(&self, amplitude: f64) -> f64 {
        match self.profile {
            ArrivalProfile::SinusoidalRate => 1.0 + amplitude,
            ArrivalProfile::SinusoidalInterarrival => 1.0 / (1.0 - amplitude),
        }
    }

    /// Closed-form integral of `lambda` over `[a, b]`.
    pub fn expected_arrivals(&self, a: f64, b: f64) -> f64 {
        let w = TAU / self.day_s;
        let x = |t: f64| w * t + self.phase;
        let amp = self.amplitude;
        match self.profile {
            ArrivalProfile::SinusoidalRate => {
                self.lambda_base * ((b - a) - amp / w * (x(b).cos() - x(a).cos()))
            }
            ArrivalProfile::SinusoidalInterarrival => {
                // Antiderivative of 1 / (1 - A sin x), unwrapped across the
                // poles of tan(x / 2) so it stays continuous. The angle is
                // reduced to [-pi, pi) first so both terms agree on the branch.
                let r = (1.0 - amp * amp).sqrt();
                let f = |x: f64| {
                    let mut k = ((x + PI) / TAU).floor();
                    let mut y = x - k * TAU;
                    if y > PI {
                        k += 1.0;
                        y -= TAU;
                    } else if y < -PI {
                        k -= 1.0;
                        y += TAU;
                    }
                    2.0 / r * (((y / 2.0).tan() - amp) / r).atan() + TAU / r * k
                };
                self.lambda_base / w * (f(x(b)) - f(x(a)))
            }
        }
    }

    pub fn bins_per_day(&self) -> usize {
        (self.day_s / self.bin_s).round() as usize
    }

    pub fn total_days(&self) -> u32 {
        self.days + self.warmup_days
    }

    pub fn end_time(&self) -> f64 {
        f64::from(self.total_days()) * self.day_s
    }

    pub fn warmup_end(&self) -> f64 {
        f64::from(self.warmup_days) * self.day_s
    }
}
