//! Day-cycle simulation of a loaded network, calibration of scenarios to a
//! target crunch profile, and paired comparison of provisioning approaches.

mod arrivals;
mod calibrate;
mod compare;
mod config;
mod engine;
mod metrics;
mod windows;

use thiserror::Error;

use crate::cag::CagError;
use crate::net::NetError;
use crate::provisioner::ProvisionError;

pub use arrivals::{ArrivalTimes, RequestStream};
pub use calibrate::{calibrate, measure_profile, CalibrationOptions, CalibrationRecord, CalibrationStep};
pub use compare::{compare, paired_difference, Comparison, CompareOptions, MeanCi, PolicySummary};
pub use config::{ArrivalProfile, CapacityEvent, CrunchTarget, ScenarioConfig, SCENARIO_A_JSON};
pub use engine::{run, RunOptions, RunOutput};
pub use metrics::{Bin, DayMetrics, DecisionTiming, MetricsFrame, CLASS_COUNT};
pub use windows::{crunch_profile, detect_crunch_windows, CrunchWindow, IntervalCounts};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidConfig(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Cag(#[from] CagError),
    #[error(transparent)]
    Provision(#[from] ProvisionError),
    #[error("comparison needs a baseline policy at the scenario capacity")]
    NoBaseline,
    #[error("calibration did not converge after {} steps", .0.len())]
    NoConvergence(Vec<CalibrationStep>),
}
