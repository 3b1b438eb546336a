//! The crunch decision pipeline: CAG search, LP fallback, profitability and execution.

mod algorithm;
mod execute;
mod registry;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cag::{CagError, VertexId};
use crate::lp::LpError;
use crate::net::{ConnId, NetError, Path, Topology};
use crate::pricing::{Request, ServiceClassKind};
use crate::{Bandwidth, Scalar};

pub(crate) use algorithm::execute_or_fail;
pub use algorithm::{cag_provisioner, provision, CagOutcome, DecisionContext};
pub use execute::{execute, on_departure};
pub use registry::DegradedRegistry;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProvisionError {
    #[error("no physical path with {0} free after throttling")]
    NoPhysicalPath(Bandwidth),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Cag(#[from] CagError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quality {
    /// Capacitated cost matched the relaxed lower bound.
    Good,
    Candidate,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Origin {
    Cag(Vec<VertexId>),
    Path(Path),
}

/// Connections to throttle (with shed amounts) so a request fits at `target`.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateSet<S> {
    pub members: Vec<(ConnId, Bandwidth)>,
    pub target: Bandwidth,
    pub at_req: bool,
    /// Lost revenue over the decision horizon, in $.
    pub cost: S,
    pub quality: Quality,
    pub origin: Origin,
}

impl<S: Scalar> CandidateSet<S> {
    pub fn cost_per_gbps(&self) -> S {
        self.cost / self.target.to_scalar()
    }
}

/// Normalised-cost rule between a req-side and a min-side set; ties go to req.
pub fn prefer_req<S: Scalar>(req: &CandidateSet<S>, min: &CandidateSet<S>) -> bool {
    req.cost * min.target.to_scalar::<S>() <= min.cost * req.target.to_scalar::<S>()
}

/// Revenue gained by serving `request` at `bw` over the horizon.
pub fn serving_gain<S: Scalar>(request: &Request<S>, bw: Bandwidth, horizon: S) -> S {
    request.revenue.rate(bw) * horizon
}

/// Serving pays off when its revenue plus the avoided penalty covers the lost revenue.
pub fn profitable<S: Scalar>(request: &Request<S>, set: &CandidateSet<S>, horizon: S) -> bool {
    serving_gain(request, set.target, horizon) + request.blocking_cost >= set.cost
}

/// Applies the profitability test to each side and, when both pass, the
/// normalised-cost rule.
pub fn profitable_choice<S: Scalar>(
    request: &Request<S>,
    min: Option<CandidateSet<S>>,
    req: Option<CandidateSet<S>>,
    horizon: S,
) -> Option<CandidateSet<S>> {
    let min = min.filter(|s| profitable(request, s, horizon));
    let req = req.filter(|s| profitable(request, s, horizon));
    match (min, req) {
        (Some(m), Some(r)) => Some(if prefer_req(&r, &m) { r } else { m }),
        (m, r) => m.or(r),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    ServedAtReq,
    ServedAtMin,
    Blocked,
}

/// Which branch produced the outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    CagGood,
    CagCandidate,
    Lp,
    Greedy,
    NoDegradation,
    NoCandidate,
    Unprofitable,
    Baseline,
    ExecutionFailed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decision<S> {
    pub outcome: Outcome,
    pub stage: Stage,
    pub set: Option<CandidateSet<S>>,
    pub path: Option<Path>,
    pub conn: Option<ConnId>,
}

impl<S> Decision<S> {
    pub fn blocked(stage: Stage, set: Option<CandidateSet<S>>) -> Self {
        Decision { outcome: Outcome::Blocked, stage, set, path: None, conn: None }
    }

    pub fn served(&self) -> bool {
        self.outcome != Outcome::Blocked
    }
}

/// One line of the decision log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub request: ConnId,
    pub time: f64,
    pub policy: String,
    pub class: Option<ServiceClassKind>,
    pub outcome: Outcome,
    pub stage: Stage,
    pub bandwidth_gbps: f64,
    pub degraded: Vec<(ConnId, f64)>,
    pub path: Option<Vec<String>>,
    pub revenue_gain: f64,
    pub degradation_cost: f64,
    pub blocking_cost: f64,
    pub wall_time_us: f64,
}

impl DecisionRecord {
    pub fn new<S: Scalar>(
        decision: &Decision<S>,
        request: &Request<S>,
        topo: &Topology,
        policy: &str,
        horizon: S,
        wall_time_us: f64,
    ) -> Self {
        let served = decision.served();
        let set = decision.set.as_ref().filter(|_| served);
        let bw = set.map_or(Bandwidth::ZERO, |s| s.target);
        DecisionRecord {
            request: request.id,
            time: request.arrival,
            policy: policy.to_string(),
            class: request.class,
            outcome: decision.outcome,
            stage: decision.stage,
            bandwidth_gbps: bw.gbps(),
            degraded: set.map_or_else(Vec::new, |s| {
                s.members.iter().map(|&(id, d)| (id, d.gbps())).collect()
            }),
            path: decision.path.as_ref().map(|p| p.names(topo)),
            revenue_gain: if served {
                serving_gain(request, bw, horizon).to_f64_lossy()
            } else {
                0.0
            },
            degradation_cost: set.map_or(0.0, |s| s.cost.to_f64_lossy()),
            blocking_cost: if served { 0.0 } else { request.blocking_cost.to_f64_lossy() },
            wall_time_us,
        }
    }
}
