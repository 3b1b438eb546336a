//! Comparison approaches: plain blocking, LP-only and the greedy shortest-path degrader.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::lp::lp_sides;
use crate::net::{ConnId, NetworkState, Path};
use crate::pricing::Request;
use crate::provisioner::{
    profitable_choice, CandidateSet, Decision, DegradedRegistry, Origin, ProvisionError, Quality,
    Stage,
};
use crate::{Bandwidth, Scalar};

/// Which decision procedure handles crunched requests.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Approach {
    Baseline,
    LpOnly { k: usize },
    SpGreedy { k: usize },
    Provisioner { k: usize },
}

impl Approach {
    pub fn k(self) -> usize {
        match self {
            Approach::Baseline => 0,
            Approach::LpOnly { k } | Approach::SpGreedy { k } | Approach::Provisioner { k } => k,
        }
    }
}

/// A named approach plus an optional uniform link-capacity override.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproachPolicy {
    pub name: String,
    pub approach: Approach,
    #[serde(default)]
    pub capacity_gbps: Option<f64>,
}

impl ApproachPolicy {
    pub fn new(name: &str, approach: Approach) -> Self {
        ApproachPolicy { name: name.to_string(), approach, capacity_gbps: None }
    }

    /// The eight approaches compared in the evaluation.
    pub fn standard_set() -> Vec<ApproachPolicy> {
        vec![
            ApproachPolicy::new("baseline-100", Approach::Baseline),
            ApproachPolicy { capacity_gbps: Some(130.0), ..ApproachPolicy::new("baseline-130", Approach::Baseline) },
            ApproachPolicy::new("prov-k1", Approach::Provisioner { k: 1 }),
            ApproachPolicy::new("prov-k10", Approach::Provisioner { k: 10 }),
            ApproachPolicy::new("lp-k1", Approach::LpOnly { k: 1 }),
            ApproachPolicy::new("lp-k10", Approach::LpOnly { k: 10 }),
            ApproachPolicy::new("lp-k100", Approach::LpOnly { k: 100 }),
            ApproachPolicy::new("sp-k10", Approach::SpGreedy { k: 10 }),
        ]
    }
}

impl fmt::Display for ApproachPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Blocks every crunched request.
pub fn baseline_decide<S: Scalar>(_state: &NetworkState<S>, _request: &Request<S>) -> Decision<S> {
    Decision::blocked(Stage::Baseline, None)
}

/// LP over the k paths with no CAG stage, then profitability and execution.
pub fn lp_only_decide<S: Scalar>(
    state: &mut NetworkState<S>,
    registry: &mut DegradedRegistry<S>,
    request: &Request<S>,
    paths: &[Path],
    horizon: S,
) -> Result<Decision<S>, ProvisionError> {
    let sides = lp_sides(state, request, paths, horizon)?;
    decide_sides(state, registry, request, sides.min, sides.req, horizon, Stage::Lp)
}

fn decide_sides<S: Scalar>(
    state: &mut NetworkState<S>,
    registry: &mut DegradedRegistry<S>,
    request: &Request<S>,
    min: Option<CandidateSet<S>>,
    req: Option<CandidateSet<S>>,
    horizon: S,
    stage: Stage,
) -> Result<Decision<S>, ProvisionError> {
    if min.is_none() && req.is_none() {
        return Ok(Decision::blocked(Stage::NoCandidate, None));
    }
    let fallback = min.clone().or_else(|| req.clone());
    match profitable_choice(request, min, req, horizon) {
        Some(set) => crate::provisioner::execute_or_fail(state, registry, request, set, stage),
        None => Ok(Decision::blocked(Stage::Unprofitable, fallback)),
    }
}

/// Greedy degradation set freeing `target` on every link of `path`.
///
/// Link by link, connections are taken cheapest per Gbps first. A connection
/// frees capacity on all its links at once, so it is charged once at the
/// largest amount any link needed from it.
pub fn greedy_path_set<S: Scalar>(
    state: &NetworkState<S>,
    path: &Path,
    target: Bandwidth,
    at_req: bool,
    horizon: S,
) -> Option<CandidateSet<S>> {
    let mut shed: BTreeMap<ConnId, Bandwidth> = BTreeMap::new();
    for &l in path.links() {
        let free = state.free_capacity(l).ok()?;
        let mut need = target.saturating_sub(free);
        let mut on_link: Vec<_> = state.connections_on(l).collect();
        for c in &on_link {
            need = need.saturating_sub(shed.get(&c.id).copied().unwrap_or(Bandwidth::ZERO));
        }
        on_link.sort_by(|a, b| {
            a.revenue
                .per_gbps()
                .partial_cmp(&b.revenue.per_gbps())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.id.cmp(&b.id))
        });
        for c in on_link {
            if !need.is_positive() {
                break;
            }
            let already = shed.get(&c.id).copied().unwrap_or(Bandwidth::ZERO);
            let take = (c.degradable() - already).min(need);
            if take.is_positive() {
                shed.insert(c.id, already + take);
                need -= take;
            }
        }
        if need.is_positive() {
            return None;
        }
    }
    let mut cost = S::zero();
    for (&id, &d) in &shed {
        let c = state.connection(id).ok()?;
        cost += (c.revenue.rate(c.b_cur) - c.revenue.rate(c.b_cur - d)) * horizon;
    }
    Some(CandidateSet {
        members: shed.into_iter().collect(),
        target,
        at_req,
        cost,
        quality: Quality::Candidate,
        origin: Origin::Path(path.clone()),
    })
}

/// Walks the k paths in order and stops at the first one where a greedy set
/// exists for either target; that path alone decides serve or block.
pub fn sp_greedy_decide<S: Scalar>(
    state: &mut NetworkState<S>,
    registry: &mut DegradedRegistry<S>,
    request: &Request<S>,
    paths: &[Path],
    horizon: S,
) -> Result<Decision<S>, ProvisionError> {
    for path in paths {
        let req = greedy_path_set(state, path, request.b_req, true, horizon);
        let min = greedy_path_set(state, path, request.b_min, false, horizon);
        if req.is_some() || min.is_some() {
            return decide_sides(state, registry, request, min, req, horizon, Stage::Greedy);
        }
    }
    Ok(Decision::blocked(Stage::NoCandidate, None))
}
