use super::{
    execute, prefer_req, profitable, profitable_choice, CandidateSet, Decision, DegradedRegistry,
    Origin, Outcome, ProvisionError, Quality, Stage,
};
use crate::cag::{Cag, CagPath, CagView, WeightPolicy};
use crate::lp::{lp_sides, LpError, LpSides};
use crate::net::{NetworkState, Path};
use crate::pricing::Request;
use crate::Scalar;

/// Result of the CAG stage.
#[derive(Clone, Debug, PartialEq)]
pub enum CagOutcome<S> {
    /// Nothing degradable connects the endpoints.
    Block,
    Good(CandidateSet<S>),
    Candidate(CandidateSet<S>),
    /// Neither capacitated view has a path.
    None,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecisionContext<S> {
    pub weights: WeightPolicy<S>,
    /// Run the LP stage when revenues are linear.
    pub lp_enabled: bool,
}

impl<S: Scalar> DecisionContext<S> {
    pub fn horizon(&self) -> S {
        self.weights.horizon
    }
}

fn to_set<S: Scalar>(p: CagPath<S>, request: &Request<S>, at_req: bool, good: bool) -> CandidateSet<S> {
    CandidateSet {
        members: p.members,
        target: if at_req { request.b_req } else { request.b_min },
        at_req,
        cost: p.true_cost,
        quality: if good { Quality::Good } else { Quality::Candidate },
        origin: Origin::Cag(p.vertices),
    }
}

/// Four CAG queries, a normalised-cost choice between the capacitated results,
/// and a check against the relaxed lower bound.
pub fn cag_provisioner<S: Scalar>(
    cag: &Cag<S>,
    request: &Request<S>,
    weights: &WeightPolicy<S>,
) -> CagOutcome<S> {
    let (s, t) = (request.source, request.destination);
    let (b_min, b_req) = (request.b_min, request.b_req);
    let Some(relaxed_min) = cag.min_cost_path(s, t, CagView::RelaxedMin, b_min, weights) else {
        return CagOutcome::Block;
    };
    let relaxed_req = cag.min_cost_path(s, t, CagView::RelaxedReq, b_req, weights);
    let cap_min = cag.min_cost_path(s, t, CagView::CapacitatedMin, b_min, weights);
    let cap_req = cag.min_cost_path(s, t, CagView::CapacitatedReq, b_req, weights);

    let take_req = match (&cap_min, &cap_req) {
        (None, None) => return CagOutcome::None,
        (Some(_), None) => false,
        (None, Some(_)) => true,
        (Some(m), Some(r)) => {
            r.true_cost * b_min.to_scalar::<S>() <= m.true_cost * b_req.to_scalar::<S>()
        }
    };
    let (chosen, bound) = if take_req {
        (cap_req.expect("checked"), relaxed_req.expect("relaxed view contains capacitated"))
    } else {
        (cap_min.expect("checked"), relaxed_min)
    };
    let good = chosen.weighted_cost.approx_eq(bound.weighted_cost, S::lit(1e-9));
    let set = to_set(chosen, request, take_req, good);
    if good {
        CagOutcome::Good(set)
    } else {
        CagOutcome::Candidate(set)
    }
}

/// Keeps `prior` unless the LP set on the same side is strictly cheaper.
fn merge<S: Scalar>(lp: Option<CandidateSet<S>>, prior: Option<&CandidateSet<S>>) -> Option<CandidateSet<S>> {
    match (lp, prior) {
        (Some(l), Some(p)) => Some(if l.cost < p.cost { l } else { p.clone() }),
        (l, p) => l.or_else(|| p.cloned()),
    }
}

pub(crate) fn execute_or_fail<S: Scalar>(
    state: &mut NetworkState<S>,
    registry: &mut DegradedRegistry<S>,
    request: &Request<S>,
    set: CandidateSet<S>,
    stage: Stage,
) -> Result<Decision<S>, ProvisionError> {
    match execute(state, registry, request, &set) {
        Ok((conn, path)) => Ok(Decision {
            outcome: if set.target == request.b_req {
                Outcome::ServedAtReq
            } else {
                Outcome::ServedAtMin
            },
            stage,
            set: Some(set),
            path: Some(path),
            conn: Some(conn),
        }),
        Err(ProvisionError::NoPhysicalPath(_)) => Ok(Decision::blocked(Stage::ExecutionFailed, Some(set))),
        Err(e) => Err(e),
    }
}

/// Full pipeline for one crunched request. `paths` are the k shortest routes
/// used by the LP stage. The CAG is synced with `state` first.
pub fn provision<S: Scalar>(
    state: &mut NetworkState<S>,
    cag: &mut Cag<S>,
    registry: &mut DegradedRegistry<S>,
    request: &Request<S>,
    paths: &[Path],
    ctx: &DecisionContext<S>,
) -> Result<Decision<S>, ProvisionError> {
    cag.sync(state)?;
    let horizon = ctx.horizon();
    let prior = match cag_provisioner(cag, request, &ctx.weights) {
        CagOutcome::Block => return Ok(Decision::blocked(Stage::NoDegradation, None)),
        CagOutcome::Good(set) => {
            return if profitable(request, &set, horizon) {
                execute_or_fail(state, registry, request, set, Stage::CagGood)
            } else {
                Ok(Decision::blocked(Stage::Unprofitable, Some(set)))
            };
        }
        CagOutcome::Candidate(set) => Some(set),
        CagOutcome::None => None,
    };

    let sides = if ctx.lp_enabled && request.revenue.is_linear() {
        match lp_sides(state, request, paths, horizon) {
            Ok(sides) => Some(sides),
            Err(LpError::NonLinear(_)) => None,
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };

    let Some(LpSides { min, req }) = sides else {
        // No LP stage: a CAG candidate is final.
        return match prior {
            Some(set) if profitable(request, &set, horizon) => {
                execute_or_fail(state, registry, request, set, Stage::CagCandidate)
            }
            Some(set) => Ok(Decision::blocked(Stage::Unprofitable, Some(set))),
            None => Ok(Decision::blocked(Stage::NoCandidate, None)),
        };
    };

    let prior_req = prior.as_ref().filter(|p| p.at_req);
    let prior_min = prior.as_ref().filter(|p| !p.at_req);
    let min = merge(min, prior_min);
    let req = merge(req, prior_req);
    if min.is_none() && req.is_none() {
        return Ok(Decision::blocked(Stage::NoCandidate, None));
    }
    let fallback = match (&min, &req) {
        (Some(m), Some(r)) => Some(if prefer_req(r, m) { r.clone() } else { m.clone() }),
        (m, r) => m.clone().or_else(|| r.clone()),
    };
    match profitable_choice(request, min, req, horizon) {
        Some(set) => {
            let stage = match set.origin {
                Origin::Cag(_) => Stage::CagCandidate,
                Origin::Path(_) => Stage::Lp,
            };
            execute_or_fail(state, registry, request, set, stage)
        }
        None => Ok(Decision::blocked(Stage::Unprofitable, fallback)),
    }
}
