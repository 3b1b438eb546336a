use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::simplex::{self, Outcome, Problem, Row, RowKind};
use super::LpError;
use crate::net::{ConnId, NetworkState, Path, Topology};
use crate::pricing::{Request, RevenueFn};
use crate::provisioner::{prefer_req, CandidateSet, Origin, Quality};
use crate::{Bandwidth, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct LpConn<S> {
    pub id: ConnId,
    pub b_min: Bandwidth,
    pub b_cur: Bandwidth,
    pub revenue: RevenueFn<S>,
    /// Incidence with the path links, in path order.
    pub on_link: Vec<bool>,
}

/// Degradation model for one path and one target bandwidth.
#[derive(Clone, Debug, PartialEq)]
pub struct LpInstance<S> {
    pub path: Path,
    /// Raw capacity of each path link.
    pub capacity: Vec<Bandwidth>,
    pub target: Bandwidth,
    pub horizon: S,
    /// Every live connection crossing at least one path link, by id.
    pub conns: Vec<LpConn<S>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution<S> {
    /// New bandwidth per connection, in Gbps, aligned with `LpInstance::conns`.
    pub y: Vec<S>,
    /// Revenue lost over the horizon, in $.
    pub objective: S,
}

pub fn build_instance<S: Scalar>(
    state: &NetworkState<S>,
    path: &Path,
    target: Bandwidth,
    horizon: S,
) -> LpInstance<S> {
    let ids: BTreeSet<ConnId> = path
        .links()
        .iter()
        .flat_map(|&l| state.connection_ids_on(l).iter().copied())
        .collect();
    let conns = ids
        .into_iter()
        .map(|id| {
            let c = state.connection(id).expect("indexed connection is live");
            LpConn {
                id,
                b_min: c.b_min,
                b_cur: c.b_cur,
                revenue: c.revenue,
                on_link: path.links().iter().map(|l| c.path.links().contains(l)).collect(),
            }
        })
        .collect();
    let capacity = path
        .links()
        .iter()
        .map(|&l| state.capacity(l).expect("path links exist"))
        .collect();
    LpInstance { path: path.clone(), capacity, target, horizon, conns }
}

impl<S: Scalar> LpInstance<S> {
    fn per_gbps(&self) -> Result<Vec<S>, LpError> {
        self.conns
            .iter()
            .map(|c| match c.revenue {
                RevenueFn::Linear { per_gbps } => Ok(per_gbps),
                _ => Err(LpError::NonLinear(c.id)),
            })
            .collect()
    }

    /// Plain-text rendering in CPLEX LP syntax, for debugging.
    pub fn to_lp_format(&self, topo: &Topology) -> String {
        let mut out = String::from("\\ degradation model for path ");
        out.push_str(&self.path.display(topo));
        out.push_str(&format!(", target {}\nMinimize\n obj:", self.target));
        for c in &self.conns {
            let r = c.revenue.per_gbps().to_f64_lossy() * self.horizon.to_f64_lossy();
            out.push_str(&format!(" - {r} y_{}", c.id.0));
        }
        out.push_str("\nSubject To\n");
        for (j, &l) in self.path.links().iter().enumerate() {
            let vars: Vec<String> = self
                .conns
                .iter()
                .filter(|c| c.on_link[j])
                .map(|c| format!("y_{}", c.id.0))
                .collect();
            let lhs = if vars.is_empty() { "0 y_none".to_string() } else { vars.join(" + ") };
            let rhs = (self.capacity[j] - self.target).gbps();
            let _ = writeln!(out, " {}: {lhs} <= {rhs}", topo.link_label(l).replace('-', "_"));
        }
        out.push_str("Bounds\n");
        for c in &self.conns {
            let _ = writeln!(out, " {} <= y_{} <= {}", c.b_min.gbps(), c.id.0, c.b_cur.gbps());
        }
        out.push_str("End\n");
        out
    }
}

/// Solves the instance. `Ok(None)` means even full degradation cannot free the target.
pub fn solve<S: Scalar>(inst: &LpInstance<S>) -> Result<Option<LpSolution<S>>, LpError> {
    let rates = inst.per_gbps()?;
    // Connections with nothing to shed are constants, not variables.
    let vars: Vec<usize> = (0..inst.conns.len())
        .filter(|&i| inst.conns[i].b_cur > inst.conns[i].b_min)
        .collect();
    let mut rows = Vec::new();
    for j in 0..inst.capacity.len() {
        let fixed: Bandwidth = inst
            .conns
            .iter()
            .filter(|c| c.on_link[j] && c.b_cur <= c.b_min)
            .map(|c| c.b_cur)
            .sum();
        let rhs = inst.capacity[j] - inst.target - fixed;
        let coeffs: Vec<S> = vars
            .iter()
            .map(|&i| if inst.conns[i].on_link[j] { S::one() } else { S::zero() })
            .collect();
        if coeffs.iter().all(|c| *c == S::zero()) {
            if rhs < Bandwidth::ZERO {
                return Ok(None);
            }
            continue;
        }
        rows.push(Row { coeffs, kind: RowKind::Le, rhs: rhs.to_scalar() });
    }
    let problem = Problem {
        cost: vars.iter().map(|&i| -rates[i]).collect(),
        lower: vars.iter().map(|&i| inst.conns[i].b_min.to_scalar()).collect(),
        upper: vars.iter().map(|&i| inst.conns[i].b_cur.to_scalar()).collect(),
        rows,
    };
    let x = match simplex::solve(&problem)? {
        Outcome::Infeasible => return Ok(None),
        Outcome::Optimal { x, .. } => x,
    };
    let mut y: Vec<S> = inst.conns.iter().map(|c| c.b_cur.to_scalar()).collect();
    for (k, &i) in vars.iter().enumerate() {
        y[i] = x[k];
    }
    let objective = inst
        .conns
        .iter()
        .zip(&y)
        .zip(&rates)
        .map(|((c, &yi), &r)| r * (c.b_cur.to_scalar::<S>() - yi))
        .sum::<S>()
        * inst.horizon;
    Ok(Some(LpSolution { y, objective }))
}

/// Turns a solution into whole-kbps shed amounts and re-prices them.
/// Shed amounts are rounded up so every capacity row still holds exactly.
pub fn to_candidate<S: Scalar>(
    inst: &LpInstance<S>,
    sol: &LpSolution<S>,
    at_req: bool,
) -> Result<CandidateSet<S>, LpError> {
    let mut members = Vec::new();
    let mut cost = S::zero();
    let mut shed = vec![Bandwidth::ZERO; inst.conns.len()];
    for (i, c) in inst.conns.iter().enumerate() {
        let raw = (c.b_cur.to_scalar::<S>() - sol.y[i]).to_f64_lossy();
        let d = Bandwidth::ceil_gbps(raw.max(0.0), 1e-3).min(c.b_cur - c.b_min);
        if d.is_positive() {
            shed[i] = d;
            members.push((c.id, d));
            cost += (c.revenue.rate(c.b_cur) - c.revenue.rate(c.b_cur - d)) * inst.horizon;
        }
    }
    for j in 0..inst.capacity.len() {
        let load: Bandwidth = inst
            .conns
            .iter()
            .zip(&shed)
            .filter(|(c, _)| c.on_link[j])
            .map(|(c, &d)| c.b_cur - d)
            .sum();
        if load + inst.target > inst.capacity[j] {
            return Err(LpError::Numerical(format!(
                "rounded solution overloads link {j} by {}",
                load + inst.target - inst.capacity[j]
            )));
        }
    }
    Ok(CandidateSet {
        members,
        target: inst.target,
        at_req,
        cost,
        quality: Quality::Candidate,
        origin: Origin::Path(inst.path.clone()),
    })
}

/// Cheapest LP candidate per target over `paths`. Within a side, earlier paths win ties.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LpSides<S> {
    pub min: Option<CandidateSet<S>>,
    pub req: Option<CandidateSet<S>>,
}

pub fn lp_sides<S: Scalar>(
    state: &NetworkState<S>,
    request: &Request<S>,
    paths: &[Path],
    horizon: S,
) -> Result<LpSides<S>, LpError> {
    let mut sides = LpSides { min: None, req: None };
    for path in paths {
        for (at_req, target) in [(true, request.b_req), (false, request.b_min)] {
            let inst = build_instance(state, path, target, horizon);
            let Some(sol) = solve(&inst)? else { continue };
            let cand = to_candidate(&inst, &sol, at_req)?;
            let slot = if at_req { &mut sides.req } else { &mut sides.min };
            if slot.as_ref().is_none_or(|best| cand.cost < best.cost) {
                *slot = Some(cand);
            }
        }
    }
    Ok(sides)
}

/// Best LP candidate over `paths` by normalised cost, compared against `prior`.
/// The prior is kept on ties.
pub fn lp_provisioner<S: Scalar>(
    state: &NetworkState<S>,
    request: &Request<S>,
    paths: &[Path],
    horizon: S,
    prior: Option<CandidateSet<S>>,
) -> Result<Option<CandidateSet<S>>, LpError> {
    let sides = lp_sides(state, request, paths, horizon)?;
    let lp = match (sides.min, sides.req) {
        (Some(min), Some(req)) => Some(if prefer_req(&req, &min) { req } else { min }),
        (min, req) => min.or(req),
    };
    Ok(match (prior, lp) {
        (Some(p), Some(l)) => Some(if l.cost_per_gbps() < p.cost_per_gbps() { l } else { p }),
        (p, l) => p.or(l),
    })
}
