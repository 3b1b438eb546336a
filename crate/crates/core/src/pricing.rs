//! Service classes, revenue functions, blocking costs and request sampling.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::net::{ConnId, Connection, HopTable, NodeId, Path, Topology};
use crate::{Bandwidth, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PricingError {
    #[error("no route between {0} and {1}")]
    Disconnected(String, String),
    #[error("invalid traffic mix: {0}")]
    InvalidMix(String),
    #[error("topology needs at least two nodes")]
    TooFewNodes,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ServiceClassKind {
    Interactive,
    Elastic,
    Background,
}

impl ServiceClassKind {
    pub const ALL: [ServiceClassKind; 3] = [
        ServiceClassKind::Interactive,
        ServiceClassKind::Elastic,
        ServiceClassKind::Background,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ServiceClassKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ServiceClassKind::Interactive => "interactive",
            ServiceClassKind::Elastic => "elastic",
            ServiceClassKind::Background => "background",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ServiceClass {
    pub kind: ServiceClassKind,
    pub traffic_share: f64,
    /// Requested bandwidth is drawn uniformly from `[bw_lo, bw_hi]` Gbps.
    pub bw_lo: f64,
    pub bw_hi: f64,
    pub degradable_fraction: f64,
    /// Revenue multiplier in $ per Gbps per second, scaled by `sqrt(hops)`.
    pub theta: f64,
    /// Blocking penalty multiplier, same units as `theta`.
    pub blocking_multiplier: f64,
}

/// The request population: class table plus the holding-time law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrafficMix {
    pub classes: Vec<ServiceClass>,
    /// Mean of the exponential holding time, in seconds.
    pub mean_holding_s: f64,
}

impl Default for TrafficMix {
    fn default() -> Self {
        let class = |kind, share, hi, frac, theta, block| ServiceClass {
            kind,
            traffic_share: share,
            bw_lo: 0.1,
            bw_hi: hi,
            degradable_fraction: frac,
            theta,
            blocking_multiplier: block,
        };
        TrafficMix {
            classes: vec![
                class(ServiceClassKind::Interactive, 0.2, 4.0, 0.0, 0.08, 0.04),
                class(ServiceClassKind::Elastic, 0.3, 6.0, 0.333, 0.06, 0.03),
                class(ServiceClassKind::Background, 0.5, 8.0, 0.5, 0.04, 0.0),
            ],
            mean_holding_s: 1800.0,
        }
    }
}

impl TrafficMix {
    pub fn from_json(json: &str) -> Result<Self, PricingError> {
        let mix: TrafficMix =
            serde_json::from_str(json).map_err(|e| PricingError::InvalidMix(e.to_string()))?;
        mix.validate()?;
        Ok(mix)
    }

    pub fn validate(&self) -> Result<(), PricingError> {
        let bad = |m: String| Err(PricingError::InvalidMix(m));
        if self.classes.is_empty() {
            return bad("no classes".into());
        }
        let total: f64 = self.classes.iter().map(|c| c.traffic_share).sum();
        if (total - 1.0).abs() > 1e-9 {
            return bad(format!("shares sum to {total}"));
        }
        for c in &self.classes {
            if c.traffic_share < 0.0 || !(0.0..1.0).contains(&c.degradable_fraction) {
                return bad(format!("{}: share or degradable fraction out of range", c.kind));
            }
            if !(c.bw_lo > 0.0 && c.bw_lo <= c.bw_hi) {
                return bad(format!("{}: bandwidth range [{}, {}]", c.kind, c.bw_lo, c.bw_hi));
            }
            if c.theta < 0.0 || c.blocking_multiplier < 0.0 {
                return bad(format!("{}: negative price", c.kind));
            }
        }
        if !(self.mean_holding_s > 0.0) {
            return bad("mean holding time must be positive".into());
        }
        Ok(())
    }

    pub fn class(&self, kind: ServiceClassKind) -> Option<&ServiceClass> {
        self.classes.iter().find(|c| c.kind == kind)
    }

    /// Inverse-CDF class draw over cumulative traffic shares.
    pub fn class_for(&self, u: f64) -> &ServiceClass {
        let mut acc = 0.0;
        for c in &self.classes {
            acc += c.traffic_share;
            if u < acc {
                return c;
            }
        }
        self.classes.last().expect("validated mix is non-empty")
    }
}

/// Revenue rate as a function of bandwidth, in $ per second.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", bound = "S: Scalar")]
pub enum RevenueFn<S> {
    /// `rate * b`.
    Linear { per_gbps: S },
    /// `rate * b^exponent`; concave for exponents below one. Not accepted by the LP path.
    Power { per_gbps: S, exponent: S },
}

impl<S: Scalar> RevenueFn<S> {
    pub fn linear(per_gbps: f64) -> Self {
        RevenueFn::Linear { per_gbps: S::lit(per_gbps) }
    }

    pub fn rate(&self, bw: Bandwidth) -> S {
        let b: S = bw.to_scalar();
        match *self {
            RevenueFn::Linear { per_gbps } => per_gbps * b,
            RevenueFn::Power { per_gbps, exponent } => {
                if b <= S::zero() {
                    S::zero()
                } else {
                    per_gbps * b.powf(exponent)
                }
            }
        }
    }

    /// Nominal $/s per Gbps, used for ordering and heuristics.
    pub fn per_gbps(&self) -> S {
        match *self {
            RevenueFn::Linear { per_gbps } | RevenueFn::Power { per_gbps, .. } => per_gbps,
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, RevenueFn::Linear { .. })
    }
}

/// Revenue rate of `conn` at bandwidth `bw`, in $/s.
pub fn revenue_rate<S: Scalar>(conn: &Connection<S>, bw: Bandwidth) -> S {
    conn.revenue.rate(bw)
}

/// Revenue forgone over `horizon` seconds by running `conn` at `b` instead of its current bandwidth.
pub fn lost_revenue<S: Scalar>(conn: &Connection<S>, b: Bandwidth, horizon: S) -> S {
    let r = &conn.revenue;
    (r.rate(conn.b_cur) - r.rate(b)).max(S::zero()) * horizon
}

/// A request awaiting admission. Its `duration` is known to the simulator only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Request<S> {
    pub id: ConnId,
    pub label: Option<String>,
    pub source: NodeId,
    pub destination: NodeId,
    pub b_req: Bandwidth,
    pub b_min: Bandwidth,
    pub class: Option<ServiceClassKind>,
    pub arrival: f64,
    pub duration: f64,
    pub revenue: RevenueFn<S>,
    /// Penalty paid if the request is blocked, in $.
    pub blocking_cost: S,
    pub shortest_hops: u32,
}

impl<S: Scalar> Request<S> {
    pub fn into_connection(&self, path: Path, bw: Bandwidth) -> Connection<S> {
        Connection {
            id: self.id,
            label: self.label.clone(),
            path,
            b_req: self.b_req,
            b_min: self.b_min,
            b_cur: bw,
            class: self.class,
            revenue: self.revenue,
            shortest_hops: self.shortest_hops,
            t_start: self.arrival,
            t_end: self.arrival + self.duration,
        }
    }

    pub fn name(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.id.to_string())
    }
}

/// Per-Gbps revenue rate for a class on a pair whose shortest route has `hops` links.
pub fn unit_rate(class: &ServiceClass, hops: u32) -> f64 {
    class.theta * (hops as f64).sqrt()
}

/// Blocking cost: minimum bandwidth priced at the class penalty over the expected holding time.
pub fn blocking_cost(class: &ServiceClass, b_min: Bandwidth, hops: u32, mean_holding_s: f64) -> f64 {
    b_min.gbps() * class.blocking_multiplier * (hops as f64).sqrt() * mean_holding_s
}

/// Draws one request: class by share, bandwidth uniform in the class range,
/// ordered pair uniform over distinct nodes, exponential holding time.
pub fn sample_request<S: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    id: ConnId,
    time: f64,
    mix: &TrafficMix,
    topology: &Topology,
    hops: &HopTable,
) -> Result<Request<S>, PricingError> {
    let n = topology.node_count();
    if n < 2 {
        return Err(PricingError::TooFewNodes);
    }
    let class = mix.class_for(rng.random::<f64>());
    let b_req = Bandwidth::from_gbps(rng.random_range(class.bw_lo..=class.bw_hi));
    let s = rng.random_range(0..n);
    let mut t = rng.random_range(0..n - 1);
    if t >= s {
        t += 1;
    }
    let (s, t) = (NodeId(s as u32), NodeId(t as u32));
    let duration = Exp::new(1.0 / mix.mean_holding_s)
        .map_err(|e| PricingError::InvalidMix(e.to_string()))?
        .sample(rng);
    let h = hops.hops(s, t).ok_or_else(|| {
        PricingError::Disconnected(topology.name(s).to_string(), topology.name(t).to_string())
    })?;
    let b_min = b_req.scale(1.0 - class.degradable_fraction);
    Ok(Request {
        id,
        label: None,
        source: s,
        destination: t,
        b_req,
        b_min,
        class: Some(class.kind),
        arrival: time,
        duration,
        revenue: RevenueFn::linear(unit_rate(class, h)),
        blocking_cost: S::lit(blocking_cost(class, b_min, h, mix.mean_holding_s)),
        shortest_hops: h,
    })
}
