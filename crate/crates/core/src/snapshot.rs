//! JSON snapshots of a network state plus an optional pending request.
//!
//! Bandwidths are in Gbps and rates in $/s per Gbps. Connections get ids
//! `1..=n` in file order and the request gets `n + 1`.

use std::path::Path as FsPath;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::net::{ConnId, Connection, NetError, NetworkState, Path, Topology, TopologyFile};
use crate::pricing::{Request, RevenueFn};
use crate::{Bandwidth, Scalar};

/// The six-connection, seven-node crunch scenario used throughout the docs.
/// Node order is chosen so that the lexicographic tie-break picks A-G-F as the
/// shortest A to F route.
pub const WORKED_EXAMPLE_JSON: &str = include_str!("../data/worked_example.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnRecord {
    pub label: String,
    pub path: Vec<String>,
    pub b_req: f64,
    pub b_min: f64,
    pub b_cur: f64,
    pub per_gbps: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RequestRecord {
    pub label: String,
    pub source: String,
    pub destination: String,
    pub b_req: f64,
    pub b_min: f64,
    pub per_gbps: f64,
    pub blocking_cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub topology: TopologyFile,
    /// Seconds over which rates are valued at decision time.
    pub horizon_s: f64,
    pub connections: Vec<ConnRecord>,
    #[serde(default)]
    pub request: Option<RequestRecord>,
}

/// A snapshot materialised into live objects.
#[derive(Clone, Debug)]
pub struct Loaded<S> {
    pub state: NetworkState<S>,
    pub request: Option<Request<S>>,
    pub horizon: S,
}

impl Snapshot {
    pub fn from_json(json: &str) -> Result<Self, NetError> {
        serde_json::from_str(json).map_err(|e| NetError::InvalidTopology(e.to_string()))
    }

    pub fn load(path: &FsPath) -> Result<Self, NetError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| NetError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn worked_example() -> Self {
        Self::from_json(WORKED_EXAMPLE_JSON).expect("bundled fixture parses")
    }

    pub fn materialize<S: Scalar>(&self) -> Result<Loaded<S>, NetError> {
        let topo = Arc::new(Topology::from_file(&self.topology)?);
        let mut state = NetworkState::new(topo.clone());
        for (i, c) in self.connections.iter().enumerate() {
            let names: Vec<&str> = c.path.iter().map(String::as_str).collect();
            let path = Path::from_names(&topo, &names)?;
            let shortest = crate::net::shortest_path(&topo, path.source(), path.destination())
                .map_or(path.hop_len(), |p| p.hop_len());
            state.allocate(Connection {
                id: ConnId(i as u64 + 1),
                label: Some(c.label.clone()),
                path,
                b_req: Bandwidth::from_gbps(c.b_req),
                b_min: Bandwidth::from_gbps(c.b_min),
                b_cur: Bandwidth::from_gbps(c.b_cur),
                class: None,
                revenue: RevenueFn::linear(c.per_gbps),
                shortest_hops: shortest as u32,
                t_start: 0.0,
                t_end: f64::INFINITY,
            })?;
        }
        state.clear_events();
        let request = match &self.request {
            None => None,
            Some(r) => {
                let node = |name: &str| {
                    topo.node_by_name(name)
                        .ok_or_else(|| NetError::InvalidPath(format!("unknown node {name}")))
                };
                let (s, t) = (node(&r.source)?, node(&r.destination)?);
                let hops = crate::net::shortest_path(&topo, s, t).map_or(0, |p| p.hop_len());
                Some(Request {
                    id: ConnId(self.connections.len() as u64 + 1),
                    label: Some(r.label.clone()),
                    source: s,
                    destination: t,
                    b_req: Bandwidth::from_gbps(r.b_req),
                    b_min: Bandwidth::from_gbps(r.b_min),
                    class: None,
                    arrival: 0.0,
                    duration: f64::INFINITY,
                    revenue: RevenueFn::linear(r.per_gbps),
                    blocking_cost: S::lit(r.blocking_cost),
                    shortest_hops: hops as u32,
                })
            }
        };
        Ok(Loaded { state, request, horizon: S::lit(self.horizon_s) })
    }

    /// Captures a live state. Revenue functions are recorded by their per-Gbps rate.
    pub fn capture<S: Scalar>(state: &NetworkState<S>, horizon_s: f64) -> Self {
        let topo = state.topology();
        Snapshot {
            topology: topo.to_file(),
            horizon_s,
            connections: state
                .connections()
                .map(|c| ConnRecord {
                    label: c.name(),
                    path: c.path.names(topo),
                    b_req: c.b_req.gbps(),
                    b_min: c.b_min.gbps(),
                    b_cur: c.b_cur.gbps(),
                    per_gbps: c.revenue.per_gbps().to_f64_lossy(),
                })
                .collect(),
            request: None,
        }
    }
}
