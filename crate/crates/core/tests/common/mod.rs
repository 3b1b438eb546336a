//! Random small networks shared by the property and oracle tests.
#![allow(dead_code)]

pub mod fuzz;
pub mod oracle;

use std::collections::BTreeSet;
use std::sync::Arc;

use crunch_core::net::{ConnId, Connection, Link, LinkId, NetworkState, NodeId, Path, Topology};
use crunch_core::pricing::{Request, RevenueFn};
use crunch_core::Bandwidth;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gbps(x: f64) -> Bandwidth {
    Bandwidth::from_gbps(x)
}

/// Whole or half Gbps amounts in `[lo, hi]`.
pub fn halves(rng: &mut impl Rng, lo: f64, hi: f64) -> Bandwidth {
    let steps = ((hi - lo) * 2.0).round() as u32;
    gbps(lo + f64::from(rng.random_range(0..=steps)) * 0.5)
}

/// A connected graph: a random spanning tree plus extra distinct edges.
pub fn topology(rng: &mut impl Rng, nodes: usize, max_links: usize, capacity: f64) -> Topology {
    let names: Vec<String> = (0..nodes).map(|i| format!("n{i}")).collect();
    let mut edges: BTreeSet<(u32, u32)> = BTreeSet::new();
    let mut order: Vec<u32> = (0..nodes as u32).collect();
    order.shuffle(rng);
    for i in 1..nodes {
        let parent = order[rng.random_range(0..i)];
        let (a, b) = (parent.min(order[i]), parent.max(order[i]));
        edges.insert((a, b));
    }
    let max_links = max_links.min(nodes * (nodes - 1) / 2).max(nodes - 1);
    let target = rng.random_range(nodes - 1..=max_links);
    while edges.len() < target {
        let a = rng.random_range(0..nodes as u32);
        let b = rng.random_range(0..nodes as u32);
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    let links = edges
        .into_iter()
        .map(|(a, b)| Link { a: NodeId(a), b: NodeId(b), capacity: gbps(capacity) })
        .collect();
    Topology::new(names, links).expect("valid random topology")
}

/// Every loopless path from `s` to `t`.
pub fn simple_paths(topo: &Topology, s: NodeId, t: NodeId) -> Vec<Path> {
    fn dfs(topo: &Topology, t: NodeId, stack: &mut Vec<NodeId>, out: &mut Vec<Path>) {
        let u = *stack.last().expect("non-empty");
        if u == t {
            out.push(Path::from_nodes(topo, stack.clone()).expect("simple path"));
            return;
        }
        for &(v, _) in topo.neighbors(u) {
            if !stack.contains(&v) {
                stack.push(v);
                dfs(topo, t, stack, out);
                stack.pop();
            }
        }
    }
    let mut out = Vec::new();
    if s != t {
        dfs(topo, t, &mut vec![s], &mut out);
    }
    out
}

pub fn random_pair(rng: &mut impl Rng, topo: &Topology) -> (NodeId, NodeId) {
    let n = topo.node_count() as u32;
    let s = rng.random_range(0..n);
    let mut t = rng.random_range(0..n - 1);
    if t >= s {
        t += 1;
    }
    (NodeId(s), NodeId(t))
}

pub fn connection(id: u64, path: Path, b_req: Bandwidth, b_min: Bandwidth, b_cur: Bandwidth, rate: f64) -> Connection<f64> {
    let hops = path.hop_len() as u32;
    Connection {
        id: ConnId(id),
        label: None,
        path,
        b_req,
        b_min,
        b_cur,
        class: None,
        revenue: RevenueFn::linear(rate),
        shortest_hops: hops,
        t_start: 0.0,
        t_end: f64::INFINITY,
    }
}

pub struct Fill {
    pub connections: usize,
    /// At most one degradable connection per link.
    pub one_degradable_per_link: bool,
    pub max_bw: f64,
}

/// Allocates up to `fill.connections` random connections on random simple paths.
/// Ids start at 1. Rates are whole $ per Gbps in 1..=9.
pub fn populate(rng: &mut impl Rng, state: &mut NetworkState<f64>, fill: &Fill) {
    let topo = state.topology_arc().clone();
    let mut degradable_links: BTreeSet<LinkId> = BTreeSet::new();
    let mut next = 1;
    for _ in 0..fill.connections * 4 {
        if state.connection_count() >= fill.connections {
            break;
        }
        let (s, t) = random_pair(rng, &topo);
        let paths = simple_paths(&topo, s, t);
        let path = paths[rng.random_range(0..paths.len())].clone();
        let b_req = halves(rng, 0.5, fill.max_bw);
        let b_cur = b_req;
        let mut b_min = halves(rng, 0.5, b_req.gbps());
        let clash = path.links().iter().any(|l| degradable_links.contains(l));
        if fill.one_degradable_per_link && clash {
            b_min = b_req;
        }
        let rate = f64::from(rng.random_range(1..=9));
        let c = connection(next, path.clone(), b_req, b_min, b_cur, rate);
        if state.allocate(c).is_ok() {
            next += 1;
            if b_min < b_req {
                degradable_links.extend(path.links().iter().copied());
            }
        }
    }
    state.clear_events();
}

pub fn state(topo: Topology) -> NetworkState<f64> {
    NetworkState::new(Arc::new(topo))
}

/// A request with linear revenue, whole-Gbps bandwidths and the given endpoints.
pub fn request(id: u64, s: NodeId, t: NodeId, b_min: Bandwidth, b_req: Bandwidth, rate: f64, blocking: f64) -> Request<f64> {
    Request {
        id: ConnId(id),
        label: None,
        source: s,
        destination: t,
        b_req,
        b_min,
        class: None,
        arrival: 0.0,
        duration: 1.0,
        revenue: RevenueFn::linear(rate),
        blocking_cost: blocking,
        shortest_hops: 1,
    }
}
