//! Connection adjacency graph.
//!
//! One vertex per degradable connection plus one dummy per link with spare
//! capacity. Two vertices are adjacent when their paths share a physical node.
//! Terminals are not stored: a query enters at every vertex touching the source
//! and leaves at every vertex touching the destination.
//!
//! Adjacency is kept implicitly as per-node membership lists. Queries run
//! Dijkstra on a hub graph (node hub to vertex costs the vertex weight, vertex to
//! node hub is free), which is equivalent to the explicit vertex graph.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::net::{ConnId, Connection, LinkId, NetEvent, NetworkState, NodeId};
use crate::pricing::RevenueFn;
use crate::{Bandwidth, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CagError {
    #[error("event references unknown connection {0}")]
    UnknownConnection(ConnId),
    #[error("event references unknown link {0}")]
    UnknownLink(LinkId),
    #[error("unknown view '{0}' (expected relaxed-min, relaxed-req, cap-min or cap-req)")]
    UnknownView(String),
}

/// Vertex key. Connections sort before free-link dummies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VertexId {
    Conn(ConnId),
    Free(LinkId),
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexId::Conn(c) => write!(f, "{c}"),
            VertexId::Free(l) => write!(f, "free-{l}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Vertex<S> {
    pub label: String,
    /// Physical nodes on the represented path, sorted.
    pub nodes: Vec<NodeId>,
    /// Links of the represented path.
    pub links: Vec<LinkId>,
    /// `B_cur - B_min` for connections, free capacity for dummies.
    pub degradable: Bandwidth,
    pub b_cur: Bandwidth,
    /// `None` marks a dummy.
    pub revenue: Option<RevenueFn<S>>,
}

impl<S: Scalar> Vertex<S> {
    pub fn is_dummy(&self) -> bool {
        self.revenue.is_none()
    }

    /// Amount a real vertex must shed so that each of its links has `bw` free,
    /// given `f_min`, the smallest free capacity on those links. Free capacity
    /// covers what it can; the rest comes from the connection, never more than
    /// its degradable bandwidth. Dummies shed nothing.
    pub fn shed(&self, f_min: Bandwidth, bw: Bandwidth) -> Bandwidth {
        if self.is_dummy() {
            return Bandwidth::ZERO;
        }
        bw.saturating_sub(f_min).min(self.degradable)
    }

    /// Lost revenue of shedding `shed(f_min, bw)` over `horizon`.
    pub fn true_cost(&self, f_min: Bandwidth, bw: Bandwidth, horizon: S) -> S {
        match &self.revenue {
            None => S::zero(),
            Some(r) => {
                let delta = self.shed(f_min, bw);
                (r.rate(self.b_cur) - r.rate(self.b_cur - delta)).max(S::zero()) * horizon
            }
        }
    }
}

/// How dummy free-link vertices are weighted during search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FreePolicy {
    /// Dummies cost nothing.
    Zero,
    /// Dummies are priced at the midpoint of the cheapest and dearest per-Gbps
    /// rate among live degradable connections.
    #[default]
    MeanRate,
}

/// Search weights: dummy policy plus the horizon that turns $/s into $.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightPolicy<S> {
    pub free: FreePolicy,
    pub horizon: S,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CagView {
    RelaxedMin,
    RelaxedReq,
    CapacitatedMin,
    CapacitatedReq,
}

impl CagView {
    /// Capacitated views drop vertices with `v_bw < B`.
    pub fn is_capacitated(self) -> bool {
        matches!(self, CagView::CapacitatedMin | CagView::CapacitatedReq)
    }

    pub fn is_req(self) -> bool {
        matches!(self, CagView::RelaxedReq | CagView::CapacitatedReq)
    }

    /// Picks `b_min` or `b_req` according to the view.
    pub fn target(self, b_min: Bandwidth, b_req: Bandwidth) -> Bandwidth {
        if self.is_req() {
            b_req
        } else {
            b_min
        }
    }
}

impl FromStr for CagView {
    type Err = CagError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "relaxed-min" => Ok(CagView::RelaxedMin),
            "relaxed-req" => Ok(CagView::RelaxedReq),
            "cap-min" | "capacitated-min" => Ok(CagView::CapacitatedMin),
            "cap-req" | "capacitated-req" => Ok(CagView::CapacitatedReq),
            other => Err(CagError::UnknownView(other.to_string())),
        }
    }
}

/// Result of a terminal-to-terminal query.
#[derive(Clone, Debug, PartialEq)]
pub struct CagPath<S> {
    pub vertices: Vec<VertexId>,
    /// Cost under the search weights (dummy policy applied).
    pub weighted_cost: S,
    /// Lost revenue of the real members; dummies are free.
    pub true_cost: S,
    /// Real members with a positive shed amount.
    pub members: Vec<(ConnId, Bandwidth)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cag<S> {
    vertices: BTreeMap<VertexId, Vertex<S>>,
    by_node: Vec<BTreeSet<VertexId>>,
    live: BTreeSet<ConnId>,
    /// Mirror of per-link free capacity, so `f_min` is derived at query time.
    free: Vec<Bandwidth>,
}

impl<S: Scalar> Cag<S> {
    pub fn build(state: &NetworkState<S>) -> Self {
        let mut cag = Cag {
            vertices: BTreeMap::new(),
            by_node: vec![BTreeSet::new(); state.topology().node_count()],
            live: state.connections().map(|c| c.id).collect(),
            free: state
                .topology()
                .link_ids()
                .map(|l| state.free_capacity(l).expect("own link"))
                .collect(),
        };
        for c in state.connections() {
            cag.refresh_conn(state, c.id);
        }
        for l in state.topology().link_ids() {
            cag.refresh_dummy(state, l);
        }
        cag
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex(&self, id: VertexId) -> Option<&Vertex<S>> {
        self.vertices.get(&id)
    }

    fn f_min_of(&self, v: &Vertex<S>) -> Bandwidth {
        if v.is_dummy() {
            return Bandwidth::ZERO;
        }
        v.links.iter().map(|l| self.free[l.index()]).min().unwrap_or(Bandwidth::ZERO)
    }

    /// Smallest free capacity over the vertex's links; zero for dummies.
    pub fn f_min(&self, id: VertexId) -> Option<Bandwidth> {
        self.vertices.get(&id).map(|v| self.f_min_of(v))
    }

    /// `f_min + degradable`: the most bandwidth the vertex can open on all its links.
    pub fn v_bw(&self, id: VertexId) -> Option<Bandwidth> {
        self.vertices.get(&id).map(|v| self.f_min_of(v) + v.degradable)
    }

    pub fn vertices(&self) -> impl Iterator<Item = (VertexId, &Vertex<S>)> {
        self.vertices.iter().map(|(k, v)| (*k, v))
    }

    /// Vertices whose path touches `n`.
    pub fn touching(&self, n: NodeId) -> &BTreeSet<VertexId> {
        &self.by_node[n.index()]
    }

    /// Directed edge set: both directions for every pair sharing a node.
    pub fn edges(&self) -> BTreeSet<(VertexId, VertexId)> {
        let mut out = BTreeSet::new();
        for members in &self.by_node {
            for &a in members {
                for &b in members {
                    if a != b {
                        out.insert((a, b));
                    }
                }
            }
        }
        out
    }

    fn insert(&mut self, id: VertexId, v: Vertex<S>) {
        for n in &v.nodes {
            self.by_node[n.index()].insert(id);
        }
        self.vertices.insert(id, v);
    }

    fn remove(&mut self, id: VertexId) {
        if let Some(v) = self.vertices.remove(&id) {
            for n in &v.nodes {
                self.by_node[n.index()].remove(&id);
            }
        }
    }

    fn conn_vertex(c: &Connection<S>) -> Vertex<S> {
        let mut nodes = c.path.nodes().to_vec();
        nodes.sort_unstable();
        Vertex {
            label: c.name(),
            nodes,
            links: c.path.links().to_vec(),
            degradable: c.degradable(),
            b_cur: c.b_cur,
            revenue: Some(c.revenue),
        }
    }

    fn refresh_conn(&mut self, state: &NetworkState<S>, id: ConnId) {
        let key = VertexId::Conn(id);
        match state.connection(id) {
            Ok(c) if c.degradable().is_positive() => {
                if let Some(v) = self.vertices.get_mut(&key) {
                    // Paths never change, so only the bandwidth fields need refreshing.
                    v.degradable = c.degradable();
                    v.b_cur = c.b_cur;
                    v.revenue = Some(c.revenue);
                } else {
                    self.insert(key, Self::conn_vertex(c));
                }
            }
            _ => self.remove(key),
        }
    }

    fn refresh_dummy(&mut self, state: &NetworkState<S>, l: LinkId) {
        let key = VertexId::Free(l);
        let free = state.free_capacity(l).unwrap_or(Bandwidth::ZERO);
        self.free[l.index()] = free;
        if let Some(v) = self.vertices.get_mut(&key) {
            if free.is_positive() {
                v.degradable = free;
                v.b_cur = free;
                return;
            }
        }
        self.remove(key);
        if free.is_positive() {
            let topo = state.topology();
            let link = &topo.links()[l.index()];
            let mut nodes = vec![link.a, link.b];
            nodes.sort_unstable();
            let v = Vertex {
                label: format!("Free({},{})", topo.name(link.a), topo.name(link.b)),
                nodes,
                links: vec![l],
                degradable: free,
                b_cur: free,
                revenue: None,
            };
            self.insert(key, v);
        }
    }

    /// Brings the graph in line with `state` for one change notification.
    pub fn apply_event(&mut self, state: &NetworkState<S>, event: NetEvent) -> Result<(), CagError> {
        match event {
            NetEvent::ConnectionAdded(id) => {
                self.live.insert(id);
                self.refresh_conn(state, id);
            }
            NetEvent::ConnectionRemoved(id) => {
                if !self.live.remove(&id) {
                    return Err(CagError::UnknownConnection(id));
                }
                self.refresh_conn(state, id);
            }
            NetEvent::BandwidthChanged(id) => {
                if !self.live.contains(&id) {
                    return Err(CagError::UnknownConnection(id));
                }
                self.refresh_conn(state, id);
            }
            NetEvent::FreeCapacityChanged(l) => {
                if l.index() >= state.topology().link_count() {
                    return Err(CagError::UnknownLink(l));
                }
                self.refresh_dummy(state, l);
            }
        }
        Ok(())
    }

    /// Drains the state's pending events into the graph.
    pub fn sync(&mut self, state: &mut NetworkState<S>) -> Result<(), CagError> {
        for ev in state.take_events() {
            self.apply_event(state, ev)?;
        }
        Ok(())
    }

    /// Dummy per-Gbps rate under `policy`, in $/s.
    pub fn free_rate(&self, policy: FreePolicy) -> S {
        match policy {
            FreePolicy::Zero => S::zero(),
            FreePolicy::MeanRate => {
                let mut lo: Option<S> = None;
                let mut hi: Option<S> = None;
                for r in self.vertices.values().filter_map(|v| v.revenue.as_ref()) {
                    let p = r.per_gbps();
                    lo = Some(lo.map_or(p, |x| x.min(p)));
                    hi = Some(hi.map_or(p, |x| x.max(p)));
                }
                match (lo, hi) {
                    (Some(lo), Some(hi)) => (lo + hi) / S::lit(2.0),
                    _ => S::zero(),
                }
            }
        }
    }

    fn weight_with(&self, v: &Vertex<S>, bw: Bandwidth, horizon: S, free_rate: S) -> S {
        if v.is_dummy() {
            free_rate * bw.min(v.degradable).to_scalar::<S>() * horizon
        } else {
            v.true_cost(self.f_min_of(v), bw, horizon)
        }
    }

    /// Weight of any edge entering `id` for target bandwidth `bw`.
    pub fn weight(&self, id: VertexId, bw: Bandwidth, policy: &WeightPolicy<S>) -> Option<S> {
        let v = self.vertices.get(&id)?;
        Some(self.weight_with(v, bw, policy.horizon, self.free_rate(policy.free)))
    }

    /// Lost revenue if `id` sheds what target `bw` requires; zero for dummies.
    pub fn true_cost(&self, id: VertexId, bw: Bandwidth, horizon: S) -> Option<S> {
        let v = self.vertices.get(&id)?;
        Some(v.true_cost(self.f_min_of(v), bw, horizon))
    }

    pub fn admits(&self, id: VertexId, view: CagView, bw: Bandwidth) -> bool {
        match self.v_bw(id) {
            None => false,
            Some(v_bw) => !view.is_capacitated() || v_bw >= bw,
        }
    }

    /// Min-cost simple vertex path from any vertex touching `s` to any vertex
    /// touching `t`. Ties go to fewer vertices, then the smaller vertex sequence.
    pub fn min_cost_path(
        &self,
        s: NodeId,
        t: NodeId,
        view: CagView,
        bw: Bandwidth,
        policy: &WeightPolicy<S>,
    ) -> Option<CagPath<S>> {
        let n = self.by_node.len();
        if s == t || s.index() >= n || t.index() >= n {
            return None;
        }
        let free_rate = self.free_rate(policy.free);
        let ids: Vec<VertexId> = self
            .vertices
            .keys()
            .copied()
            .filter(|&id| self.admits(id, view, bw))
            .collect();
        let index: BTreeMap<VertexId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, n + i)).collect();
        let weights: Vec<S> = ids
            .iter()
            .map(|id| self.weight_with(&self.vertices[id], bw, policy.horizon, free_rate))
            .collect();

        let total = n + ids.len();
        let mut dist: Vec<Option<(S, u32)>> = vec![None; total];
        let mut pred = vec![usize::MAX; total];
        let mut done = vec![false; total];
        let mut heap = BinaryHeap::new();
        dist[s.index()] = Some((S::zero(), 0));
        heap.push(Entry { cost: S::zero(), hops: 0, node: s.index() });

        // Vertex sequence (without hubs) ending at graph node `u`.
        let sequence = |pred: &[usize], mut u: usize| {
            let mut seq = Vec::new();
            while u != usize::MAX {
                if u >= n {
                    seq.push(ids[u - n]);
                }
                u = pred[u];
            }
            seq.reverse();
            seq
        };

        while let Some(Entry { cost, hops, node }) = heap.pop() {
            if done[node] || dist[node] != Some((cost, hops)) {
                continue;
            }
            done[node] = true;
            if node == t.index() {
                break;
            }
            let mut relax = |next: usize, w: S, dh: u32, heap: &mut BinaryHeap<Entry<S>>| {
                if done[next] {
                    return;
                }
                let cand = (cost + w, hops + dh);
                let better = match dist[next] {
                    None => true,
                    Some(cur) => match cmp_label(cand, cur) {
                        Ordering::Less => true,
                        Ordering::Greater => false,
                        Ordering::Equal => {
                            let mut alt = sequence(&pred, node);
                            if next >= n {
                                alt.push(ids[next - n]);
                            }
                            alt < sequence(&pred, next)
                        }
                    },
                };
                if better {
                    dist[next] = Some(cand);
                    pred[next] = node;
                    heap.push(Entry { cost: cand.0, hops: cand.1, node: next });
                }
            };
            if node < n {
                for id in &self.by_node[node] {
                    if let Some(&vi) = index.get(id) {
                        relax(vi, weights[vi - n], 1, &mut heap);
                    }
                }
            } else {
                for hub in &self.vertices[&ids[node - n]].nodes {
                    relax(hub.index(), S::zero(), 0, &mut heap);
                }
            }
        }

        let (weighted_cost, _) = dist[t.index()]?;
        let vertices = sequence(&pred, t.index());
        let mut true_cost = S::zero();
        let mut members = Vec::new();
        for id in &vertices {
            let v = &self.vertices[id];
            let f_min = self.f_min_of(v);
            true_cost += v.true_cost(f_min, bw, policy.horizon);
            if let VertexId::Conn(c) = id {
                let d = v.shed(f_min, bw);
                if d.is_positive() {
                    members.push((*c, d));
                }
            }
        }
        Some(CagPath { vertices, weighted_cost, true_cost, members })
    }

    /// Graphviz rendering of the view for a query, with entering-edge weights.
    pub fn to_dot(
        &self,
        s: NodeId,
        t: NodeId,
        view: CagView,
        bw: Bandwidth,
        policy: &WeightPolicy<S>,
    ) -> String {
        let free_rate = self.free_rate(policy.free);
        let admitted: BTreeSet<VertexId> =
            self.vertices.keys().copied().filter(|&id| self.admits(id, view, bw)).collect();
        let name = |id: &VertexId| self.vertices[id].label.clone();
        let w = |id: &VertexId| {
            self.weight_with(&self.vertices[id], bw, policy.horizon, free_rate).to_f64_lossy()
        };
        let mut out = String::new();
        let _ = writeln!(out, "digraph cag {{");
        let _ = writeln!(out, "  \"Source\" [shape=box];");
        let _ = writeln!(out, "  \"Destination\" [shape=box];");
        for id in &admitted {
            let v_bw = self.v_bw(*id).expect("admitted vertex exists");
            let _ = writeln!(
                out,
                "  \"{}\" [label=\"{}\\nv_bw={}\"];",
                name(id),
                name(id),
                v_bw.gbps()
            );
        }
        for id in &admitted {
            if self.vertices[id].nodes.contains(&s) {
                let _ = writeln!(out, "  \"Source\" -> \"{}\" [label=\"{}\"];", name(id), w(id));
            }
        }
        for (a, b) in self.edges() {
            if admitted.contains(&a) && admitted.contains(&b) {
                let _ = writeln!(out, "  \"{}\" -> \"{}\" [label=\"{}\"];", name(&a), name(&b), w(&b));
            }
        }
        for id in &admitted {
            if self.vertices[id].nodes.contains(&t) {
                let _ = writeln!(out, "  \"{}\" -> \"Destination\" [label=\"0\"];", name(id));
            }
        }
        out.push_str("}\n");
        out
    }
}

fn cmp_label<S: Scalar>(a: (S, u32), b: (S, u32)) -> Ordering {
    a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1))
}

struct Entry<S> {
    cost: S,
    hops: u32,
    node: usize,
}

impl<S: Scalar> PartialEq for Entry<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<S: Scalar> Eq for Entry<S> {}

impl<S: Scalar> PartialOrd for Entry<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Reversed so `BinaryHeap` pops the smallest label first.
impl<S: Scalar> Ord for Entry<S> {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_label((other.cost, other.hops), (self.cost, self.hops)).then(other.node.cmp(&self.node))
    }
}
