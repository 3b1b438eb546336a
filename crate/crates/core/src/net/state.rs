use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{shortest_path_where, LinkId, NetError, NodeId, Path, Topology};
use crate::pricing::{RevenueFn, ServiceClassKind};
use crate::{Bandwidth, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConnId(pub u64);

impl fmt::Display for ConnId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

/// A live, non-splittable connection pinned to one path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Connection<S> {
    pub id: ConnId,
    pub label: Option<String>,
    pub path: Path,
    pub b_req: Bandwidth,
    pub b_min: Bandwidth,
    pub b_cur: Bandwidth,
    pub class: Option<ServiceClassKind>,
    pub revenue: RevenueFn<S>,
    /// Hop length of the uncapacitated shortest path between the endpoints.
    pub shortest_hops: u32,
    pub t_start: f64,
    pub t_end: f64,
}

impl<S: Scalar> Connection<S> {
    pub fn source(&self) -> NodeId {
        self.path.source()
    }

    pub fn destination(&self) -> NodeId {
        self.path.destination()
    }

    pub fn degradable(&self) -> Bandwidth {
        self.b_cur - self.b_min
    }

    pub fn name(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.id.to_string())
    }
}

/// Change notifications consumed by incremental structures such as the CAG.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NetEvent {
    ConnectionAdded(ConnId),
    ConnectionRemoved(ConnId),
    BandwidthChanged(ConnId),
    FreeCapacityChanged(LinkId),
}

/// Physical ground truth: topology, live connections and exact per-link usage.
#[derive(Clone, Debug)]
pub struct NetworkState<S> {
    topology: Arc<Topology>,
    conns: BTreeMap<ConnId, Connection<S>>,
    link_conns: Vec<BTreeSet<ConnId>>,
    used: Vec<Bandwidth>,
    capacity: Vec<Bandwidth>,
    events: Vec<NetEvent>,
}

/// Equality ignores the pending event log.
impl<S: PartialEq> PartialEq for NetworkState<S> {
    fn eq(&self, other: &Self) -> bool {
        *self.topology == *other.topology
            && self.conns == other.conns
            && self.link_conns == other.link_conns
            && self.used == other.used
            && self.capacity == other.capacity
    }
}

impl<S: Scalar> NetworkState<S> {
    pub fn new(topology: Arc<Topology>) -> Self {
        let m = topology.link_count();
        let capacity = topology.links().iter().map(|l| l.capacity).collect();
        NetworkState {
            topology,
            conns: BTreeMap::new(),
            link_conns: vec![BTreeSet::new(); m],
            used: vec![Bandwidth::ZERO; m],
            capacity,
            events: Vec::new(),
        }
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn topology_arc(&self) -> &Arc<Topology> {
        &self.topology
    }

    pub fn connection(&self, id: ConnId) -> Result<&Connection<S>, NetError> {
        self.conns.get(&id).ok_or(NetError::UnknownConnection(id))
    }

    pub fn contains(&self, id: ConnId) -> bool {
        self.conns.contains_key(&id)
    }

    pub fn connections(&self) -> impl Iterator<Item = &Connection<S>> {
        self.conns.values()
    }

    pub fn connection_count(&self) -> usize {
        self.conns.len()
    }

    /// Connections traversing `link`, in id order.
    pub fn connections_on(&self, link: LinkId) -> impl Iterator<Item = &Connection<S>> {
        self.link_conns[link.index()].iter().map(|id| &self.conns[id])
    }

    pub fn connection_ids_on(&self, link: LinkId) -> &BTreeSet<ConnId> {
        &self.link_conns[link.index()]
    }

    pub fn capacity(&self, link: LinkId) -> Result<Bandwidth, NetError> {
        self.capacity.get(link.index()).copied().ok_or(NetError::UnknownLink(link))
    }

    pub fn used_capacity(&self, link: LinkId) -> Result<Bandwidth, NetError> {
        self.used.get(link.index()).copied().ok_or(NetError::UnknownLink(link))
    }

    pub fn free_capacity(&self, link: LinkId) -> Result<Bandwidth, NetError> {
        Ok(self.capacity(link)? - self.used[link.index()])
    }

    fn free(&self, link: LinkId) -> Bandwidth {
        self.capacity[link.index()] - self.used[link.index()]
    }

    /// Minimum free capacity over the links of `path`.
    pub fn bottleneck(&self, path: &Path) -> Bandwidth {
        path.links().iter().map(|&l| self.free(l)).min().unwrap_or(Bandwidth::ZERO)
    }

    pub fn links_with_free_capacity(&self) -> impl Iterator<Item = LinkId> + '_ {
        self.topology.link_ids().filter(|&l| self.free(l).is_positive())
    }

    /// Min-hop path whose every link has at least `bw` free.
    pub fn capacitated_shortest_path(&self, s: NodeId, t: NodeId, bw: Bandwidth) -> Option<Path> {
        shortest_path_where(&self.topology, s, t, &[], |l| self.free(l) >= bw)
    }

    fn check_path(&self, path: &Path) -> Result<(), NetError> {
        for &l in path.links() {
            self.topology.link(l)?;
        }
        Ok(())
    }

    pub fn allocate(&mut self, conn: Connection<S>) -> Result<ConnId, NetError> {
        if self.conns.contains_key(&conn.id) {
            return Err(NetError::DuplicateConnection(conn.id));
        }
        self.check_path(&conn.path)?;
        if !(conn.b_min.is_positive() && conn.b_min <= conn.b_cur && conn.b_cur <= conn.b_req) {
            return Err(NetError::BandwidthOutOfRange {
                id: conn.id,
                requested: conn.b_cur,
                lo: conn.b_min,
                hi: conn.b_req,
            });
        }
        for &l in conn.path.links() {
            if self.free(l) < conn.b_cur {
                return Err(NetError::InsufficientCapacity {
                    link: self.topology.link_label(l),
                    free: self.free(l),
                    needed: conn.b_cur,
                });
            }
        }
        let id = conn.id;
        for &l in conn.path.links() {
            self.used[l.index()] += conn.b_cur;
            self.link_conns[l.index()].insert(id);
        }
        self.events.push(NetEvent::ConnectionAdded(id));
        self.events
            .extend(conn.path.links().iter().map(|&l| NetEvent::FreeCapacityChanged(l)));
        self.conns.insert(id, conn);
        Ok(id)
    }

    pub fn release(&mut self, id: ConnId) -> Result<Connection<S>, NetError> {
        let conn = self.conns.remove(&id).ok_or(NetError::UnknownConnection(id))?;
        for &l in conn.path.links() {
            self.used[l.index()] -= conn.b_cur;
            self.link_conns[l.index()].remove(&id);
        }
        self.events.push(NetEvent::ConnectionRemoved(id));
        self.events
            .extend(conn.path.links().iter().map(|&l| NetEvent::FreeCapacityChanged(l)));
        Ok(conn)
    }

    /// Lowers a connection's bandwidth to `new_bw` in `[B_min, B_cur)`.
    pub fn throttle(&mut self, id: ConnId, new_bw: Bandwidth) -> Result<(), NetError> {
        let conn = self.conns.get(&id).ok_or(NetError::UnknownConnection(id))?;
        if !(conn.b_min <= new_bw && new_bw < conn.b_cur) {
            return Err(NetError::BandwidthOutOfRange {
                id,
                requested: new_bw,
                lo: conn.b_min,
                hi: conn.b_cur,
            });
        }
        self.resize(id, new_bw);
        Ok(())
    }

    /// Raises a connection's bandwidth to `new_bw` in `(B_cur, B_req]` if every link has room.
    pub fn upgrade(&mut self, id: ConnId, new_bw: Bandwidth) -> Result<(), NetError> {
        let conn = self.conns.get(&id).ok_or(NetError::UnknownConnection(id))?;
        if !(conn.b_cur < new_bw && new_bw <= conn.b_req) {
            return Err(NetError::BandwidthOutOfRange {
                id,
                requested: new_bw,
                lo: conn.b_cur,
                hi: conn.b_req,
            });
        }
        let extra = new_bw - conn.b_cur;
        for &l in conn.path.links() {
            if self.free(l) < extra {
                return Err(NetError::InsufficientCapacity {
                    link: self.topology.link_label(l),
                    free: self.free(l),
                    needed: extra,
                });
            }
        }
        self.resize(id, new_bw);
        Ok(())
    }

    /// Largest bandwidth `id` could be raised to right now (capped at `B_req`).
    pub fn upgrade_headroom(&self, id: ConnId) -> Result<Bandwidth, NetError> {
        let conn = self.connection(id)?;
        let slack = self.bottleneck(&conn.path);
        Ok((conn.b_cur + slack).min(conn.b_req))
    }

    fn resize(&mut self, id: ConnId, new_bw: Bandwidth) {
        let conn = self.conns.get_mut(&id).expect("checked by caller");
        let old = conn.b_cur;
        conn.b_cur = new_bw;
        for &l in conn.path.links() {
            self.used[l.index()] = self.used[l.index()] - old + new_bw;
        }
        self.events.push(NetEvent::BandwidthChanged(id));
        self.events
            .extend(conn.path.links().iter().map(|&l| NetEvent::FreeCapacityChanged(l)));
    }

    /// Capacity override hook (e.g. a failure that removes part of a link).
    pub fn set_capacity(&mut self, link: LinkId, capacity: Bandwidth) -> Result<(), NetError> {
        let used = self.used_capacity(link)?;
        if capacity < used || !capacity.is_positive() {
            return Err(NetError::InsufficientCapacity {
                link: self.topology.link_label(link),
                free: capacity - used,
                needed: Bandwidth::ZERO,
            });
        }
        self.capacity[link.index()] = capacity;
        self.events.push(NetEvent::FreeCapacityChanged(link));
        Ok(())
    }

    pub fn take_events(&mut self) -> Vec<NetEvent> {
        std::mem::take(&mut self.events)
    }

    pub fn pending_events(&self) -> &[NetEvent] {
        &self.events
    }

    pub(crate) fn truncate_events(&mut self, len: usize) {
        self.events.truncate(len);
    }

    pub fn clear_events(&mut self) {
        self.events.clear();
    }

    /// Recomputes usage from scratch and checks every bound. Returns the first violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut sums = vec![Bandwidth::ZERO; self.used.len()];
        for c in self.conns.values() {
            if !(c.b_min <= c.b_cur && c.b_cur <= c.b_req) {
                return Err(format!("{} outside [{}, {}]: {}", c.id, c.b_min, c.b_req, c.b_cur));
            }
            for &l in c.path.links() {
                sums[l.index()] += c.b_cur;
                if !self.link_conns[l.index()].contains(&c.id) {
                    return Err(format!("{} missing from index of {}", c.id, l));
                }
            }
        }
        for l in self.topology.link_ids() {
            let i = l.index();
            if sums[i] != self.used[i] {
                return Err(format!("{l}: recorded use {} != sum {}", self.used[i], sums[i]));
            }
            if sums[i] > self.capacity[i] {
                return Err(format!("{l}: use {} exceeds capacity {}", sums[i], self.capacity[i]));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::Link;

    fn two_links() -> Arc<Topology> {
        let names = vec!["a".into(), "b".into(), "c".into()];
        let cap = Bandwidth::from_gbps(100.0);
        let links = vec![
            Link { a: NodeId(0), b: NodeId(1), capacity: cap },
            Link { a: NodeId(1), b: NodeId(2), capacity: cap },
        ];
        Arc::new(Topology::new(names, links).unwrap())
    }

    fn conn(topo: &Topology, id: u64, nodes: &[u32], cur: f64, min: f64) -> Connection<f64> {
        Connection {
            id: ConnId(id),
            label: None,
            path: Path::from_nodes(topo, nodes.iter().map(|&n| NodeId(n)).collect()).unwrap(),
            b_req: Bandwidth::from_gbps(cur),
            b_min: Bandwidth::from_gbps(min),
            b_cur: Bandwidth::from_gbps(cur),
            class: None,
            revenue: RevenueFn::linear(1.0),
            shortest_hops: 1,
            t_start: 0.0,
            t_end: 1.0,
        }
    }

    #[test]
    fn free_capacity_subtracts_connections() {
        let topo = two_links();
        let mut st = NetworkState::<f64>::new(topo.clone());
        assert_eq!(st.free_capacity(LinkId(0)).unwrap(), Bandwidth::from_gbps(100.0));
        st.allocate(conn(&topo, 1, &[0, 1], 40.0, 20.0)).unwrap();
        st.allocate(conn(&topo, 2, &[0, 1, 2], 25.0, 20.0)).unwrap();
        assert_eq!(st.free_capacity(LinkId(0)).unwrap(), Bandwidth::from_gbps(35.0));
        assert!(matches!(st.free_capacity(LinkId(9)), Err(NetError::UnknownLink(_))));
    }

    #[test]
    fn allocate_rejects_overflow_and_names_link() {
        let topo = two_links();
        let mut st = NetworkState::<f64>::new(topo.clone());
        st.allocate(conn(&topo, 1, &[0, 1], 100.0, 50.0)).unwrap();
        let err = st.allocate(conn(&topo, 2, &[0, 1], 5.0, 5.0)).unwrap_err();
        assert!(err.to_string().contains("a-b"), "{err}");
        st.check_invariants().unwrap();
    }

    #[test]
    fn throttle_bounds_are_enforced() {
        let topo = two_links();
        let mut st = NetworkState::<f64>::new(topo.clone());
        st.allocate(conn(&topo, 1, &[0, 1], 40.0, 20.0)).unwrap();
        assert!(st.throttle(ConnId(1), Bandwidth::from_gbps(19.0)).is_err());
        assert!(st.throttle(ConnId(1), Bandwidth::from_gbps(40.0)).is_err());
        assert!(st.upgrade(ConnId(1), Bandwidth::from_gbps(41.0)).is_err());
        assert!(st.throttle(ConnId(7), Bandwidth::from_gbps(30.0)).is_err());
    }

    #[test]
    fn release_emits_events() {
        let topo = two_links();
        let mut st = NetworkState::<f64>::new(topo.clone());
        st.allocate(conn(&topo, 1, &[0, 1, 2], 40.0, 20.0)).unwrap();
        st.take_events();
        st.release(ConnId(1)).unwrap();
        assert_eq!(
            st.take_events(),
            vec![
                NetEvent::ConnectionRemoved(ConnId(1)),
                NetEvent::FreeCapacityChanged(LinkId(0)),
                NetEvent::FreeCapacityChanged(LinkId(1)),
            ]
        );
        assert!(st.release(ConnId(1)).is_err());
    }
}
