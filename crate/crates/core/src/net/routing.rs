//! Hop-count routing: capacitated shortest paths, Yen's k shortest paths, hop tables.
//!
//! Every search breaks ties on the lexicographically smallest node-id sequence.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{LinkId, NetError, NodeId, Topology};

/// Simple path: `nodes.len() == links.len() + 1`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Path {
    nodes: Vec<NodeId>,
    links: Vec<LinkId>,
}

impl Path {
    pub fn from_nodes(topo: &Topology, nodes: Vec<NodeId>) -> Result<Self, NetError> {
        if nodes.len() < 2 {
            return Err(NetError::InvalidPath("a path needs two distinct endpoints".into()));
        }
        let distinct: BTreeSet<_> = nodes.iter().collect();
        if distinct.len() != nodes.len() {
            return Err(NetError::InvalidPath("path repeats a node".into()));
        }
        let links = nodes
            .windows(2)
            .map(|w| {
                topo.link_between(w[0], w[1]).ok_or_else(|| {
                    NetError::InvalidPath(format!(
                        "no link between `{}` and `{}`",
                        topo.name(w[0]),
                        topo.name(w[1])
                    ))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Path { nodes, links })
    }

    pub fn from_names(topo: &Topology, names: &[&str]) -> Result<Self, NetError> {
        let nodes = names
            .iter()
            .map(|n| {
                topo.node_by_name(n)
                    .ok_or_else(|| NetError::InvalidPath(format!("unknown node `{n}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Path::from_nodes(topo, nodes)
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn links(&self) -> &[LinkId] {
        &self.links
    }

    pub fn hop_len(&self) -> usize {
        self.links.len()
    }

    pub fn source(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn destination(&self) -> NodeId {
        *self.nodes.last().expect("non-empty path")
    }

    pub fn names(&self, topo: &Topology) -> Vec<String> {
        self.nodes.iter().map(|&n| topo.name(n).to_string()).collect()
    }

    pub fn display(&self, topo: &Topology) -> String {
        self.names(topo).join("-")
    }
}

/// Min-hop path from `s` to `t` over links accepted by `admit`, avoiding `banned` nodes.
pub fn shortest_path_where(
    topo: &Topology,
    s: NodeId,
    t: NodeId,
    banned: &[bool],
    mut admit: impl FnMut(LinkId) -> bool,
) -> Option<Path> {
    if s == t {
        return None;
    }
    let n = topo.node_count();
    let usable = |x: NodeId| banned.get(x.index()).map_or(true, |b| !b);
    if !usable(s) || !usable(t) {
        return None;
    }
    // Distances to t; the forward walk then picks the smallest admissible successor.
    let mut admitted = vec![None; topo.link_count()];
    let mut dist = vec![u32::MAX; n];
    dist[t.index()] = 0;
    let mut queue = VecDeque::from([t]);
    while let Some(u) = queue.pop_front() {
        if u == s {
            break;
        }
        for &(v, l) in topo.neighbors(u) {
            if dist[v.index()] != u32::MAX || !usable(v) {
                continue;
            }
            let ok = *admitted[l.index()].get_or_insert_with(|| admit(l));
            if ok {
                dist[v.index()] = dist[u.index()] + 1;
                queue.push_back(v);
            }
        }
    }
    if dist[s.index()] == u32::MAX {
        return None;
    }
    let mut nodes = vec![s];
    let mut links = Vec::new();
    let mut cur = s;
    while cur != t {
        let want = dist[cur.index()] - 1;
        let &(next, l) = topo
            .neighbors(cur)
            .iter()
            .find(|&&(v, l)| {
                dist[v.index()] == want && *admitted[l.index()].get_or_insert_with(|| admit(l))
            })
            .expect("bfs layer has an admissible successor");
        nodes.push(next);
        links.push(l);
        cur = next;
    }
    Some(Path { nodes, links })
}

/// Min-hop path on the bare topology.
pub fn shortest_path(topo: &Topology, s: NodeId, t: NodeId) -> Option<Path> {
    shortest_path_where(topo, s, t, &[], |_| true)
}

/// Yen's loopless k shortest paths by hop count; ties ordered by node sequence.
pub fn k_shortest_paths(topo: &Topology, s: NodeId, t: NodeId, k: usize) -> Vec<Path> {
    let mut accepted: Vec<Path> = Vec::new();
    if k == 0 {
        return accepted;
    }
    let Some(first) = shortest_path(topo, s, t) else {
        return accepted;
    };
    accepted.push(first);
    let mut candidates: BTreeSet<(usize, Vec<NodeId>)> = BTreeSet::new();
    let mut banned = vec![false; topo.node_count()];
    while accepted.len() < k {
        let prev = accepted.last().expect("non-empty").clone();
        for j in 0..prev.hop_len() {
            let spur = prev.nodes[j];
            let root = &prev.nodes[..=j];
            let mut removed: BTreeSet<LinkId> = BTreeSet::new();
            for p in &accepted {
                if p.nodes.len() > j + 1 && &p.nodes[..=j] == root {
                    removed.insert(p.links[j]);
                }
            }
            banned.iter_mut().for_each(|b| *b = false);
            for &n in &root[..j] {
                banned[n.index()] = true;
            }
            if let Some(tail) = shortest_path_where(topo, spur, t, &banned, |l| !removed.contains(&l)) {
                let mut nodes = root[..j].to_vec();
                nodes.extend_from_slice(&tail.nodes);
                candidates.insert((nodes.len() - 1, nodes));
            }
        }
        let next = loop {
            match candidates.pop_first() {
                Some((_, nodes)) if accepted.iter().any(|p| p.nodes == nodes) => continue,
                other => break other,
            }
        };
        match next {
            Some((_, nodes)) => {
                accepted.push(Path::from_nodes(topo, nodes).expect("candidate is a valid path"))
            }
            None => break,
        }
    }
    accepted
}

/// All-pairs hop distances on the bare topology.
#[derive(Clone, Debug)]
pub struct HopTable {
    n: usize,
    dist: Vec<Option<u32>>,
}

impl HopTable {
    pub fn new(topo: &Topology) -> Self {
        let n = topo.node_count();
        let mut dist = vec![None; n * n];
        for s in topo.nodes() {
            let row = &mut dist[s.index() * n..(s.index() + 1) * n];
            row[s.index()] = Some(0);
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                let du = row[u.index()].expect("visited");
                for &(v, _) in topo.neighbors(u) {
                    if row[v.index()].is_none() {
                        row[v.index()] = Some(du + 1);
                        queue.push_back(v);
                    }
                }
            }
        }
        HopTable { n, dist }
    }

    pub fn hops(&self, s: NodeId, t: NodeId) -> Option<u32> {
        self.dist[s.index() * self.n + t.index()]
    }
}


/// Lazily computed k-shortest-path lists per ordered node pair.
#[derive(Clone, Debug)]
pub struct PathCache {
    k: usize,
    paths: std::collections::HashMap<(NodeId, NodeId), Vec<Path>>,
}

impl PathCache {
    pub fn new(k: usize) -> Self {
        PathCache { k: k.max(1), paths: Default::default() }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&mut self, topo: &Topology, s: NodeId, t: NodeId) -> &[Path] {
        let k = self.k;
        self.paths.entry((s, t)).or_insert_with(|| k_shortest_paths(topo, s, t, k))
    }
}
