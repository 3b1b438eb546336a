use std::collections::HashMap;
use std::fmt;
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};

use super::NetError;
use crate::Bandwidth;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinkId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl LinkId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "link#{}", self.0)
    }
}

/// Undirected link with a single capacity pool shared by both directions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Link {
    pub a: NodeId,
    pub b: NodeId,
    pub capacity: Bandwidth,
}

impl Link {
    pub fn other(&self, n: NodeId) -> NodeId {
        if n == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// On-disk topology description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopologyFile {
    pub nodes: Vec<String>,
    pub links: Vec<LinkRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkRecord {
    pub a: String,
    pub b: String,
    pub capacity_gbps: f64,
}

/// Node ids are positions in the node list, link ids positions in the link list.
/// Routing ties are broken on node ids, so the node order of a topology file matters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Topology {
    names: Vec<String>,
    links: Vec<Link>,
    // per node: (neighbor, link) sorted by neighbor id
    adjacency: Vec<Vec<(NodeId, LinkId)>>,
    by_pair: HashMap<(NodeId, NodeId), LinkId>,
}

pub const USNET_JSON: &str = include_str!("../../data/usnet.json");

impl Topology {
    pub fn new(names: Vec<String>, links: Vec<Link>) -> Result<Self, NetError> {
        let mut seen = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            if seen.insert(n.clone(), i).is_some() {
                return Err(NetError::InvalidTopology(format!("duplicate node `{n}`")));
            }
        }
        let mut adjacency = vec![Vec::new(); names.len()];
        let mut by_pair = HashMap::new();
        for (i, l) in links.iter().enumerate() {
            let id = LinkId(i as u32);
            if l.a.index() >= names.len() || l.b.index() >= names.len() {
                return Err(NetError::InvalidTopology(format!("{id} references an unknown node")));
            }
            if l.a == l.b {
                return Err(NetError::InvalidTopology(format!(
                    "self-loop at node `{}`",
                    names[l.a.index()]
                )));
            }
            if !l.capacity.is_positive() {
                return Err(NetError::InvalidTopology(format!("{id} has non-positive capacity")));
            }
            let key = (l.a.min(l.b), l.a.max(l.b));
            if by_pair.insert(key, id).is_some() {
                return Err(NetError::InvalidTopology(format!(
                    "parallel links between `{}` and `{}`",
                    names[key.0.index()],
                    names[key.1.index()]
                )));
            }
            adjacency[l.a.index()].push((l.b, id));
            adjacency[l.b.index()].push((l.a, id));
        }
        for adj in &mut adjacency {
            adj.sort();
        }
        Ok(Topology {
            names,
            links,
            adjacency,
            by_pair,
        })
    }

    pub fn from_file(file: &TopologyFile) -> Result<Self, NetError> {
        let index: HashMap<&str, NodeId> = file
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), NodeId(i as u32)))
            .collect();
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| NetError::InvalidTopology(format!("unknown node `{name}`")))
        };
        let links = file
            .links
            .iter()
            .map(|r| {
                if !(r.capacity_gbps > 0.0) {
                    return Err(NetError::InvalidTopology(format!(
                        "link {}-{} has non-positive capacity",
                        r.a, r.b
                    )));
                }
                Ok(Link {
                    a: lookup(&r.a)?,
                    b: lookup(&r.b)?,
                    capacity: Bandwidth::from_gbps(r.capacity_gbps),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Topology::new(file.nodes.clone(), links)
    }

    pub fn from_json(json: &str) -> Result<Self, NetError> {
        let file: TopologyFile =
            serde_json::from_str(json).map_err(|e| NetError::InvalidTopology(e.to_string()))?;
        Topology::from_file(&file)
    }

    pub fn load(path: &FsPath) -> Result<Self, NetError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| NetError::Io(format!("{}: {e}", path.display())))?;
        Topology::from_json(&text)
    }

    /// The bundled 24-node, 42-link US-wide backbone with 100 Gbps links.
    pub fn usnet() -> Self {
        Topology::from_json(USNET_JSON).expect("bundled topology is valid")
    }

    pub fn to_file(&self) -> TopologyFile {
        TopologyFile {
            nodes: self.names.clone(),
            links: self
                .links
                .iter()
                .map(|l| LinkRecord {
                    a: self.names[l.a.index()].clone(),
                    b: self.names[l.b.index()].clone(),
                    capacity_gbps: l.capacity.gbps(),
                })
                .collect(),
        }
    }

    /// Same graph with every link capacity replaced.
    pub fn with_uniform_capacity(&self, capacity: Bandwidth) -> Result<Self, NetError> {
        let links = self
            .links
            .iter()
            .map(|l| Link {
                capacity,
                ..l.clone()
            })
            .collect();
        Topology::new(self.names.clone(), links)
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.names.len() as u32).map(NodeId)
    }

    pub fn link_ids(&self) -> impl Iterator<Item = LinkId> {
        (0..self.links.len() as u32).map(LinkId)
    }

    pub fn link(&self, id: LinkId) -> Result<&Link, NetError> {
        self.links.get(id.index()).ok_or(NetError::UnknownLink(id))
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn name(&self, n: NodeId) -> &str {
        &self.names[n.index()]
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.names.iter().position(|n| n == name).map(|i| NodeId(i as u32))
    }

    pub fn neighbors(&self, n: NodeId) -> &[(NodeId, LinkId)] {
        &self.adjacency[n.index()]
    }

    pub fn link_between(&self, a: NodeId, b: NodeId) -> Option<LinkId> {
        self.by_pair.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn link_label(&self, id: LinkId) -> String {
        let l = &self.links[id.index()];
        format!("{}-{}", self.name(l.a), self.name(l.b))
    }

    pub fn total_capacity(&self) -> Bandwidth {
        self.links.iter().map(|l| l.capacity).sum()
    }
}
