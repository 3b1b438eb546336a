//! Physical network: topology, live connections, capacity primitives and routing.

mod routing;
mod state;
mod topology;

use thiserror::Error;

pub use routing::{k_shortest_paths, shortest_path, shortest_path_where, HopTable, Path, PathCache};
pub use state::{ConnId, Connection, NetEvent, NetworkState};
pub use topology::{Link, LinkId, LinkRecord, NodeId, Topology, TopologyFile, USNET_JSON};

use crate::Bandwidth;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetError {
    #[error("unknown link {0}")]
    UnknownLink(LinkId),
    #[error("unknown connection {0}")]
    UnknownConnection(ConnId),
    #[error("connection {0} already exists")]
    DuplicateConnection(ConnId),
    #[error("link {link} has {free} free, needs {needed}")]
    InsufficientCapacity {
        link: String,
        free: Bandwidth,
        needed: Bandwidth,
    },
    #[error("bandwidth {requested} for {id} outside allowed range [{lo}, {hi}]")]
    BandwidthOutOfRange {
        id: ConnId,
        requested: Bandwidth,
        lo: Bandwidth,
        hi: Bandwidth,
    },
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
    #[error("{0}")]
    Io(String),
}
