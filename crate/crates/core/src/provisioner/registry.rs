use std::cmp::Ordering;

use crate::net::{ConnId, Connection};
use crate::Scalar;

#[derive(Clone, Debug, PartialEq)]
struct Entry<S> {
    rate: S,
    hops: usize,
    id: ConnId,
}

/// Connections running below their requested bandwidth, awaiting upgrades.
///
/// Ordered by per-Gbps revenue rate (highest first), then by allocated hop
/// length (shortest first), then by id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DegradedRegistry<S> {
    entries: Vec<Entry<S>>,
}

impl<S: Scalar> DegradedRegistry<S> {
    pub fn new() -> Self {
        DegradedRegistry { entries: Vec::new() }
    }

    fn order(a: &Entry<S>, b: &Entry<S>) -> Ordering {
        b.rate
            .partial_cmp(&a.rate)
            .unwrap_or(Ordering::Equal)
            .then(a.hops.cmp(&b.hops))
            .then(a.id.cmp(&b.id))
    }

    /// Registry ordering between two connections.
    pub fn compare(a: &Connection<S>, b: &Connection<S>) -> Ordering {
        Self::order(&Self::entry(a), &Self::entry(b))
    }

    fn entry(c: &Connection<S>) -> Entry<S> {
        Entry { rate: c.revenue.per_gbps(), hops: c.path.hop_len(), id: c.id }
    }

    pub fn insert(&mut self, conn: &Connection<S>) {
        if self.contains(conn.id) {
            return;
        }
        let e = Self::entry(conn);
        let pos = self
            .entries
            .partition_point(|x| Self::order(x, &e) == Ordering::Less);
        self.entries.insert(pos, e);
    }

    pub fn remove(&mut self, id: ConnId) -> bool {
        let before = self.entries.len();
        self.entries.retain(|e| e.id != id);
        before != self.entries.len()
    }

    pub fn retain(&mut self, mut keep: impl FnMut(ConnId) -> bool) {
        self.entries.retain(|e| keep(e.id));
    }

    pub fn contains(&self, id: ConnId) -> bool {
        self.entries.iter().any(|e| e.id == id)
    }

    pub fn ids(&self) -> Vec<ConnId> {
        self.entries.iter().map(|e| e.id).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
