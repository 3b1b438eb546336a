use super::{CandidateSet, DegradedRegistry, ProvisionError};
use crate::net::{ConnId, NetworkState, Path};
use crate::pricing::Request;
use crate::{Bandwidth, Scalar};

/// Throttles the set, allocates the request on the shortest path that opened up,
/// then hands back whatever slack that path left to the members just throttled.
///
/// On failure every throttle is undone and the event log is restored.
pub fn execute<S: Scalar>(
    state: &mut NetworkState<S>,
    registry: &mut DegradedRegistry<S>,
    request: &Request<S>,
    set: &CandidateSet<S>,
) -> Result<(ConnId, Path), ProvisionError> {
    let mark = state.pending_events().len();
    let mut throttled: Vec<(ConnId, Bandwidth)> = Vec::new();
    let result = throttle_and_place(state, request, set, &mut throttled);
    let path = match result {
        Ok(path) => path,
        Err(e) => {
            for &(id, old) in throttled.iter().rev() {
                state.upgrade(id, old).expect("undoing a throttle always fits");
            }
            state.truncate_events(mark);
            return Err(e);
        }
    };

    throttled.sort_by(|a, b| {
        let ca = state.connection(a.0).expect("live");
        let cb = state.connection(b.0).expect("live");
        DegradedRegistry::compare(ca, cb)
    });
    for &(id, old) in &throttled {
        let cur = state.connection(id)?.b_cur;
        let to = state.upgrade_headroom(id)?.min(old);
        if to > cur {
            state.upgrade(id, to)?;
        }
    }
    for &(id, _) in &throttled {
        let c = state.connection(id)?;
        if c.b_cur < c.b_req {
            registry.insert(c);
        }
    }
    if set.target < request.b_req {
        registry.insert(state.connection(request.id)?);
    }
    Ok((request.id, path))
}

fn throttle_and_place<S: Scalar>(
    state: &mut NetworkState<S>,
    request: &Request<S>,
    set: &CandidateSet<S>,
    throttled: &mut Vec<(ConnId, Bandwidth)>,
) -> Result<Path, ProvisionError> {
    for &(id, delta) in &set.members {
        let c = state.connection(id)?;
        let old = c.b_cur;
        let new = (old - delta).max(c.b_min);
        if new < old {
            state.throttle(id, new)?;
            throttled.push((id, old));
        }
    }
    let path = state
        .capacitated_shortest_path(request.source, request.destination, set.target)
        .ok_or(ProvisionError::NoPhysicalPath(set.target))?;
    state.allocate(request.into_connection(path.clone(), set.target))?;
    Ok(path)
}

/// Upgrades registry entries in order after capacity was released.
/// Returns the upgrades applied as `(id, new bandwidth)`.
pub fn on_departure<S: Scalar>(
    state: &mut NetworkState<S>,
    registry: &mut DegradedRegistry<S>,
) -> Vec<(ConnId, Bandwidth)> {
    registry.retain(|id| state.contains(id));
    let mut applied = Vec::new();
    for id in registry.ids() {
        let Ok(c) = state.connection(id) else { continue };
        let cur = c.b_cur;
        let to = state.upgrade_headroom(id).unwrap_or(cur);
        if to > cur && state.upgrade(id, to).is_ok() {
            applied.push((id, to));
        }
        let c = state.connection(id).expect("still live");
        if c.b_cur >= c.b_req {
            registry.remove(id);
        }
    }
    applied
}
