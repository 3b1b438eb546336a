//! Random event streams over small networks, shared by the property tests and
//! the acceptance report. Each stream counts law violations instead of
//! panicking so callers can assert or report as they prefer.

use crunch_core::baselines::{lp_only_decide, sp_greedy_decide};
use crunch_core::cag::{Cag, CagView, FreePolicy, WeightPolicy};
use crunch_core::net::k_shortest_paths;
use crunch_core::provisioner::{on_departure, provision, DecisionContext, DegradedRegistry};
use crunch_core::{Bandwidth, NetworkState};
use rand::Rng;

use super::*;

/// One random mutation. Returns the number of change events it raised.
pub fn mutate(rng: &mut impl Rng, st: &mut NetworkState, next: &mut u64) -> usize {
    let topo = st.topology_arc().clone();
    let ids: Vec<_> = st.connections().map(|c| c.id).collect();
    let before = st.pending_events().len();
    match rng.random_range(0..5) {
        0 | 1 => {
            let (s, t) = random_pair(rng, &topo);
            let paths = simple_paths(&topo, s, t);
            let p = paths[rng.random_range(0..paths.len())].clone();
            let b_req = halves(rng, 0.5, 6.0);
            let b_min = halves(rng, 0.5, b_req.gbps());
            let rate = f64::from(rng.random_range(1..=9));
            let _ = st.allocate(connection(*next, p, b_req, b_min, b_req, rate));
            *next += 1;
        }
        2 if !ids.is_empty() => {
            st.release(ids[rng.random_range(0..ids.len())]).unwrap();
        }
        3 if !ids.is_empty() => {
            let id = ids[rng.random_range(0..ids.len())];
            let c = st.connection(id).unwrap();
            let to = halves(rng, c.b_min.gbps(), c.b_req.gbps());
            let _ = st.throttle(id, to);
        }
        4 if !ids.is_empty() => {
            let id = ids[rng.random_range(0..ids.len())];
            let c = st.connection(id).unwrap();
            let to = halves(rng, c.b_min.gbps(), c.b_req.gbps());
            let _ = st.upgrade(id, to);
        }
        _ => {}
    }
    st.pending_events().len() - before
}

/// Degradable connections plus links with free capacity.
pub fn expected_vertices(st: &NetworkState) -> usize {
    let degradable = st.connections().filter(|c| c.b_min < c.b_cur).count();
    let free = st.topology().link_ids().filter(|&l| st.free_capacity(l).unwrap().is_positive()).count();
    degradable + free
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct CagReport {
    pub events: usize,
    pub queries: usize,
    /// Queries where the relaxed view cost more than the capacitated one.
    pub relaxed_above_capacitated: usize,
    pub vertex_count_mismatches: usize,
    pub rebuild_mismatches: usize,
}

impl CagReport {
    pub fn add(&mut self, o: CagReport) {
        self.events += o.events;
        self.queries += o.queries;
        self.relaxed_above_capacitated += o.relaxed_above_capacitated;
        self.vertex_count_mismatches += o.vertex_count_mismatches;
        self.rebuild_mismatches += o.rebuild_mismatches;
    }

    pub fn clean(&self) -> bool {
        self.relaxed_above_capacitated == 0 && self.vertex_count_mismatches == 0 && self.rebuild_mismatches == 0
    }
}

/// Applies `steps` random mutations, syncing the CAG after each and checking
/// it against a rebuild, the vertex count law and one pair of min-cost queries
/// for each bandwidth target.
pub fn cag_stream(seed: u64, steps: usize) -> CagReport {
    let mut rng = rng(seed);
    let topo = topology(&mut rng, 6, 10, 12.0);
    let mut st = state(topo.clone());
    let mut cag = Cag::build(&st);
    let mut next = 1;
    let mut r = CagReport::default();
    let policy = WeightPolicy { free: FreePolicy::MeanRate, horizon: 60.0 };
    for _ in 0..steps {
        r.events += mutate(&mut rng, &mut st, &mut next);
        cag.sync(&mut st).unwrap();
        r.rebuild_mismatches += usize::from(cag != Cag::build(&st));
        r.vertex_count_mismatches += usize::from(cag.vertex_count() != expected_vertices(&st));

        let (s, t) = random_pair(&mut rng, &topo);
        let bw = halves(&mut rng, 0.5, 8.0);
        for (relaxed, capped) in [(CagView::RelaxedMin, CagView::CapacitatedMin), (CagView::RelaxedReq, CagView::CapacitatedReq)] {
            r.queries += 1;
            if let Some(c) = cag.min_cost_path(s, t, capped, bw, &policy) {
                let ok = cag
                    .min_cost_path(s, t, relaxed, bw, &policy)
                    .is_some_and(|p| p.weighted_cost <= c.weighted_cost + 1e-9);
                r.relaxed_above_capacitated += usize::from(!ok);
            }
        }
    }
    r
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct SafetyReport {
    pub events: usize,
    pub decisions: usize,
    pub capacity_violations: usize,
    pub below_min: usize,
    pub round_trips: usize,
    pub round_trip_failures: usize,
}

impl SafetyReport {
    pub fn add(&mut self, o: SafetyReport) {
        self.events += o.events;
        self.decisions += o.decisions;
        self.capacity_violations += o.capacity_violations;
        self.below_min += o.below_min;
        self.round_trips += o.round_trips;
        self.round_trip_failures += o.round_trip_failures;
    }

    pub fn clean(&self) -> bool {
        self.capacity_violations == 0 && self.below_min == 0 && self.round_trip_failures == 0
    }
}

/// Links over capacity and connections below their floor, counted from the
/// connection list alone.
fn audit(st: &NetworkState) -> (usize, usize) {
    let topo = st.topology();
    let mut used = vec![Bandwidth::ZERO; topo.link_count()];
    let mut below = 0;
    for c in st.connections() {
        below += usize::from(c.b_cur < c.b_min);
        for l in c.path.links() {
            used[l.index()] += c.b_cur;
        }
    }
    let over = topo.link_ids().filter(|&l| used[l.index()] > st.capacity(l).unwrap()).count();
    (over, below)
}

/// Arrivals, departures and throttle/upgrade round trips on a small network,
/// with crunched arrivals decided by the provisioner, LP-only or shortest-path
/// greedy depending on the seed. Departures upgrade degraded connections.
pub fn safety_stream(seed: u64, steps: usize) -> SafetyReport {
    let mut rng = rng(seed);
    let topo = topology(&mut rng, 6, 10, 10.0);
    let mut st = state(topo.clone());
    let mut cag = Cag::build(&st);
    let mut reg = DegradedRegistry::new();
    let ctx = DecisionContext { weights: WeightPolicy { free: FreePolicy::MeanRate, horizon: 60.0 }, lp_enabled: true };
    let mut next = 1u64;
    let mut r = SafetyReport::default();
    for _ in 0..steps {
        r.events += 1;
        let ids: Vec<_> = st.connections().map(|c| c.id).collect();
        match rng.random_range(0..6) {
            0..=2 => {
                let (s, t) = random_pair(&mut rng, &topo);
                let b_req = halves(&mut rng, 1.0, 6.0);
                let b_min = halves(&mut rng, 0.5, b_req.gbps());
                let rate = f64::from(rng.random_range(1..=9));
                let req = request(next, s, t, b_min, b_req, rate, rate * b_min.gbps() * 90.0);
                next += 1;
                if let Some(p) = st.capacitated_shortest_path(s, t, b_req) {
                    st.allocate(req.into_connection(p, b_req)).unwrap();
                } else {
                    r.decisions += 1;
                    let paths = k_shortest_paths(&topo, s, t, 3);
                    match seed % 3 {
                        0 => provision(&mut st, &mut cag, &mut reg, &req, &paths, &ctx).map(|_| ()).unwrap(),
                        1 => lp_only_decide(&mut st, &mut reg, &req, &paths, 60.0).map(|_| ()).unwrap(),
                        _ => sp_greedy_decide(&mut st, &mut reg, &req, &paths, 60.0).map(|_| ()).unwrap(),
                    }
                }
            }
            3 | 4 if !ids.is_empty() => {
                st.release(ids[rng.random_range(0..ids.len())]).unwrap();
                on_departure(&mut st, &mut reg);
            }
            _ => {
                let degradable: Vec<_> = st.connections().filter(|c| c.b_min < c.b_cur).map(|c| c.id).collect();
                if !degradable.is_empty() {
                    let id = degradable[rng.random_range(0..degradable.len())];
                    let c = st.connection(id).unwrap();
                    let (b_cur, b_min) = (c.b_cur, c.b_min);
                    let step = Bandwidth::from_units(rng.random_range(1..=(b_cur - b_min).units()));
                    let before = st.clone();
                    st.throttle(id, b_cur - step).unwrap();
                    st.upgrade(id, b_cur).unwrap();
                    r.round_trips += 1;
                    r.round_trip_failures += usize::from(st != before);
                }
            }
        }
        cag.sync(&mut st).unwrap();
        let (over, below) = audit(&st);
        r.capacity_violations += over;
        r.below_min += below;
    }
    r
}
