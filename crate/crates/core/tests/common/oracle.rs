//! Exhaustive oracles for the CAG stage and the degradation LP.

use std::sync::Arc;

use crunch_core::cag::{Cag, FreePolicy, WeightPolicy};
use crunch_core::lp::{solve, LpConn, LpInstance};
use crunch_core::net::{ConnId, Link, NodeId, Path, Topology};
use crunch_core::pricing::RevenueFn;
use crunch_core::provisioner::{cag_provisioner, CagOutcome};
use crunch_core::{Bandwidth, NetworkState};
use rand::Rng;

use super::*;

/// One random crunched state and the CAG stage's answer on it.
pub struct OptimalityTrial {
    /// `(algorithm cost, oracle cost)` when the CAG stage returned Good.
    pub good: Option<(f64, f64)>,
}

/// Cheapest set of degradable connections whose throttling opens a physical
/// path at `target`. Each member sheds `clamp(target - f_min, 0, degradable)`,
/// where `f_min` is the least free capacity along its own path.
pub fn cheapest_degradation(st: &NetworkState, s: NodeId, t: NodeId, target: Bandwidth) -> Option<f64> {
    let cands: Vec<(ConnId, Bandwidth, f64)> = st
        .connections()
        .filter(|c| c.b_min < c.b_cur)
        .map(|c| {
            let f_min = c.path.links().iter().map(|&l| st.free_capacity(l).unwrap()).min().unwrap();
            let shed = target.saturating_sub(f_min).min(c.degradable());
            (c.id, shed, c.revenue.per_gbps())
        })
        .collect();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << cands.len()) {
        let mut trial = st.clone();
        let mut cost = 0.0;
        for (i, &(id, shed, rate)) in cands.iter().enumerate() {
            if mask & (1 << i) != 0 && shed.is_positive() {
                let b = trial.connection(id).unwrap().b_cur;
                trial.throttle(id, b - shed).unwrap();
                cost += rate * shed.gbps();
            }
        }
        if best.is_some_and(|b| b <= cost) {
            continue;
        }
        if trial.capacitated_shortest_path(s, t, target).is_some() {
            best = Some(cost);
        }
    }
    best
}

/// A crunched request on a random small network with at most one degradable
/// connection per link, decided by the CAG stage with free links priced at zero.
pub fn optimality_trial(seed: u64) -> OptimalityTrial {
    let mut rng = rng(seed);
    let nodes = rng.random_range(3..=6);
    let topo = topology(&mut rng, nodes, 10, 8.0);
    let mut st = state(topo.clone());
    let fill = Fill { connections: rng.random_range(2..=8), one_degradable_per_link: true, max_bw: 8.0 };
    populate(&mut rng, &mut st, &fill);
    let cag = Cag::build(&st);
    let weights = WeightPolicy { free: FreePolicy::Zero, horizon: 1.0 };

    // Prefer a request that cannot be routed at its full bandwidth.
    let mut req = None;
    for _ in 0..20 {
        let (s, t) = random_pair(&mut rng, &topo);
        let b_req = halves(&mut rng, 1.0, 8.0);
        let b_min = halves(&mut rng, 0.5, b_req.gbps());
        let r = request(1000, s, t, b_min, b_req, f64::from(rng.random_range(1..=9)), 5.0);
        let crunched = st.capacitated_shortest_path(s, t, b_req).is_none();
        req = Some(r);
        if crunched {
            break;
        }
    }
    let req = req.expect("at least one draw");
    match cag_provisioner(&cag, &req, &weights) {
        CagOutcome::Good(set) => {
            let oracle = cheapest_degradation(&st, req.source, req.destination, set.target)
                .expect("a Good set is itself feasible");
            OptimalityTrial { good: Some((set.cost, oracle)) }
        }
        _ => OptimalityTrial { good: None },
    }
}

/// Solver output next to the grid optimum for one random LP instance.
pub struct LpTrial {
    pub lp_objective: Option<f64>,
    pub grid_objective: Option<f64>,
    /// Largest violation of any bound or capacity row by the LP point.
    pub residual: f64,
}

/// Hundredths of a Gbps.
fn centi(b: Bandwidth) -> i64 {
    b.units() / (crunch_core::bandwidth::UNITS_PER_GBPS / 100)
}

fn line(links: usize) -> Topology {
    let names = (0..=links).map(|i| format!("v{i}")).collect();
    let links = (0..links as u32)
        .map(|i| Link { a: NodeId(i), b: NodeId(i + 1), capacity: Bandwidth::from_gbps(100.0) })
        .collect();
    Topology::new(names, links).unwrap()
}

pub fn random_lp(rng: &mut impl Rng) -> LpInstance<f64> {
    let links = rng.random_range(1..=4);
    let topo = Arc::new(line(links));
    let path = Path::from_nodes(&topo, (0..=links as u32).map(NodeId).collect()).unwrap();
    let n = rng.random_range(1..=5);
    let hundredth = |k: i64| Bandwidth::from_units(k * crunch_core::bandwidth::UNITS_PER_GBPS / 100);
    let conns: Vec<LpConn<f64>> = (0..n)
        .map(|i| {
            let b_min = hundredth(rng.random_range(10..=300));
            let b_cur = b_min + hundredth(rng.random_range(0..=20));
            let mut on_link: Vec<bool> = (0..links).map(|_| rng.random_bool(0.6)).collect();
            if !on_link.iter().any(|&x| x) {
                on_link[rng.random_range(0..links)] = true;
            }
            LpConn {
                id: ConnId(i as u64 + 1),
                b_min,
                b_cur,
                revenue: RevenueFn::linear(rng.random_range(0.5..10.0)),
                on_link,
            }
        })
        .collect();
    let target = hundredth(rng.random_range(50..=200));
    // Capacity leaves the target short by up to 0.3 Gbps on each link.
    let capacity = (0..links)
        .map(|j| {
            let used: Bandwidth = conns.iter().filter(|c| c.on_link[j]).map(|c| c.b_cur).sum();
            used + target - hundredth(rng.random_range(0..=30))
        })
        .collect();
    LpInstance { path, capacity, target, horizon: 1.0, conns }
}

/// Enumerates every variable but the last on the 0.01 Gbps grid and sets the
/// last to its largest feasible grid value.
pub fn grid_optimum(inst: &LpInstance<f64>) -> Option<f64> {
    let n = inst.conns.len();
    let links = inst.capacity.len();
    let rhs: Vec<i64> = inst.capacity.iter().map(|&c| centi(c) - centi(inst.target)).collect();
    let lo: Vec<i64> = inst.conns.iter().map(|c| centi(c.b_min)).collect();
    let hi: Vec<i64> = inst.conns.iter().map(|c| centi(c.b_cur)).collect();
    let rate: Vec<f64> = inst.conns.iter().map(|c| c.revenue.per_gbps()).collect();
    let mut y = lo.clone();
    let mut best: Option<f64> = None;
    loop {
        let mut load = vec![0i64; links];
        for i in 0..n - 1 {
            for j in 0..links {
                if inst.conns[i].on_link[j] {
                    load[j] += y[i];
                }
            }
        }
        let last = n - 1;
        let mut top = hi[last];
        let mut ok = true;
        for j in 0..links {
            if inst.conns[last].on_link[j] {
                top = top.min(rhs[j] - load[j]);
            } else if load[j] > rhs[j] {
                ok = false;
            }
        }
        if ok && top >= lo[last] {
            y[last] = top;
            let obj: f64 = (0..n).map(|i| rate[i] * (hi[i] - y[i]) as f64 / 100.0).sum::<f64>() * inst.horizon;
            if best.is_none_or(|b| obj < b) {
                best = Some(obj);
            }
        }
        // Odometer over the first n - 1 variables.
        let mut k = 0;
        loop {
            if k == n - 1 {
                return best;
            }
            if y[k] < hi[k] {
                y[k] += 1;
                break;
            }
            y[k] = lo[k];
            k += 1;
        }
    }
}

pub fn lp_trial(seed: u64) -> LpTrial {
    let mut rng = rng(seed);
    let inst = random_lp(&mut rng);
    let grid = grid_optimum(&inst);
    let sol = solve(&inst).expect("solver succeeds");
    let mut residual: f64 = 0.0;
    if let Some(s) = &sol {
        for (c, &y) in inst.conns.iter().zip(&s.y) {
            residual = residual.max(c.b_min.gbps() - y).max(y - c.b_cur.gbps());
        }
        for j in 0..inst.capacity.len() {
            let lhs: f64 = inst.conns.iter().zip(&s.y).filter(|(c, _)| c.on_link[j]).map(|(_, &y)| y).sum();
            residual = residual.max(lhs - (inst.capacity[j] - inst.target).gbps());
        }
    }
    LpTrial { lp_objective: sol.map(|s| s.objective), grid_objective: grid, residual }
}
