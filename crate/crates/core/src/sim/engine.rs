//! Discrete-event loop for one replication.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::arrivals::RequestStream;
use super::metrics::{DecisionTiming, MetricsFrame};
use super::{ScenarioConfig, SimError};
use crate::baselines::{
    baseline_decide, lp_only_decide, sp_greedy_decide, Approach, ApproachPolicy,
};
use crate::cag::{Cag, WeightPolicy};
use crate::net::{ConnId, HopTable, LinkId, NetworkState, PathCache, Topology};
use crate::pricing::Request;
use crate::provisioner::{
    on_departure, provision, Decision, DecisionContext, DecisionRecord, DegradedRegistry, Stage,
};
use crate::{Bandwidth, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Re-verify capacity and bandwidth bounds after every policy decision.
    pub check_invariants: bool,
    /// Keep one [`DecisionRecord`] per crunched request.
    pub log_decisions: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { check_invariants: true, log_decisions: false }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub metrics: MetricsFrame,
    pub timing: DecisionTiming,
    pub decisions: Vec<DecisionRecord>,
}

/// Departure key: end time (non-negative, so bit order is numeric order) then id.
type DepartureKey = Reverse<(u64, ConnId)>;

struct Engine<'a, S: Scalar> {
    cfg: &'a ScenarioConfig,
    policy: &'a ApproachPolicy,
    opts: RunOptions,
    topo: Arc<Topology>,
    state: NetworkState<S>,
    cag: Option<Cag<S>>,
    registry: DegradedRegistry<S>,
    paths: PathCache,
    departures: BinaryHeap<DepartureKey>,
    /// Aggregate revenue rate of live connections, $/s.
    rate: f64,
    clock: f64,
    warmup_bins: usize,
    metrics: MetricsFrame,
    timing: DecisionTiming,
    log: Vec<DecisionRecord>,
}

/// Simulates `policy` on the scenario's request stream for `seed`.
pub fn run<S: Scalar>(
    cfg: &ScenarioConfig,
    topology: &Topology,
    policy: &ApproachPolicy,
    seed: u64,
    opts: RunOptions,
) -> Result<RunOutput, SimError> {
    cfg.validate()?;
    let capacity = Bandwidth::from_gbps(policy.capacity_gbps.unwrap_or(cfg.capacity_gbps));
    let topo = Arc::new(topology.with_uniform_capacity(capacity)?);
    let hops = HopTable::new(&topo);
    let mut overrides = resolve_overrides(cfg, &topo)?;
    let state = NetworkState::new(topo.clone());
    let cag = matches!(policy.approach, Approach::Provisioner { .. }).then(|| Cag::build(&state));
    let mut engine = Engine {
        cfg,
        policy,
        opts,
        topo: topo.clone(),
        state,
        cag,
        registry: DegradedRegistry::new(),
        paths: PathCache::new(policy.approach.k()),
        departures: BinaryHeap::new(),
        rate: 0.0,
        clock: 0.0,
        warmup_bins: cfg.warmup_days as usize * cfg.bins_per_day(),
        metrics: MetricsFrame::new(&policy.name, seed, cfg.days, cfg.bins_per_day(), cfg.bin_s),
        timing: DecisionTiming::default(),
        log: Vec::new(),
    };

    let mut stream = RequestStream::new(cfg, seed);
    loop {
        let next = stream.next_request::<S>(cfg, &topo, &hops)?;
        let horizon = next.as_ref().map_or(cfg.end_time(), |r| r.arrival);
        loop {
            let dep = engine.departures.peek().map(|Reverse((t, _))| f64::from_bits(*t));
            let ovr = overrides.last().map(|o: &(f64, LinkId, Bandwidth)| o.0);
            match (dep.filter(|&t| t <= horizon), ovr.filter(|&t| t <= horizon)) {
                (Some(d), o) if o.is_none_or(|o| d <= o) => engine.depart()?,
                (_, Some(_)) => {
                    let (t, link, cap) = overrides.pop().expect("peeked");
                    engine.set_capacity(t, link, cap)?;
                }
                _ => break,
            }
        }
        match next {
            Some(req) => engine.arrive(req)?,
            None => break,
        }
    }
    engine.advance(cfg.end_time());
    engine.metrics.roll_up();
    Ok(RunOutput { metrics: engine.metrics, timing: engine.timing, decisions: engine.log })
}

/// Capacity overrides sorted so the earliest is last.
fn resolve_overrides(
    cfg: &ScenarioConfig,
    topo: &Topology,
) -> Result<Vec<(f64, LinkId, Bandwidth)>, SimError> {
    let mut out = Vec::with_capacity(cfg.capacity_events.len());
    for ev in &cfg.capacity_events {
        let (a, b) = &ev.link;
        let link = topo
            .node_by_name(a)
            .zip(topo.node_by_name(b))
            .and_then(|(a, b)| topo.link_between(a, b))
            .ok_or_else(|| SimError::InvalidConfig(format!("capacity event on unknown link {a}-{b}")))?;
        out.push((ev.time_s, link, Bandwidth::from_gbps(ev.capacity_gbps)));
    }
    out.sort_by(|x, y| y.0.total_cmp(&x.0));
    Ok(out)
}

impl<S: Scalar> Engine<'_, S> {
    /// Integrates the revenue rate up to `to`, bin by bin.
    fn advance(&mut self, to: f64) {
        let bin_s = self.cfg.bin_s;
        while self.clock < to {
            let bin = (self.clock / bin_s).floor() as usize;
            let end = ((bin + 1) as f64 * bin_s).min(to);
            if let Some(b) = self.measured_bin(bin) {
                self.metrics.bins[b].revenue += self.rate * (end - self.clock);
            }
            self.clock = end;
        }
    }

    fn measured_bin(&self, bin: usize) -> Option<usize> {
        let b = bin.checked_sub(self.warmup_bins)?;
        (b < self.metrics.bins.len()).then_some(b)
    }

    fn bin_at(&self, t: f64) -> Option<usize> {
        self.measured_bin((t / self.cfg.bin_s).floor() as usize)
    }

    fn conn_rate(&self, id: ConnId) -> f64 {
        self.state
            .connection(id)
            .map_or(0.0, |c| c.revenue.rate(c.b_cur).to_f64_lossy())
    }

    fn recompute_rate(&mut self) {
        self.rate = self
            .state
            .connections()
            .map(|c| c.revenue.rate(c.b_cur).to_f64_lossy())
            .sum();
    }

    /// Pushes pending state events into the CAG, or drops them if none is kept.
    fn sync(&mut self) -> Result<(), SimError> {
        match &mut self.cag {
            Some(cag) => cag.sync(&mut self.state)?,
            None => self.state.clear_events(),
        }
        Ok(())
    }

    fn schedule(&mut self, id: ConnId) -> Result<(), SimError> {
        let end = self.state.connection(id)?.t_end;
        self.departures.push(Reverse((end.to_bits(), id)));
        Ok(())
    }

    fn depart(&mut self) -> Result<(), SimError> {
        let Reverse((bits, id)) = self.departures.pop().expect("caller peeked");
        self.advance(f64::from_bits(bits));
        let gone = self.state.release(id)?;
        self.rate -= gone.revenue.rate(gone.b_cur).to_f64_lossy();
        let before: Vec<(ConnId, f64)> =
            self.registry.ids().into_iter().map(|id| (id, self.conn_rate(id))).collect();
        for (up, _) in on_departure(&mut self.state, &mut self.registry) {
            let old = before.iter().find(|(id, _)| *id == up).map_or(0.0, |p| p.1);
            self.rate += self.conn_rate(up) - old;
        }
        if self.state.connection_count() == 0 {
            // Drop accumulated rounding whenever the network empties.
            self.rate = 0.0;
        }
        self.sync()
    }

    fn set_capacity(&mut self, t: f64, link: LinkId, cap: Bandwidth) -> Result<(), SimError> {
        self.advance(t);
        self.state.set_capacity(link, cap)?;
        self.sync()
    }

    fn arrive(&mut self, req: Request<S>) -> Result<(), SimError> {
        self.advance(req.arrival);
        let bin = self.bin_at(req.arrival);
        let day = bin.map(|b| b / self.metrics.bins_per_day);
        if let Some(b) = bin {
            self.metrics.bins[b].offered += 1;
        }
        if let Some(path) = self.state.capacitated_shortest_path(req.source, req.destination, req.b_req) {
            let id = self.state.allocate(req.into_connection(path, req.b_req))?;
            self.rate += req.revenue.rate(req.b_req).to_f64_lossy();
            self.schedule(id)?;
            return self.sync();
        }

        let class = req.class.map(|c| c.index());
        if let (Some(b), Some(d)) = (bin, day) {
            self.metrics.bins[b].crunched += 1;
            if let Some(c) = class {
                self.metrics.days[d].crunched[c] += 1;
            }
        }
        let started = Instant::now();
        let decision = self.decide(&req)?;
        let wall_us = started.elapsed().as_secs_f64() * 1e6;
        self.timing.record(wall_us);

        if decision.served() {
            let id = decision.conn.expect("served decisions carry the new connection");
            self.schedule(id)?;
            self.recompute_rate();
            if let Some(d) = day {
                if let Some(c) = class {
                    self.metrics.days[d].crunched_served[c] += 1;
                }
                let hops = decision.path.as_ref().map_or(0, |p| p.hop_len() as u64);
                self.metrics.days[d].served_crunched_hops += hops;
            }
        } else {
            if let Some(b) = bin {
                self.metrics.bins[b].blocking_cost += req.blocking_cost.to_f64_lossy();
            }
            if let (Some(d), Stage::ExecutionFailed) = (day, decision.stage) {
                self.metrics.days[d].exec_failures += 1;
            }
        }
        if self.opts.check_invariants {
            if let Err(msg) = self.state.check_invariants() {
                self.metrics.violations += 1;
                self.metrics.first_violation.get_or_insert(msg);
            }
        }
        if self.opts.log_decisions {
            self.log.push(DecisionRecord::new(
                &decision,
                &req,
                &self.topo,
                &self.policy.name,
                S::lit(self.cfg.horizon_s),
                wall_us,
            ));
        }
        self.sync()
    }

    fn decide(&mut self, req: &Request<S>) -> Result<Decision<S>, SimError> {
        let horizon = S::lit(self.cfg.horizon_s);
        let (s, t) = (req.source, req.destination);
        let decision = match self.policy.approach {
            Approach::Baseline => baseline_decide(&self.state, req),
            Approach::LpOnly { .. } => {
                let paths = self.paths.get(&self.topo, s, t);
                lp_only_decide(&mut self.state, &mut self.registry, req, paths, horizon)?
            }
            Approach::SpGreedy { .. } => {
                let paths = self.paths.get(&self.topo, s, t);
                sp_greedy_decide(&mut self.state, &mut self.registry, req, paths, horizon)?
            }
            Approach::Provisioner { .. } => {
                let paths = self.paths.get(&self.topo, s, t);
                let cag = self.cag.as_mut().expect("provisioner runs keep a CAG");
                let ctx = DecisionContext {
                    weights: WeightPolicy { free: self.cfg.free_policy, horizon },
                    lp_enabled: true,
                };
                provision(&mut self.state, cag, &mut self.registry, req, paths, &ctx)?
            }
        };
        Ok(decision)
    }
}
