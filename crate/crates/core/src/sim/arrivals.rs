//! Non-homogeneous Poisson arrivals by thinning.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use super::{ScenarioConfig, SimError};
use crate::net::{ConnId, HopTable, Topology};
use crate::pricing::{sample_request, Request};
use crate::Scalar;

const TIME_STREAM: u64 = 1;
const ATTR_STREAM: u64 = 2;

/// Candidate times are drawn at the peak rate and kept with probability
/// `lambda(t) / lambda_max`.
///
/// Arrival times and request attributes use separate ChaCha streams keyed by
/// the seed, so the request sequence depends only on the scenario and seed.
#[derive(Clone, Debug)]
pub struct ArrivalTimes {
    rng: ChaCha8Rng,
    gap: Option<Exp<f64>>,
    t: f64,
    end: f64,
}

impl ArrivalTimes {
    pub fn new(cfg: &ScenarioConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(TIME_STREAM);
        let lambda_max = cfg.lambda_max();
        let gap = (lambda_max > 0.0).then(|| Exp::new(lambda_max).expect("positive rate"));
        ArrivalTimes { rng, gap, t: 0.0, end: cfg.end_time() }
    }

    /// Next accepted arrival before the end of the run.
    pub fn next_time(&mut self, cfg: &ScenarioConfig) -> Option<f64> {
        let gap = self.gap?;
        let lambda_max = cfg.lambda_max();
        loop {
            self.t += gap.sample(&mut self.rng);
            if self.t >= self.end {
                self.gap = None;
                return None;
            }
            if self.rng.random::<f64>() * lambda_max <= cfg.lambda(self.t) {
                return Some(self.t);
            }
        }
    }
}

/// The full request sequence of one replication.
#[derive(Clone, Debug)]
pub struct RequestStream {
    times: ArrivalTimes,
    attrs: ChaCha8Rng,
    next_id: u64,
}

impl RequestStream {
    pub fn new(cfg: &ScenarioConfig, seed: u64) -> Self {
        let mut attrs = ChaCha8Rng::seed_from_u64(seed);
        attrs.set_stream(ATTR_STREAM);
        RequestStream { times: ArrivalTimes::new(cfg, seed), attrs, next_id: 1 }
    }

    pub fn next_request<S: Scalar>(
        &mut self,
        cfg: &ScenarioConfig,
        topo: &Topology,
        hops: &HopTable,
    ) -> Result<Option<Request<S>>, SimError> {
        let Some(t) = self.times.next_time(cfg) else { return Ok(None) };
        let id = ConnId(self.next_id);
        self.next_id += 1;
        let req = sample_request(&mut self.attrs, id, t, &cfg.mix, topo, hops)
            .map_err(|e| SimError::InvalidConfig(e.to_string()))?;
        Ok(Some(req))
    }
}
