//! Simulator contracts: determinism, common random numbers, thinning accuracy
//! and metric bookkeeping.

mod common;

use crunch_core::baselines::{Approach, ApproachPolicy};
use crunch_core::net::{HopTable, Topology};
use crunch_core::pricing::ServiceClassKind;
use crunch_core::sim::{
    compare, run, ArrivalProfile, ArrivalTimes, CapacityEvent, CompareOptions, RequestStream, RunOptions,
    ScenarioConfig, SimError,
};

fn short(days: u32) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::scenario_a();
    cfg.days = days;
    cfg.warmup_days = 1;
    cfg
}

fn policies() -> Vec<ApproachPolicy> {
    vec![
        ApproachPolicy::new("baseline-100", Approach::Baseline),
        ApproachPolicy::new("prov-k1", Approach::Provisioner { k: 1 }),
        ApproachPolicy::new("lp-k1", Approach::LpOnly { k: 1 }),
        ApproachPolicy::new("sp-k10", Approach::SpGreedy { k: 10 }),
    ]
}

#[test]
fn zero_rate_means_no_events() {
    let mut cfg = short(2);
    cfg.lambda_base = 0.0;
    let out = run::<f64>(&cfg, &Topology::usnet(), &policies()[1], 3, RunOptions::default()).unwrap();
    assert_eq!(out.metrics.offered(), 0);
    assert_eq!(out.metrics.revenue(), 0.0);
    assert_eq!(out.metrics.crunched_total(), 0);
    assert_eq!(out.timing.decisions, 0);
}

#[test]
fn runs_are_bit_identical() {
    let cfg = short(2);
    let topo = Topology::usnet();
    for p in policies() {
        let a = run::<f64>(&cfg, &topo, &p, 11, RunOptions::default()).unwrap();
        let b = run::<f64>(&cfg, &topo, &p, 11, RunOptions::default()).unwrap();
        assert_eq!(a.metrics, b.metrics, "{}", p.name);
    }
}

#[test]
fn request_stream_is_a_function_of_the_seed() {
    let cfg = short(1);
    let topo = Topology::usnet();
    let hops = HopTable::new(&topo);
    let mut a = RequestStream::new(&cfg, 5);
    let mut b = RequestStream::new(&cfg, 5);
    let mut c = RequestStream::new(&cfg, 6);
    let mut differs = false;
    for _ in 0..500 {
        let (x, y, z) = (
            a.next_request::<f64>(&cfg, &topo, &hops).unwrap(),
            b.next_request::<f64>(&cfg, &topo, &hops).unwrap(),
            c.next_request::<f64>(&cfg, &topo, &hops).unwrap(),
        );
        differs |= x != z;
        assert_eq!(x, y);
    }
    assert!(differs);
}

/// Every policy sees the same offered load in every bin.
#[test]
fn common_random_numbers_across_policies() {
    let cfg = short(2);
    let topo = Topology::usnet();
    let outs: Vec<_> = policies()
        .iter()
        .map(|p| run::<f64>(&cfg, &topo, p, 4, RunOptions::default()).unwrap())
        .collect();
    let offered = |i: usize| outs[i].metrics.bins.iter().map(|b| b.offered).collect::<Vec<_>>();
    for i in 1..outs.len() {
        assert_eq!(offered(0), offered(i));
    }
    assert!(outs[0].metrics.crunched_total() > 0, "scenario should crunch");
}

#[test]
fn metrics_are_consistent() {
    let cfg = short(3);
    let topo = Topology::usnet();
    for p in policies() {
        let m = run::<f64>(&cfg, &topo, &p, 2, RunOptions::default()).unwrap().metrics;
        assert_eq!(m.violations, 0, "{}: {:?}", p.name, m.first_violation);
        assert_eq!(m.days.len(), 3);
        for (d, day) in m.days.iter().enumerate() {
            let bins = &m.bins[d * m.bins_per_day..(d + 1) * m.bins_per_day];
            assert_eq!(day.crunched_total(), bins.iter().map(|b| b.crunched).sum::<u64>());
            assert_eq!(day.offered, bins.iter().map(|b| b.offered).sum::<u64>());
            assert!((day.profit() - (day.revenue - day.blocking_cost)).abs() <= 1e-9 * (1.0 + day.revenue));
            for c in 0..3 {
                assert!(day.crunched_served[c] <= day.crunched[c]);
            }
            assert!(day.crunched_total() <= day.offered);
        }
        assert!((m.profit() - (m.revenue() - m.blocking_cost())).abs() <= 1e-6 * (1.0 + m.revenue()));
        for class in ServiceClassKind::ALL {
            if let Some(r) = m.crunched_acceptance(&[class]) {
                assert!((0.0..=1.0).contains(&r));
            }
        }
        for iv in m.daily_profile() {
            assert!((0.0..=1.0).contains(&iv.ratio()));
        }
    }
}

#[test]
fn baseline_against_itself_is_identical() {
    let cfg = short(2);
    let a = ApproachPolicy::new("baseline-a", Approach::Baseline);
    let b = ApproachPolicy::new("baseline-b", Approach::Baseline);
    let opts = CompareOptions { seeds: vec![0, 1, 2], run: RunOptions::default() };
    let cmp = compare(&cfg, &Topology::usnet(), &[a, b], &opts).unwrap();
    assert_eq!(cmp.crunch_profit(0), cmp.crunch_profit(1));
    let gap = cmp.gap(0, 1);
    assert_eq!(gap.mean, 0.0);
    assert_eq!(gap.half_width, 0.0);
    let s = cmp.summary();
    assert_eq!(s[0].crunch_profit, s[1].crunch_profit);
    assert_eq!(s[0].crunched_per_day, s[1].crunched_per_day);
}

#[test]
fn compare_requires_a_reference_baseline() {
    let cfg = short(1);
    let opts = CompareOptions { seeds: vec![0], run: RunOptions::default() };
    let only = [ApproachPolicy::new("prov-k1", Approach::Provisioner { k: 1 })];
    assert!(matches!(compare(&cfg, &Topology::usnet(), &only, &opts), Err(SimError::NoBaseline)));
}

/// Arrivals per hour of day, over many days, against the integral of the rate.
fn thinning_check(profile: ArrivalProfile, lambda_base: f64, amplitude: f64) {
    let mut cfg = ScenarioConfig::new("thinning", lambda_base, amplitude);
    cfg.profile = profile;
    cfg.days = 4;
    cfg.warmup_days = 0;
    let mut times = ArrivalTimes::new(&cfg, 9);
    let hours = (cfg.end_time() / 3600.0) as usize;
    let mut counts = vec![0u64; hours];
    let mut total = 0u64;
    while let Some(t) = times.next_time(&cfg) {
        counts[(t / 3600.0) as usize] += 1;
        total += 1;
    }
    assert!(total >= 100_000, "only {total} arrivals");
    for (h, &n) in counts.iter().enumerate() {
        let expected = cfg.expected_arrivals(h as f64 * 3600.0, (h + 1) as f64 * 3600.0);
        let err = (n as f64 - expected).abs() / expected;
        assert!(err <= 0.03, "{profile:?} hour {h}: {n} vs {expected:.0}");
    }
}

#[test]
fn thinning_tracks_the_rate_profile() {
    thinning_check(ArrivalProfile::SinusoidalRate, 8.0, 0.6);
}

#[test]
fn thinning_tracks_the_interarrival_profile() {
    thinning_check(ArrivalProfile::SinusoidalInterarrival, 6.0, 0.8);
}

#[test]
fn expected_arrivals_integrates_the_rate() {
    for profile in [ArrivalProfile::SinusoidalRate, ArrivalProfile::SinusoidalInterarrival] {
        let mut cfg = ScenarioConfig::new("integral", 2.0, 0.9);
        cfg.profile = profile;
        // The last pair ends exactly where tan(x / 2) has a pole.
        for (a, b) in [(1234.0, 3.0 * 86_400.0 + 77.0), (61_200.0, 64_800.0), (64_800.0, 68_400.0)] {
            let n = 400_000;
            let h = (b - a) / n as f64;
            let riemann: f64 = (0..n).map(|i| cfg.lambda(a + (i as f64 + 0.5) * h) * h).sum();
            let closed = cfg.expected_arrivals(a, b);
            assert!((closed - riemann).abs() / riemann < 1e-6, "{profile:?} [{a}, {b}]: {closed} vs {riemann}");
        }
    }
}

#[test]
fn capacity_override_reduces_headroom() {
    let topo = Topology::usnet();
    let base = short(2);
    let mut squeezed = base.clone();
    let l = &topo.links()[0];
    let link = (topo.name(l.a).to_string(), topo.name(l.b).to_string());
    squeezed.capacity_events.push(CapacityEvent { time_s: 0.0, link: link.clone(), capacity_gbps: 1.0 });
    let p = &policies()[0];
    let before = run::<f64>(&base, &topo, p, 1, RunOptions::default()).unwrap().metrics;
    let after = run::<f64>(&squeezed, &topo, p, 1, RunOptions::default()).unwrap().metrics;
    assert_eq!(before.offered(), after.offered());
    assert!(after.crunched_total() > before.crunched_total());

    // Shrinking a link below what is already in use is refused.
    let mut late = base.clone();
    late.capacity_events.push(CapacityEvent { time_s: 1.5 * 86_400.0, link, capacity_gbps: 0.001 });
    assert!(run::<f64>(&late, &topo, p, 1, RunOptions::default()).is_err());

    let mut unknown = base;
    unknown.capacity_events.push(CapacityEvent { time_s: 0.0, link: ("nowhere".into(), "else".into()), capacity_gbps: 1.0 });
    assert!(matches!(run::<f64>(&unknown, &topo, p, 1, RunOptions::default()), Err(SimError::InvalidConfig(_))));
}
