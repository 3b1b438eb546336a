//! Capacity bookkeeping and routing on random small networks.

mod common;

use std::collections::BTreeSet;

use common::*;
use crunch_core::net::{k_shortest_paths, HopTable, NodeId};
use crunch_core::Bandwidth;
use proptest::prelude::*;
use rand::Rng;

fn used_from_scratch(state: &crunch_core::NetworkState) -> Vec<Bandwidth> {
    let topo = state.topology();
    let mut used = vec![Bandwidth::ZERO; topo.link_count()];
    for c in state.connections() {
        for l in c.path.links() {
            used[l.index()] += c.b_cur;
        }
    }
    used
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Used capacity always equals the sum over connections and never exceeds capacity,
    /// whatever mix of allocations, releases, throttles and upgrades is applied.
    #[test]
    fn capacity_is_conserved(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let topo = topology(&mut rng, 6, 10, 20.0);
        let mut st = state(topo.clone());
        let mut next = 1u64;
        for _ in 0..200 {
            let ids: Vec<_> = st.connections().map(|c| c.id).collect();
            match rng.random_range(0..4) {
                0 => {
                    let (s, t) = random_pair(&mut rng, &topo);
                    let paths = simple_paths(&topo, s, t);
                    let p = paths[rng.random_range(0..paths.len())].clone();
                    let b_req = halves(&mut rng, 0.5, 8.0);
                    let b_min = halves(&mut rng, 0.5, b_req.gbps());
                    let _ = st.allocate(connection(next, p, b_req, b_min, b_req, 1.0));
                    next += 1;
                }
                1 if !ids.is_empty() => {
                    let id = ids[rng.random_range(0..ids.len())];
                    st.release(id).unwrap();
                }
                2 if !ids.is_empty() => {
                    let id = ids[rng.random_range(0..ids.len())];
                    let c = st.connection(id).unwrap();
                    let to = halves(&mut rng, c.b_min.gbps(), c.b_req.gbps());
                    let _ = st.throttle(id, to);
                }
                3 if !ids.is_empty() => {
                    let id = ids[rng.random_range(0..ids.len())];
                    let c = st.connection(id).unwrap();
                    let to = halves(&mut rng, c.b_min.gbps(), c.b_req.gbps());
                    let _ = st.upgrade(id, to);
                }
                _ => {}
            }
            let used = used_from_scratch(&st);
            for l in topo.link_ids() {
                prop_assert_eq!(st.used_capacity(l).unwrap(), used[l.index()]);
                prop_assert!(used[l.index()] <= st.capacity(l).unwrap());
                prop_assert_eq!(st.free_capacity(l).unwrap(), st.capacity(l).unwrap() - used[l.index()]);
            }
            prop_assert!(st.check_invariants().is_ok());
        }
    }

    /// Throttling and upgrading back restores the state exactly.
    #[test]
    fn throttle_then_upgrade_round_trips(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let topo = topology(&mut rng, 6, 9, 20.0);
        let mut st = state(topo);
        populate(&mut rng, &mut st, &Fill { connections: 8, one_degradable_per_link: false, max_bw: 8.0 });
        let before = st.clone();
        let ids: Vec<_> = st.connections().filter(|c| c.b_min < c.b_cur).map(|c| c.id).collect();
        for &id in &ids {
            let c = st.connection(id).unwrap();
            let to = c.b_min;
            st.throttle(id, to).unwrap();
        }
        for &id in ids.iter().rev() {
            let to = before.connection(id).unwrap().b_cur;
            st.upgrade(id, to).unwrap();
        }
        for l in st.topology().link_ids() {
            prop_assert_eq!(st.free_capacity(l).unwrap(), before.free_capacity(l).unwrap());
        }
        for c in before.connections() {
            prop_assert_eq!(st.connection(c.id).unwrap().b_cur, c.b_cur);
        }
    }

    /// The capacitated search finds a feasible path exactly when one exists,
    /// and it has the fewest hops among feasible simple paths.
    #[test]
    fn capacitated_path_matches_enumeration(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let topo = topology(&mut rng, 7, 12, 10.0);
        let mut st = state(topo.clone());
        populate(&mut rng, &mut st, &Fill { connections: 8, one_degradable_per_link: false, max_bw: 6.0 });
        for _ in 0..10 {
            let (s, t) = random_pair(&mut rng, &topo);
            let bw = halves(&mut rng, 0.5, 8.0);
            let best = simple_paths(&topo, s, t)
                .into_iter()
                .filter(|p| p.links().iter().all(|&l| st.free_capacity(l).unwrap() >= bw))
                .map(|p| p.hop_len())
                .min();
            let found = st.capacitated_shortest_path(s, t, bw);
            prop_assert_eq!(found.as_ref().map(|p| p.hop_len()), best);
            if let Some(p) = found {
                prop_assert_eq!(p.source(), s);
                prop_assert_eq!(p.destination(), t);
                prop_assert!(st.bottleneck(&p) >= bw);
            }
        }
    }

    /// Yen's paths are loopless, distinct, ordered by hops, and are the k shortest.
    #[test]
    fn k_shortest_paths_are_the_shortest(seed in any::<u64>(), k in 1usize..12) {
        let mut rng = rng(seed);
        let topo = topology(&mut rng, 7, 13, 10.0);
        let (s, t) = random_pair(&mut rng, &topo);
        let got = k_shortest_paths(&topo, s, t, k);
        let mut all: Vec<usize> = simple_paths(&topo, s, t).iter().map(|p| p.hop_len()).collect();
        all.sort_unstable();
        prop_assert_eq!(got.len(), k.min(all.len()));
        let lens: Vec<usize> = got.iter().map(|p| p.hop_len()).collect();
        prop_assert_eq!(&lens[..], &all[..got.len()]);
        let distinct: BTreeSet<Vec<NodeId>> = got.iter().map(|p| p.nodes().to_vec()).collect();
        prop_assert_eq!(distinct.len(), got.len());
        for p in &got {
            let nodes: BTreeSet<NodeId> = p.nodes().iter().copied().collect();
            prop_assert_eq!(nodes.len(), p.nodes().len());
            prop_assert_eq!(p.source(), s);
            prop_assert_eq!(p.destination(), t);
        }
    }

    /// Hop distances agree with the shortest simple path.
    #[test]
    fn hop_table_matches_enumeration(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let topo = topology(&mut rng, 6, 9, 10.0);
        let table = HopTable::new(&topo);
        for s in topo.nodes() {
            prop_assert_eq!(table.hops(s, s), Some(0));
            for t in topo.nodes().filter(|&t| t != s) {
                let best = simple_paths(&topo, s, t).iter().map(|p| p.hop_len() as u32).min();
                prop_assert_eq!(table.hops(s, t), best);
                prop_assert_eq!(table.hops(s, t), table.hops(t, s));
            }
        }
    }
}
