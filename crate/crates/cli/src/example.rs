//! `crunch example`: every approach on the bundled seven-node scenario.

use anyhow::{Context, Result};
use crunch_core::baselines::{greedy_path_set, lp_only_decide, sp_greedy_decide};
use crunch_core::cag::{Cag, FreePolicy, WeightPolicy};
use crunch_core::net::{k_shortest_paths, NetworkState, Path};
use crunch_core::pricing::Request;
use crunch_core::provisioner::{
    provision, serving_gain, CandidateSet, Decision, DecisionContext, DegradedRegistry,
};
use crunch_core::snapshot::Snapshot;

fn members(state: &NetworkState<f64>, set: &CandidateSet<f64>) -> String {
    let parts: Vec<String> = set
        .members
        .iter()
        .map(|&(id, d)| {
            let name = state.connection(id).map_or_else(|_| id.to_string(), |c| c.name());
            format!("{name} by {} Gbps", d.gbps())
        })
        .collect();
    if parts.is_empty() {
        "nothing".into()
    } else {
        parts.join(", ")
    }
}

fn line(name: &str, state: &NetworkState<f64>, req: &Request<f64>, d: &Decision<f64>, horizon: f64) -> String {
    let Some(set) = &d.set else {
        return format!("{name}: no candidate set -> block ({:?})", d.stage);
    };
    let value = serving_gain(req, set.target, horizon) + req.blocking_cost;
    let head = format!("{name}: degrade {}, cost ${:.2}", members(state, set), set.cost);
    match &d.path {
        Some(p) if d.served() => format!(
            "{head} <= ${value:.2}, serve at {} Gbps via {}",
            set.target.gbps(),
            p.display(state.topology())
        ),
        _ => format!("{head} > ${value:.2} -> block"),
    }
}

/// Lines printed by `crunch example`.
pub fn report() -> Result<Vec<String>> {
    let loaded = Snapshot::worked_example().materialize::<f64>()?;
    let req = loaded.request.context("worked example has a request")?;
    let h = loaded.horizon;
    let (s, t) = (req.source, req.destination);
    let mut out = vec![format!(
        "request {}: {} -> {}, {}..{} Gbps, blocking cost ${:.2}",
        req.name(),
        loaded.state.topology().name(s),
        loaded.state.topology().name(t),
        req.b_min.gbps(),
        req.b_req.gbps(),
        req.blocking_cost
    )];

    let mut state = loaded.state.clone();
    let one = k_shortest_paths(state.topology(), s, t, 1);
    let d = sp_greedy_decide(&mut state, &mut DegradedRegistry::new(), &req, &one, h)?;
    out.push(line("SP-k1", &state, &req, &d, h));

    let mut state = loaded.state.clone();
    let d = lp_only_decide(&mut state, &mut DegradedRegistry::new(), &req, &one, h)?;
    out.push(line("LP-k1", &state, &req, &d, h));

    let mut state = loaded.state.clone();
    let mut cag = Cag::build(&state);
    let ctx = DecisionContext { weights: WeightPolicy { free: FreePolicy::Zero, horizon: h }, lp_enabled: true };
    let d = provision(&mut state, &mut cag, &mut DegradedRegistry::new(), &req, &one, &ctx)?;
    out.push(line("PROVISIONER", &state, &req, &d, h));

    let detour = Path::from_names(loaded.state.topology(), &["A", "G", "B", "C", "E", "F"])?;
    if let Some(set) = greedy_path_set(&loaded.state, &detour, req.b_min, false, h) {
        out.push(format!(
            "weighted path {}: degrade {}, cost ${:.2}",
            detour.display(loaded.state.topology()),
            members(&loaded.state, &set),
            set.cost
        ));
    }
    Ok(out)
}
