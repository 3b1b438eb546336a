use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use crunch_core::baselines::ApproachPolicy;
use crunch_core::net::Topology;
use crunch_core::sim::ScenarioConfig;
use serde::{Deserialize, Serialize};

/// What `crunch run` simulates. Relative paths resolve against the manifest's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    /// Topology JSON; the bundled US backbone when absent.
    #[serde(default)]
    pub topology: Option<PathBuf>,
    pub scenario: PathBuf,
    /// Defaults to the eight standard approaches.
    #[serde(default)]
    pub policies: Option<Vec<ApproachPolicy>>,
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default = "yes")]
    pub log_decisions: bool,
}

fn yes() -> bool {
    true
}

/// A manifest with every reference loaded and checked.
pub struct Loaded {
    pub topology: Topology,
    pub scenario: ScenarioConfig,
    pub policies: Vec<ApproachPolicy>,
    pub seeds: Option<Vec<u64>>,
    pub out: Option<PathBuf>,
    pub log_decisions: bool,
}

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Loaded> {
        let text = read_to_string(path)?;
        let m: RunManifest = serde_json::from_str(&text)
            .with_context(|| format!("cannot parse manifest {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };

        let topology = match &m.topology {
            Some(p) => load_topology(&resolve(p))?,
            None => Topology::usnet(),
        };
        let scenario = load_scenario(&resolve(&m.scenario))?;
        let policies = m.policies.clone().unwrap_or_else(ApproachPolicy::standard_set);
        if policies.is_empty() {
            bail!("manifest {} lists no policies", path.display());
        }
        Ok(Loaded {
            topology,
            scenario,
            policies,
            seeds: m.seeds.clone(),
            out: m.out.as_ref().map(|p| resolve(p)),
            log_decisions: m.log_decisions,
        })
    }
}

pub fn load_topology(path: &Path) -> Result<Topology> {
    let text = read_to_string(path)?;
    Topology::from_json(&text).with_context(|| format!("invalid topology {}", path.display()))
}

pub fn load_scenario(path: &Path) -> Result<ScenarioConfig> {
    let text = read_to_string(path)?;
    ScenarioConfig::from_json(&text).with_context(|| format!("invalid scenario {}", path.display()))
}

/// Parses `1,2,5` and inclusive ranges such as `0-9`.
pub fn parse_seeds(list: &str) -> Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for part in list.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let a: u64 = a.trim().parse().map_err(|_| format!("bad seed range '{part}'"))?;
                let b: u64 = b.trim().parse().map_err(|_| format!("bad seed range '{part}'"))?;
                if a > b {
                    return Err(format!("empty seed range '{part}'"));
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| format!("bad seed '{part}'"))?),
        }
    }
    if out.is_empty() {
        return Err("no seeds given".into());
    }
    Ok(out)
}
