//! Flat `key = value` configuration files and command-line overrides.
//!
//! Blank lines and lines starting with `#` are ignored. A file may open with
//! a `[config]` header; parsing stops at any other `[section]` header, so a
//! run manifest doubles as a configuration file. List values are
//! comma-separated; `tau = none` disables the activity threshold.

use std::collections::BTreeMap;
use std::path::Path;

use crate::engine::{Regime, SimulationConfig};
use crate::recommenders::Algorithm;
use crate::{Error, Result};

/// Every accepted key, in the order [`describe`] prints them.
pub const KEYS: &[&str] = &[
    "regime",
    "num_users",
    "items_per_iteration",
    "k",
    "sigma",
    "mu_eta",
    "rank_exponent",
    "startup_iterations",
    "post_iterations",
    "algorithms",
    "seeds",
    "mf_k",
    "mf_a",
    "mf_b",
    "mf_lambda",
    "mf_max_sweeps",
    "mf_tolerance",
    "tau",
];

/// Values given on the command line; each one beats the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub regime: Option<Regime>,
    pub algorithms: Option<Vec<Algorithm>>,
    pub seeds: Option<Vec<u64>>,
    /// Total iteration count; post start-up iterations fill the remainder.
    pub horizon: Option<usize>,
}

/// Raw `key → value` pairs of a configuration file.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut pairs = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with('[') {
            if line == "[config]" {
                continue;
            }
            break;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::config(line, format!("line {} is not `key = value`", n + 1)))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(Error::config(key, "unknown key"));
        }
        if pairs
            .insert(key.to_string(), value.trim().to_string())
            .is_some()
        {
            return Err(Error::config(key, "given more than once"));
        }
    }
    Ok(pairs)
}

/// Resolves file contents (if any) and overrides into a validated config.
pub fn resolve(text: Option<&str>, overrides: &Overrides) -> Result<SimulationConfig> {
    let pairs = match text {
        Some(t) => parse_pairs(t)?,
        None => BTreeMap::new(),
    };
    let regime = match (overrides.regime, pairs.get("regime")) {
        (Some(r), _) => r,
        (None, Some(v)) => v.parse().map_err(|_| {
            Error::config("regime", format!("expected single or repeated, got `{v}`"))
        })?,
        (None, None) => Regime::Repeated,
    };
    let mut cfg = SimulationConfig::for_regime(regime);
    for (key, value) in &pairs {
        apply(&mut cfg, key, value)?;
    }
    if let Some(a) = &overrides.algorithms {
        cfg.algorithms = a.clone();
    }
    if let Some(s) = &overrides.seeds {
        cfg.seeds = s.clone();
    }
    if let Some(h) = overrides.horizon {
        if h <= cfg.startup_iterations {
            return Err(Error::config(
                "horizon",
                format!(
                    "{h} iterations leave none after {} start-up iterations",
                    cfg.startup_iterations
                ),
            ));
        }
        cfg.post_iterations = h - cfg.startup_iterations;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<SimulationConfig> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            resolve(Some(&text), overrides)
        }
        None => resolve(None, overrides),
    }
}

fn apply(cfg: &mut SimulationConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "regime" => {}
        "num_users" => cfg.num_users = num(key, value)?,
        "items_per_iteration" => cfg.items_per_iteration = num(key, value)?,
        "k" => cfg.k = num(key, value)?,
        "sigma" => cfg.sigma = num(key, value)?,
        "mu_eta" => cfg.mu_eta = num(key, value)?,
        "rank_exponent" => cfg.rank_exponent = num(key, value)?,
        "startup_iterations" => cfg.startup_iterations = num(key, value)?,
        "post_iterations" => cfg.post_iterations = num(key, value)?,
        "algorithms" => {
            cfg.algorithms =
                parse_algorithms(value).map_err(|e| Error::config(key, e.to_string()))?
        }
        "seeds" => cfg.seeds = parse_seeds(value).map_err(|e| Error::config(key, e.to_string()))?,
        "mf_k" => cfg.mf.k_model = num(key, value)?,
        "mf_a" => cfg.mf.a = num(key, value)?,
        "mf_b" => cfg.mf.b = num(key, value)?,
        "mf_lambda" => cfg.mf.lambda = num(key, value)?,
        "mf_max_sweeps" => cfg.mf.max_sweeps = num(key, value)?,
        "mf_tolerance" => cfg.mf.tolerance = num(key, value)?,
        "tau" => {
            cfg.tau = match value {
                "none" | "" => None,
                v => Some(num(key, v)?),
            }
        }
        _ => return Err(Error::config(key, "unknown key")),
    }
    Ok(())
}

fn num<N: std::str::FromStr>(key: &str, value: &str) -> Result<N> {
    value.parse().map_err(|_| {
        Error::config(
            key,
            format!("cannot parse `{value}` as {}", std::any::type_name::<N>()),
        )
    })
}

pub fn parse_algorithms(value: &str) -> Result<Vec<Algorithm>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}

pub fn parse_seeds(value: &str) -> Result<Vec<u64>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::param("seeds", format!("`{s}` is not a seed")))
        })
        .collect()
}

/// The resolved configuration in file syntax; [`resolve`] reads it back to
/// an identical config.
pub fn describe(cfg: &SimulationConfig) -> String {
    let join = |v: Vec<String>| v.join(",");
    let lines = [
        ("regime", cfg.regime.to_string()),
        ("num_users", cfg.num_users.to_string()),
        ("items_per_iteration", cfg.items_per_iteration.to_string()),
        ("k", cfg.k.to_string()),
        ("sigma", format!("{:?}", cfg.sigma)),
        ("mu_eta", format!("{:?}", cfg.mu_eta)),
        ("rank_exponent", format!("{:?}", cfg.rank_exponent)),
        ("startup_iterations", cfg.startup_iterations.to_string()),
        ("post_iterations", cfg.post_iterations.to_string()),
        (
            "algorithms",
            join(cfg.algorithms.iter().map(|a| a.to_string()).collect()),
        ),
        (
            "seeds",
            join(cfg.seeds.iter().map(|s| s.to_string()).collect()),
        ),
        ("mf_k", cfg.mf.k_model.to_string()),
        ("mf_a", format!("{:?}", cfg.mf.a)),
        ("mf_b", format!("{:?}", cfg.mf.b)),
        ("mf_lambda", format!("{:?}", cfg.mf.lambda)),
        ("mf_max_sweeps", cfg.mf.max_sweeps.to_string()),
        ("mf_tolerance", format!("{:?}", cfg.mf.tolerance)),
        (
            "tau",
            cfg.tau.map_or("none".to_string(), |t| format!("{t:?}")),
        ),
    ];
    debug_assert_eq!(lines.len(), KEYS.len());
    lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}
