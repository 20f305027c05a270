//! Flat `key = value` run configuration files.
//!
//! One setting per line, `#` starts a comment, vectors are comma-separated.
//! Unknown and duplicated keys are rejected so typos fail loudly instead of
//! silently running defaults.

use ncuplink::{validate_config, EnergyParams, NetworkConfig, SweepKind};

pub const DEFAULT_TRIALS: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 1;

/// Everything a command needs: the network and energy model plus
/// command-specific options. Optional fields fall back to flags or to the
/// built-in defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub network: NetworkConfig,
    pub energy: EnergyParams,
    pub trials: u64,
    pub seed: u64,
    pub sweep: Option<SweepKind>,
    pub out: Option<String>,
    pub axis: Option<Vec<f64>>,
    pub curves: Option<Vec<f64>>,
}

pub fn parse(text: &str) -> Result<RunConfig, String> {
    let mut num_nodes: Option<usize> = None;
    let mut generation_size: Option<u32> = None;
    let mut p: Option<Vec<f64>> = None;
    let mut alpha: Option<f64> = None;
    let mut beta: Option<f64> = None;
    let mut e_data_carq: Option<f64> = None;
    let mut state_space_limit: Option<usize> = None;
    let mut trials: Option<u64> = None;
    let mut seed: Option<u64> = None;
    let mut sweep: Option<SweepKind> = None;
    let mut out: Option<String> = None;
    let mut axis: Option<Vec<f64>> = None;
    let mut curves: Option<Vec<f64>> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `key = value`", lineno + 1))?;
        let key = key.trim();
        let value = value.trim();
        let dup = |name: &str| format!("line {}: duplicate key `{name}`", lineno + 1);
        match key {
            "num_nodes" => set(&mut num_nodes, parse_scalar(key, value)?, || dup(key))?,
            "generation_size" => set(&mut generation_size, parse_scalar(key, value)?, || dup(key))?,
            "p" => set(&mut p, parse_vector(key, value)?, || dup(key))?,
            "alpha" => set(&mut alpha, parse_scalar(key, value)?, || dup(key))?,
            "beta" => set(&mut beta, parse_scalar(key, value)?, || dup(key))?,
            "e_data_carq" => set(&mut e_data_carq, parse_scalar(key, value)?, || dup(key))?,
            "state_space_limit" => {
                set(&mut state_space_limit, parse_scalar(key, value)?, || dup(key))?
            }
            "trials" => set(&mut trials, parse_scalar(key, value)?, || dup(key))?,
            "seed" => set(&mut seed, parse_scalar(key, value)?, || dup(key))?,
            "sweep" => {
                let kind: SweepKind = value.parse().map_err(|e| format!("sweep: {e}"))?;
                set(&mut sweep, kind, || dup(key))?
            }
            "out" => set(&mut out, value.to_string(), || dup(key))?,
            "axis" => set(&mut axis, parse_vector(key, value)?, || dup(key))?,
            "curves" => set(&mut curves, parse_vector(key, value)?, || dup(key))?,
            other => return Err(format!("line {}: unknown key `{other}`", lineno + 1)),
        }
    }

    let num_nodes = num_nodes.ok_or("missing required key `num_nodes`")?;
    let generation_size = generation_size.ok_or("missing required key `generation_size`")?;
    let p = p.ok_or("missing required key `p`")?;

    let mut network = NetworkConfig::new(num_nodes, generation_size, p);
    if let Some(limit) = state_space_limit {
        network.state_space_limit = limit;
    }
    let energy = EnergyParams::new(
        e_data_carq.unwrap_or(1.0),
        alpha.unwrap_or(1.0),
        beta.unwrap_or(0.0),
    );
    validate_config(&network, &energy).map_err(|e| e.to_string())?;
    Ok(RunConfig {
        network,
        energy,
        trials: trials.unwrap_or(DEFAULT_TRIALS),
        seed: seed.unwrap_or(DEFAULT_SEED),
        sweep,
        out,
        axis,
        curves,
    })
}

/// Canonical text form; `parse(serialize(c))` reproduces `c` exactly.
pub fn serialize(c: &RunConfig) -> String {
    let mut s = String::new();
    let mut line = |key: &str, value: String| {
        s.push_str(key);
        s.push_str(" = ");
        s.push_str(&value);
        s.push('\n');
    };
    line("num_nodes", c.network.num_nodes.to_string());
    line("generation_size", c.network.generation_size.to_string());
    line("p", join(&c.network.erasures));
    line("alpha", c.energy.alpha.to_string());
    line("beta", c.energy.beta.to_string());
    line("e_data_carq", c.energy.e_data_carq.to_string());
    line("state_space_limit", c.network.state_space_limit.to_string());
    line("trials", c.trials.to_string());
    line("seed", c.seed.to_string());
    if let Some(kind) = c.sweep {
        line("sweep", kind.name().to_string());
    }
    if let Some(out) = &c.out {
        line("out", out.clone());
    }
    if let Some(axis) = &c.axis {
        line("axis", join(axis));
    }
    if let Some(curves) = &c.curves {
        line("curves", join(curves));
    }
    s
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

fn set<T>(slot: &mut Option<T>, value: T, dup: impl Fn() -> String) -> Result<(), String> {
    if slot.is_some() {
        return Err(dup());
    }
    *slot = Some(value);
    Ok(())
}

fn parse_scalar<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| format!("key `{key}`: cannot parse {value:?}: {e}"))
}

fn parse_vector(key: &str, value: &str) -> Result<Vec<f64>, String> {
    if value.trim().is_empty() {
        return Err(format!("key `{key}`: empty vector"));
    }
    value
        .split(',')
        .map(|part| parse_scalar(key, part.trim()))
        .collect()
}
