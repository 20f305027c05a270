//! The on-disk policy look-up table: a CSV with `#`-prefixed metadata, one
//! record per transient state carrying the state tuple, the action tuple and
//! the expected completion energy from that state.
//!
//! Values use the shortest decimal that round-trips to the same f64, so
//! write → read → write is byte-identical and files diff cleanly.

use ncuplink::{EnergyParams, NetworkConfig, OptimizationResult, Policy, StateSpace, ValueTable};
use std::collections::HashMap;
use std::fmt::Write as _;

const TITLE: &str = "# ncuplink policy table";
const HEADER: &str = "state,action,value";

#[derive(Debug, Clone)]
pub struct PolicyTableFile {
    pub version: String,
    pub erasures: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub optimal_value: f64,
    pub tie_break: String,
    pub policy: Policy,
    /// Expected completion energy by state index; absorbing entry is 0.
    pub values: Vec<f64>,
}

impl PolicyTableFile {
    pub fn from_result(cfg: &NetworkConfig, e: &EnergyParams, res: &OptimizationResult) -> Self {
        Self::from_parts(cfg, e, res.policy.clone(), &res.value_table)
    }

    /// Table for an arbitrary solved policy (e.g. the CARQ baseline);
    /// `optimal_value` then records that policy's own initial-state value.
    pub fn from_parts(
        cfg: &NetworkConfig,
        e: &EnergyParams,
        policy: Policy,
        values: &ValueTable,
    ) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            erasures: cfg.erasures.clone(),
            alpha: e.alpha,
            beta: e.beta,
            optimal_value: values.initial_value(),
            tie_break: ncuplink::TIE_BREAK_RULE.to_string(),
            policy,
            values: values.values().to_vec(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.policy.space().num_nodes()
    }

    pub fn generation_size(&self) -> u32 {
        self.policy.space().generation_size()
    }

    /// Serializes the table: metadata, header, then one record per transient
    /// state, highest state index (the initial all-deficits state) first.
    pub fn write(&self) -> String {
        let space = self.policy.space();
        let mut s = String::new();
        let _ = writeln!(s, "{TITLE}");
        let _ = writeln!(s, "# version = {}", self.version);
        let _ = writeln!(s, "# num_nodes = {}", self.num_nodes());
        let _ = writeln!(s, "# generation_size = {}", self.generation_size());
        let _ = writeln!(s, "# p = {}", join_floats(&self.erasures, ", "));
        let _ = writeln!(s, "# alpha = {}", self.alpha);
        let _ = writeln!(s, "# beta = {}", self.beta);
        let _ = writeln!(s, "# optimal_value = {}", self.optimal_value);
        let _ = writeln!(s, "# tie_break = {}", self.tie_break);
        let _ = writeln!(s, "{HEADER}");
        for idx in (1..space.num_states()).rev() {
            let state = space.decode(idx);
            let _ = writeln!(
                s,
                "{},{},{}",
                join_tuple(&state),
                join_tuple(self.policy.action(idx)),
                self.values[idx]
            );
        }
        s
    }

    pub fn read(text: &str) -> Result<Self, String> {
        let mut lines = text.lines();
        if lines.next() != Some(TITLE) {
            return Err(format!("not a policy table: first line must be `{TITLE}`"));
        }

        let mut meta: HashMap<&str, &str> = HashMap::new();
        let mut header_seen = false;
        let mut records: Vec<&str> = Vec::new();
        for line in lines {
            if let Some(rest) = line.strip_prefix("# ") {
                if header_seen {
                    return Err("metadata after the header row".into());
                }
                let (key, value) = rest
                    .split_once(" = ")
                    .ok_or_else(|| format!("malformed metadata line `{line}`"))?;
                if meta.insert(key, value).is_some() {
                    return Err(format!("duplicate metadata key `{key}`"));
                }
            } else if !header_seen {
                if line != HEADER {
                    return Err(format!("expected header `{HEADER}`, found `{line}`"));
                }
                header_seen = true;
            } else if !line.is_empty() {
                records.push(line);
            }
        }
        if !header_seen {
            return Err(format!("missing header `{HEADER}`"));
        }

        let mut take = |key: &str| {
            meta.remove(key).ok_or_else(|| format!("missing metadata key `{key}`"))
        };
        let version = take("version")?.to_string();
        let num_nodes: usize = parse_meta("num_nodes", take("num_nodes")?)?;
        let generation_size: u32 = parse_meta("generation_size", take("generation_size")?)?;
        let erasures = take("p")?
            .split(',')
            .map(|v| parse_meta("p", v.trim()))
            .collect::<Result<Vec<f64>, _>>()?;
        let alpha: f64 = parse_meta("alpha", take("alpha")?)?;
        let beta: f64 = parse_meta("beta", take("beta")?)?;
        let optimal_value: f64 = parse_meta("optimal_value", take("optimal_value")?)?;
        let tie_break = take("tie_break")?.to_string();
        if let Some(key) = meta.keys().next() {
            return Err(format!("unknown metadata key `{key}`"));
        }
        if erasures.len() != num_nodes {
            return Err(format!(
                "p has {} entries but num_nodes = {num_nodes}",
                erasures.len()
            ));
        }

        let cfg = NetworkConfig::new(num_nodes, generation_size, erasures.clone());
        let space = StateSpace::new(&cfg).map_err(|e| e.to_string())?;
        let expected = space.num_states() - 1;
        if records.len() != expected {
            return Err(format!(
                "expected {expected} records for num_nodes = {num_nodes}, generation_size = \
                 {generation_size}; found {}",
                records.len()
            ));
        }

        let mut actions: HashMap<Vec<u32>, Vec<u32>> = HashMap::new();
        let mut values = vec![0.0f64; space.num_states()];
        for line in records {
            let mut fields = line.split(',');
            let (Some(state), Some(action), Some(value), None) =
                (fields.next(), fields.next(), fields.next(), fields.next())
            else {
                return Err(format!("record `{line}` must have 3 comma-separated fields"));
            };
            let state = parse_tuple(state, num_nodes, generation_size)?;
            let action_vals = parse_tuple(action, num_nodes, u32::MAX)?;
            let value: f64 = parse_meta("value", value)?;
            if state.iter().all(|&i| i == 0) {
                return Err("the absorbing state must not appear as a record".into());
            }
            values[space.index_of(&state)] = value;
            if actions.insert(state.clone(), action_vals).is_some() {
                return Err(format!("duplicate state record {state:?}"));
            }
        }

        let policy = Policy::from_fn(space, |dof| {
            actions.get(dof).cloned().unwrap_or_default()
        })
        .map_err(|e| e.to_string())?;
        Ok(Self {
            version,
            erasures,
            alpha,
            beta,
            optimal_value,
            tie_break,
            policy,
            values,
        })
    }
}

fn join_floats(values: &[f64], sep: &str) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(sep)
}

fn join_tuple(values: &[u32]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}

fn parse_tuple(text: &str, arity: usize, max: u32) -> Result<Vec<u32>, String> {
    let parts: Vec<&str> = text.split(';').collect();
    if parts.len() != arity {
        return Err(format!("tuple `{text}` must have {arity} components"));
    }
    parts
        .iter()
        .map(|part| {
            let v: u32 = part
                .parse()
                .map_err(|e| format!("tuple component `{part}`: {e}"))?;
            if v > max {
                return Err(format!("tuple component {v} exceeds the generation size {max}"));
            }
            Ok(v)
        })
        .collect()
}

fn parse_meta<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| format!("metadata `{key}`: cannot parse {value:?}: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ncuplink::{optimize, EnergyParams};

    fn sample() -> (NetworkConfig, PolicyTableFile) {
        let cfg = NetworkConfig::new(2, 2, vec![0.2, 0.4]);
        let e = EnergyParams::unit(1.0, 0.0);
        let res = optimize(&cfg, &e).unwrap();
        (cfg.clone(), PolicyTableFile::from_result(&cfg, &e, &res))
    }

    #[test]
    fn write_read_write_is_byte_identical() {
        let (_, file) = sample();
        let first = file.write();
        let read = PolicyTableFile::read(&first).unwrap();
        assert_eq!(read.write(), first);
        assert_eq!(read.policy.actions(), file.policy.actions());
        assert_eq!(read.values, file.values);
        assert_eq!(read.optimal_value, file.optimal_value);
    }

    #[test]
    fn record_count_and_order_follow_the_state_space() {
        let (_, file) = sample();
        let text = file.write();
        let records: Vec<&str> = text
            .lines()
            .filter(|l| !l.starts_with('#') && *l != HEADER)
            .collect();
        assert_eq!(records.len(), 8); // (2+1)^2 - 1
        assert!(records[0].starts_with("2;2,"), "initial state first: {}", records[0]);
        assert!(records[7].starts_with("0;1,"));
    }

    #[test]
    fn tampered_tables_are_rejected() {
        let (_, file) = sample();
        let good = file.write();

        let missing: String = good
            .lines()
            .filter(|l| !l.starts_with("1;1,"))
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(PolicyTableFile::read(&missing).unwrap_err().contains("expected 8 records"));

        let dup = good.replacen("2;1,", "2;2,", 1);
        assert!(PolicyTableFile::read(&dup).unwrap_err().contains("duplicate state"));

        // force the action at state (1,1) to send zero packets from node 1,
        // which the structural policy check must reject
        let bad_action: String = good
            .lines()
            .map(|l| {
                if let Some(rest) = l.strip_prefix("1;1,") {
                    let value = rest.split_once(',').unwrap().1;
                    format!("1;1,0;9,{value}\n")
                } else {
                    format!("{l}\n")
                }
            })
            .collect();
        let err = PolicyTableFile::read(&bad_action).unwrap_err();
        assert!(err.contains("finished") || err.contains("sends"), "{err}");

        let no_meta = good.replacen("# alpha = 1\n", "", 1);
        assert!(PolicyTableFile::read(&no_meta).unwrap_err().contains("missing metadata"));

        assert!(PolicyTableFile::read("junk").unwrap_err().contains("not a policy table"));
    }
}
