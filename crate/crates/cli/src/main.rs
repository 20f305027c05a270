//! Command-line driver for the retransmission-policy toolkit.
//!
//! Exit codes: 0 on success, 1 for domain or validation errors, 2 for I/O
//! failures. All output files are written atomically (temp file + rename) so
//! readers never observe a half-written table.

use clap::{Parser, Subcommand};
use ncuplink::{
    carq_policy, evaluate_policy, expected_throughput, optimize, per_accepted_packet, run_sweep,
    simulate, Policy, RoundCostSpec, Scheme, SweepKind, SweepSpec,
};
use ncuplink_cli::config::{self, RunConfig};
use ncuplink_cli::sigfmt::sig10;
use ncuplink_cli::table_file::PolicyTableFile;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "ncuplink",
    version,
    about = "Energy-optimal retransmission policies for network-coded sensor uplinks"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve for the optimal policy; print a summary and optionally write a
    /// policy table
    Optimize {
        /// Run configuration file (key = value lines)
        #[arg(long)]
        config: PathBuf,
        /// Write the resulting policy table here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expected energy, rounds, slots and throughput of a policy
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        /// Policy source: a table file path, or `carq` for the baseline
        #[arg(long)]
        policy: String,
    },
    /// Seeded Monte Carlo simulation of a policy
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Policy source: a table file path, or `carq` for the baseline
        #[arg(long)]
        policy: String,
        /// Number of independent trials (overrides the config)
        #[arg(long)]
        trials: Option<u64>,
        /// Base RNG seed (overrides the config)
        #[arg(long)]
        seed: Option<u64>,
        /// Write the stats CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimize across a parameter grid and tabulate both schemes
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// p_sweep, k_sweep, alpha_sweep or beta_sweep (overrides the config)
        #[arg(long)]
        sweep: Option<String>,
        /// Write the results CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a policy table only, no summary
    TableExport {
        #[arg(long)]
        config: PathBuf,
        /// Table source: omit to solve afresh, `carq` for the baseline, or a
        /// path to re-export an existing table (round-trip audit)
        #[arg(long)]
        policy: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum CliError {
    /// Invalid configuration, arguments or inputs.
    Domain(String),
    /// Filesystem failures.
    Io(String),
}

impl From<ncuplink::Error> for CliError {
    fn from(e: ncuplink::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Optimize { config, out } => cmd_optimize(&config, out.as_deref()),
        Cmd::Evaluate { config, policy } => cmd_evaluate(&config, &policy),
        Cmd::Simulate { config, policy, trials, seed, out } => {
            cmd_simulate(&config, &policy, trials, seed, out.as_deref())
        }
        Cmd::Sweep { config, sweep, out } => cmd_sweep(&config, sweep.as_deref(), out.as_deref()),
        Cmd::TableExport { config, policy, out } => {
            cmd_table_export(&config, policy.as_deref(), out.as_deref())
        }
    }
}

fn cmd_optimize(config: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let rc = load_config(config)?;
    let res = optimize(&rc.network, &rc.energy)?;
    if let Some(path) = effective_out(out, &rc) {
        let table = PolicyTableFile::from_result(&rc.network, &rc.energy, &res);
        write_atomic(&path, table.write().as_bytes())?;
    }
    let baseline = carq_baseline(&rc)?;
    print_summary(&[
        ("optimal_energy", res.optimal_value),
        ("optimal_energy_per_packet", per_accepted_packet(res.optimal_value, &rc.network)),
        ("carq_energy", baseline),
        ("carq_energy_per_packet", per_accepted_packet(baseline, &rc.network)),
        ("reduction_pct", 100.0 * (baseline - res.optimal_value) / baseline),
    ]);
    Ok(())
}

fn cmd_evaluate(config: &Path, policy_source: &str) -> Result<(), CliError> {
    let rc = load_config(config)?;
    let (policy, scheme) = resolve_policy(&rc, policy_source)?;
    let energy = evaluate_policy(&policy, &rc.network, &rc.energy, RoundCostSpec::energy(scheme))?
        .initial_value();
    let rounds = evaluate_policy(&policy, &rc.network, &rc.energy, RoundCostSpec::rounds())?
        .initial_value();
    let slots = evaluate_policy(&policy, &rc.network, &rc.energy, RoundCostSpec::slots())?
        .initial_value();
    let throughput = expected_throughput(&policy, &rc.network, &rc.energy)?;
    println!("scheme = {}", scheme_name(scheme));
    print_summary(&[
        ("energy", energy),
        ("energy_per_packet", per_accepted_packet(energy, &rc.network)),
        ("rounds", rounds),
        ("slots", slots),
        ("throughput", throughput),
    ]);
    Ok(())
}

fn cmd_simulate(
    config: &Path,
    policy_source: &str,
    trials: Option<u64>,
    seed: Option<u64>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let rc = load_config(config)?;
    let (policy, scheme) = resolve_policy(&rc, policy_source)?;
    let trials = trials.unwrap_or(rc.trials);
    let seed = seed.unwrap_or(rc.seed);
    let stats = simulate(&policy, &rc.network, &rc.energy, scheme, trials, seed)?;
    // name the generator so the numbers can be reproduced outside this tool
    let mut text = format!("# rng = {}\n", ncuplink::RNG_ALGORITHM);
    text.push_str(
        "trials,seed,mean_energy,std_energy,ci99_halfwidth,mean_rounds,mean_slots,mean_throughput\n",
    );
    text.push_str(&format!(
        "{},{},{},{},{},{},{},{}\n",
        stats.trials,
        stats.seed,
        sig10(stats.mean_energy),
        sig10(stats.std_energy),
        sig10(stats.ci99_halfwidth),
        sig10(stats.mean_rounds),
        sig10(stats.mean_slots),
        sig10(stats.mean_throughput),
    ));
    emit(effective_out(out, &rc).as_deref(), &text)
}

fn cmd_sweep(config: &Path, sweep: Option<&str>, out: Option<&Path>) -> Result<(), CliError> {
    let rc = load_config(config)?;
    let kind: SweepKind = match sweep {
        Some(name) => name.parse()?,
        None => rc.sweep.ok_or_else(|| {
            CliError::Domain("no sweep kind: pass --sweep or set `sweep` in the config".into())
        })?,
    };
    let defaults = SweepSpec::defaults(kind);
    let spec = SweepSpec {
        kind,
        base_config: rc.network.clone(),
        base_energy: rc.energy,
        axis: rc.axis.clone().unwrap_or(defaults.axis),
        curves: rc.curves.clone().unwrap_or(defaults.curves),
    };
    let rows = run_sweep(&spec)?;
    let mut text = String::from("axis,curve,e_carq_pp,e_nc_pp,reduction_pct\n");
    for row in rows {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            sig10(row.axis),
            sig10(row.curve),
            sig10(row.e_carq_pp),
            sig10(row.e_nc_pp),
            sig10(row.reduction_pct),
        ));
    }
    emit(effective_out(out, &rc).as_deref(), &text)
}

fn cmd_table_export(
    config: &Path,
    policy_source: Option<&str>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let rc = load_config(config)?;
    let out = effective_out(out, &rc).ok_or_else(|| {
        CliError::Domain("no output path: pass --out or set `out` in the config".into())
    })?;
    let table = match policy_source {
        None => {
            let res = optimize(&rc.network, &rc.energy)?;
            PolicyTableFile::from_result(&rc.network, &rc.energy, &res)
        }
        Some("carq") => {
            let policy = carq_policy(&rc.network)?;
            let values = evaluate_policy(
                &policy,
                &rc.network,
                &rc.energy,
                RoundCostSpec::energy(Scheme::Carq),
            )?;
            PolicyTableFile::from_parts(&rc.network, &rc.energy, policy, &values)
        }
        Some(path) => load_table(&rc, path)?,
    };
    write_atomic(&out, table.write().as_bytes())
}

fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    config::parse(&text).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))
}

/// `carq` means the baseline identity policy costed in baseline units; a path
/// loads a stored table (which must match the config's network shape) and is
/// costed as a coded policy.
fn resolve_policy(rc: &RunConfig, source: &str) -> Result<(Policy, Scheme), CliError> {
    if source == "carq" {
        return Ok((carq_policy(&rc.network)?, Scheme::Carq));
    }
    Ok((load_table(rc, source)?.policy, Scheme::Nc))
}

fn load_table(rc: &RunConfig, source: &str) -> Result<PolicyTableFile, CliError> {
    let text = std::fs::read_to_string(source)
        .map_err(|e| CliError::Io(format!("cannot read {source}: {e}")))?;
    let table =
        PolicyTableFile::read(&text).map_err(|e| CliError::Domain(format!("{source}: {e}")))?;
    if table.num_nodes() != rc.network.num_nodes
        || table.generation_size() != rc.network.generation_size
    {
        return Err(CliError::Domain(format!(
            "{source}: table is for num_nodes = {}, generation_size = {} but the config has \
             num_nodes = {}, generation_size = {}",
            table.num_nodes(),
            table.generation_size(),
            rc.network.num_nodes,
            rc.network.generation_size
        )));
    }
    Ok(table)
}

/// The `--out` flag wins; otherwise the config's `out` key; otherwise stdout
/// (or an error, for commands that only write files).
fn effective_out(flag: Option<&Path>, rc: &RunConfig) -> Option<PathBuf> {
    flag.map(Path::to_path_buf).or_else(|| rc.out.as_ref().map(PathBuf::from))
}

fn carq_baseline(rc: &RunConfig) -> Result<f64, ncuplink::Error> {
    Ok(evaluate_policy(
        &carq_policy(&rc.network)?,
        &rc.network,
        &rc.energy,
        RoundCostSpec::energy(Scheme::Carq),
    )?
    .initial_value())
}

fn scheme_name(scheme: Scheme) -> &'static str {
    match scheme {
        Scheme::Nc => "nc",
        Scheme::Carq => "carq",
    }
}

fn print_summary(entries: &[(&str, f64)]) {
    for (key, value) in entries {
        println!("{key} = {}", sig10(*value));
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let io = |e: std::io::Error| CliError::Io(format!("cannot write {}: {e}", path.display()));
    let mut tmp =
        tempfile::NamedTempFile::new_in(dir.unwrap_or(Path::new("."))).map_err(io)?;
    std::io::Write::write_all(&mut tmp, bytes).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
