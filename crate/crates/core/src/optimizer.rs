//! Energy-optimal action search.
//!
//! States are processed in ascending dof-sum order, so when a state is
//! searched every strict successor already holds its optimal value and the
//! per-state minimization is globally optimal (Bellman on a DAG). Each
//! state's candidate grid is exhaustive over c_k ∈ [i_k, U_k]; the upper
//! bound starts at ceil(i_k/(1−p_k)) plus a slack of 10 and doubles (at most
//! four times) whenever the argmin lands on it.

use crate::error::{Error, Result};
use crate::model::{
    CostKind, EnergyParams, NetworkConfig, Policy, Scheme, StateSpace, ValueTable, validate_config,
};
use crate::solver::{RoundCostSpec, build_rows, evaluate_policy, fold_state_value};
use crate::transition::NodeTransitionRow;

/// Two candidate objectives within this relative distance count as a tie and
/// are settled by smallest packet total, then lexicographic order.
pub const TIE_BREAK_REL_TOL: f64 = 1e-12;

/// Identifier for the tie-break rule, recorded in exported policy tables.
pub const TIE_BREAK_RULE: &str = "min-sum-lex@1e-12rel";

const INITIAL_BOUND_SLACK: u32 = 10;
const MAX_BOUND_EXTENSIONS: u32 = 4;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub states_processed: u64,
    pub candidates_evaluated: u64,
    pub bound_extensions: u32,
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub policy: Policy,
    /// Expected completion energy at the all-M state (e_data_carq units).
    pub optimal_value: f64,
    pub value_table: ValueTable,
    pub search_stats: SearchStats,
}

/// Finds the action table minimizing expected completion energy under the
/// network-coded energy model.
pub fn optimize(cfg: &NetworkConfig, e: &EnergyParams) -> Result<OptimizationResult> {
    validate_config(cfg, e)?;
    let space = StateSpace::new(cfg)?;
    let order = space.indices_by_dof_sum();
    let mut values = vec![0.0f64; space.num_states()];
    let mut policy = Policy::zeroed(space.clone());
    let mut stats = SearchStats::default();
    let mut dof = vec![0u32; cfg.num_nodes];
    let mut action = vec![0u32; cfg.num_nodes];
    let mut jbuf = vec![0u32; cfg.num_nodes];

    for &idx in &order[1..] {
        space.decode_into(idx, &mut dof);
        let value = search_state(cfg, e, &space, &dof, &values, &mut action, &mut jbuf, &mut stats)?;
        policy.set_action(idx, &action);
        values[idx] = value;
        stats.states_processed += 1;
    }

    let optimal_value = values[space.initial_index()];
    let value_table = ValueTable::new(space, values, CostKind::Energy);
    Ok(OptimizationResult { policy, optimal_value, value_table, search_stats: stats })
}

/// Exhaustive candidate search at one state. Writes the winning action into
/// `action` and returns its objective value.
#[allow(clippy::too_many_arguments)] // hot path: scratch buffers passed flat
fn search_state(
    cfg: &NetworkConfig,
    e: &EnergyParams,
    space: &StateSpace,
    dof: &[u32],
    values: &[f64],
    action: &mut [u32],
    jbuf: &mut [u32],
    stats: &mut SearchStats,
) -> Result<f64> {
    let e_data = e.e_data_nc();
    let e_ack_total = e.e_ack() * cfg.num_nodes as f64;
    let mut slack = INITIAL_BOUND_SLACK;
    let mut extensions = 0u32;

    loop {
        // per-node candidate range [i_k, U_k] (fixed at 0 for finished nodes)
        let bounds: Vec<(u32, u32)> = dof
            .iter()
            .zip(&cfg.erasures)
            .map(|(&i, &p)| {
                if i == 0 {
                    (0, 0)
                } else {
                    (i, (i as f64 / (1.0 - p)).ceil() as u32 + slack)
                }
            })
            .collect();
        let rows: Vec<Vec<NodeTransitionRow>> = bounds
            .iter()
            .zip(dof)
            .zip(&cfg.erasures)
            .map(|((&(lo, hi), &i), &p)| {
                (lo..=hi).map(|c| NodeTransitionRow::new(i, c, p)).collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;

        // pass 1: minimum objective over the whole grid
        let mut best = f64::INFINITY;
        let mut worst_self_loop = 0.0f64;
        for_each_candidate(&bounds, action, |action| {
            stats.candidates_evaluated += 1;
            let cand_rows: Vec<&NodeTransitionRow> = action
                .iter()
                .zip(&bounds)
                .zip(&rows)
                .map(|((&c, &(lo, _)), node_rows)| &node_rows[(c - lo) as usize])
                .collect();
            match candidate_objective(&cand_rows, dof, action, e_data, e_ack_total, values, space, jbuf)
            {
                Ok(obj) => best = best.min(obj),
                Err(self_loop) => worst_self_loop = worst_self_loop.max(self_loop),
            }
        });
        if !best.is_finite() {
            return Err(Error::NumericalDegeneracy {
                state: format!("{dof:?}"),
                self_loop: worst_self_loop,
            });
        }

        // pass 2: among ties, smallest packet total then lexicographically
        // smallest tuple (enumeration is lexicographic, so the first hit at
        // the minimal total wins) — order-independent and reproducible
        let tie_cut = best * (1.0 + TIE_BREAK_REL_TOL);
        let mut chosen: Option<(u32, f64)> = None; // (packet total, objective)
        let mut chosen_action = vec![0u32; dof.len()];
        for_each_candidate(&bounds, action, |action| {
            let cand_rows: Vec<&NodeTransitionRow> = action
                .iter()
                .zip(&bounds)
                .zip(&rows)
                .map(|((&c, &(lo, _)), node_rows)| &node_rows[(c - lo) as usize])
                .collect();
            if let Ok(obj) =
                candidate_objective(&cand_rows, dof, action, e_data, e_ack_total, values, space, jbuf)
                && obj <= tie_cut
            {
                let total: u32 = action.iter().sum();
                if chosen.is_none_or(|(best_total, _)| total < best_total) {
                    chosen = Some((total, obj));
                    chosen_action.copy_from_slice(action);
                }
            }
        });
        let (_, value) = chosen.expect("a finite objective exists");
        action.copy_from_slice(&chosen_action);

        let hit_bound = dof
            .iter()
            .zip(action.iter())
            .zip(&bounds)
            .any(|((&i, &c), &(_, hi))| i >= 1 && c == hi);
        if !hit_bound {
            return Ok(value);
        }
        if extensions == MAX_BOUND_EXTENSIONS {
            return Err(Error::SearchBoundExhausted {
                state: format!("{dof:?}"),
                extensions,
            })
        }
        extensions += 1;
        stats.bound_extensions += 1;
        slack *= 2;
    }
}

/// Visits every candidate tuple in lexicographic order (node 0 most
/// significant), reusing `action` as the odometer buffer.
fn for_each_candidate(bounds: &[(u32, u32)], action: &mut [u32], mut f: impl FnMut(&[u32])) {
    for (slot, &(lo, _)) in action.iter_mut().zip(bounds) {
        *slot = lo;
    }
    loop {
        f(action);
        let mut pos = action.len();
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            if action[pos] < bounds[pos].1 {
                action[pos] += 1;
                for (slot, &(lo, _)) in action.iter_mut().zip(bounds).skip(pos + 1) {
                    *slot = lo;
                }
                break;
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn candidate_objective(
    rows: &[&NodeTransitionRow],
    dof: &[u32],
    action: &[u32],
    e_data: f64,
    e_ack_total: f64,
    values: &[f64],
    space: &StateSpace,
    jbuf: &mut [u32],
) -> std::result::Result<f64, f64> {
    let self_loop: f64 = rows.iter().zip(dof).map(|(r, &i)| r.probs[i as usize]).product();
    if self_loop >= 1.0 - 1e-15 {
        return Err(self_loop);
    }
    let action_sum: u64 = action.iter().map(|&c| c as u64).sum();
    jbuf.fill(0);
    let mut acc = 0.0f64;
    loop {
        if jbuf != dof {
            let prob: f64 =
                jbuf.iter().zip(rows).map(|(&jk, row)| row.probs[jk as usize]).product();
            if prob > 0.0 {
                acc += prob * values[space.index_of(jbuf)];
            }
        }
        let mut pos = jbuf.len();
        loop {
            if pos == 0 {
                let cost = e_data * action_sum as f64 + e_ack_total;
                return Ok((cost + acc) / (1.0 - self_loop));
            }
            pos -= 1;
            if jbuf[pos] < dof[pos] {
                jbuf[pos] += 1;
                jbuf[pos + 1..].fill(0);
                break;
            }
        }
    }
}

/// The combined-ARQ baseline: every round each node retransmits exactly its
/// outstanding packets.
pub fn carq_policy(cfg: &NetworkConfig) -> Result<Policy> {
    let space = StateSpace::new(cfg)?;
    Policy::from_fn(space, |dof| dof.to_vec())
}

/// Energy saved by the optimal coded policy relative to the combined-ARQ
/// baseline, in percent of the baseline.
pub fn percent_reduction(cfg: &NetworkConfig, e: &EnergyParams) -> Result<f64> {
    let baseline = evaluate_policy(
        &carq_policy(cfg)?,
        cfg,
        e,
        RoundCostSpec::energy(Scheme::Carq),
    )?
    .initial_value();
    if baseline == 0.0 {
        return Err(Error::InvalidConfig(
            "baseline completion energy is zero; reduction undefined".into(),
        ));
    }
    let coded = optimize(cfg, e)?.optimal_value;
    Ok(100.0 * (baseline - coded) / baseline)
}

/// Objective of an arbitrary valid `action` at `dof`, folding successor
/// values from `table` — the same quantity the optimizer minimizes, exposed
/// so external checks can audit near-ties.
pub fn action_objective(
    cfg: &NetworkConfig,
    e: &EnergyParams,
    spec: RoundCostSpec,
    dof: &[u32],
    action: &[u32],
    table: &ValueTable,
) -> Result<f64> {
    validate_config(cfg, e)?;
    let space = table.space();
    if space.num_nodes() != cfg.num_nodes || space.generation_size() != cfg.generation_size {
        return Err(Error::InvalidArgument(
            "value table does not match the configuration".into(),
        ));
    }
    if dof.len() != cfg.num_nodes {
        return Err(Error::InvalidArgument("state arity mismatch".into()));
    }
    let rows = build_rows(dof, action, &cfg.erasures)?;
    let action_sum: u64 = action.iter().map(|&c| c as u64).sum();
    let cost = spec.round_cost(e, cfg.num_nodes, action_sum);
    let mut jbuf = vec![0u32; dof.len()];
    fold_state_value(&rows, dof, cost, table.values(), space, &mut jbuf).map_err(|self_loop| {
        Error::NumericalDegeneracy { state: format!("{dof:?}"), self_loop }
    })
}
