//! Exact expected cost-to-absorption for a fixed policy.
//!
//! Every round either repeats the current joint state (all transmissions of
//! every unfinished node erased) or strictly lowers the total outstanding
//! dof, so the states form a DAG once the self-loop is folded into a
//! geometric factor:
//!
//!   E_I = (cost(I) + Σ_{J < I} P_IJ · E_J) / (1 − P_II)
//!
//! and a single pass in ascending dof-sum order solves the whole chain with
//! no fixed-point iteration.

use crate::error::{Error, Result};
use crate::model::{
    CostKind, EnergyParams, NetworkConfig, Policy, Scheme, StateSpace, ValueTable, validate_config,
};
use crate::transition::NodeTransitionRow;

/// Self-loop probabilities at or above 1 − this margin are treated as
/// numerically absorbing and rejected.
const SELF_LOOP_MARGIN: f64 = 1e-15;

/// Selects what a round costs: energy under one of the two schemes, a flat
/// count of rounds, or TDMA slots (one per packet plus the ack slot).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundCostSpec {
    pub cost_kind: CostKind,
    pub scheme: Scheme,
}

impl RoundCostSpec {
    pub fn energy(scheme: Scheme) -> Self {
        Self { cost_kind: CostKind::Energy, scheme }
    }

    pub fn rounds() -> Self {
        Self { cost_kind: CostKind::Rounds, scheme: Scheme::Nc }
    }

    pub fn slots() -> Self {
        Self { cost_kind: CostKind::Slots, scheme: Scheme::Nc }
    }

    /// Cost of one round in which `action_sum` packets are transmitted.
    pub fn round_cost(&self, e: &EnergyParams, num_nodes: usize, action_sum: u64) -> f64 {
        match self.cost_kind {
            // every node pays for ack reception each round, finished or not
            CostKind::Energy => {
                self.scheme_e_data(e) * action_sum as f64 + e.e_ack() * num_nodes as f64
            }
            CostKind::Rounds => 1.0,
            CostKind::Slots => action_sum as f64 + 1.0,
        }
    }

    fn scheme_e_data(&self, e: &EnergyParams) -> f64 {
        e.e_data(self.scheme)
    }
}

/// Folds one state's row into its expected value given the (already final)
/// values of all strictly smaller states. `Err` carries the self-loop
/// probability when it is numerically 1.
pub(crate) fn fold_state_value(
    rows: &[NodeTransitionRow],
    dof: &[u32],
    round_cost: f64,
    values: &[f64],
    space: &StateSpace,
    j: &mut [u32],
) -> std::result::Result<f64, f64> {
    let self_loop: f64 = rows.iter().zip(dof).map(|(r, &i)| r.probs[i as usize]).product();
    if self_loop >= 1.0 - SELF_LOOP_MARGIN {
        return Err(self_loop);
    }
    j.fill(0);
    let mut acc = 0.0f64;
    loop {
        if j != dof {
            let prob: f64 = j.iter().zip(rows).map(|(&jk, row)| row.probs[jk as usize]).product();
            if prob > 0.0 {
                acc += prob * values[space.index_of(j)];
            }
        }
        let mut pos = j.len();
        loop {
            if pos == 0 {
                return Ok((round_cost + acc) / (1.0 - self_loop));
            }
            pos -= 1;
            if j[pos] < dof[pos] {
                j[pos] += 1;
                j[pos + 1..].fill(0);
                break;
            }
        }
    }
}

pub(crate) fn build_rows(dof: &[u32], action: &[u32], erasures: &[f64]) -> Result<Vec<NodeTransitionRow>> {
    dof.iter()
        .zip(action)
        .zip(erasures)
        .map(|((&i, &c), &p)| NodeTransitionRow::new(i, c, p))
        .collect()
}

/// Expected cumulative cost from every state to absorption under `policy`.
pub fn evaluate_policy(
    policy: &Policy,
    cfg: &NetworkConfig,
    e: &EnergyParams,
    spec: RoundCostSpec,
) -> Result<ValueTable> {
    validate_config(cfg, e)?;
    policy.validate(cfg)?;
    let space = policy.space().clone();
    let order = space.indices_by_dof_sum();
    let mut values = vec![0.0f64; space.num_states()];
    let mut dof = vec![0u32; cfg.num_nodes];
    let mut j = vec![0u32; cfg.num_nodes];
    for &idx in &order[1..] {
        space.decode_into(idx, &mut dof);
        let action = policy.action(idx);
        let rows = build_rows(&dof, action, &cfg.erasures)?;
        let action_sum: u64 = action.iter().map(|&c| c as u64).sum();
        let cost = spec.round_cost(e, cfg.num_nodes, action_sum);
        values[idx] = fold_state_value(&rows, &dof, cost, &values, &space, &mut j)
            .map_err(|self_loop| Error::NumericalDegeneracy {
                state: format!("{dof:?}"),
                self_loop,
            })?;
    }
    Ok(ValueTable::new(space, values, spec.cost_kind))
}

/// Normalizes a completion cost by the K·M packets delivered.
pub fn per_accepted_packet(value: f64, cfg: &NetworkConfig) -> f64 {
    value / (cfg.num_nodes as f64 * cfg.generation_size as f64)
}

/// K·M accepted packets divided by the expected slot count to completion.
pub fn expected_throughput(policy: &Policy, cfg: &NetworkConfig, e: &EnergyParams) -> Result<f64> {
    let slots = evaluate_policy(policy, cfg, e, RoundCostSpec::slots())?;
    Ok(cfg.num_nodes as f64 * cfg.generation_size as f64 / slots.initial_value())
}
