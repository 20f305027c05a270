//! Seeded round-by-round simulation of a policy — the independent oracle for
//! the analytic solver, and the only place realization-level statistics
//! (per-trial throughput) come from.
//!
//! Trials use ChaCha12 with a per-trial key derived from (seed, trial index),
//! so results do not depend on execution order and are reproducible across
//! platforms.

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::model::{EnergyParams, NetworkConfig, Policy, Scheme, validate_config};

/// Generator recorded in simulation output so runs can be reproduced by any
/// implementation of the same algorithm.
pub const RNG_ALGORITHM: &str = "chacha12";

/// A trial exceeding this many rounds aborts the simulation (it indicates an
/// erasure probability indistinguishable from 1).
pub const MAX_ROUNDS_PER_TRIAL: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationStats {
    pub trials: u64,
    pub mean_energy: f64,
    /// Sample standard deviation (n−1) of per-trial completion energy.
    pub std_energy: f64,
    /// 2.576·std/√n — the 99% normal confidence half-width on mean_energy.
    pub ci99_halfwidth: f64,
    pub mean_rounds: f64,
    pub mean_slots: f64,
    /// Mean of the per-trial ratios K·M/slots (realization-level throughput).
    pub mean_throughput: f64,
    pub seed: u64,
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&trial.to_le_bytes());
    ChaCha12Rng::from_seed(key)
}

/// Uniform in [0, 1) from the top 53 bits, so the mapping is exact and
/// platform-independent.
fn uniform(rng: &mut ChaCha12Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Runs `trials` independent completions of the uplink under `policy`,
/// starting each at the all-M state.
///
/// Per round, node k transmits c_k coded packets of which each survives with
/// probability 1−p_k; surviving packets reduce its outstanding dof. Energy,
/// slot and round counts accumulate exactly as in the analytic cost model.
pub fn simulate(
    policy: &Policy,
    cfg: &NetworkConfig,
    e: &EnergyParams,
    scheme: Scheme,
    trials: u64,
    seed: u64,
) -> Result<SimulationStats> {
    validate_config(cfg, e)?;
    policy.validate(cfg)?;
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }

    let space = policy.space();
    let e_data = e.e_data(scheme);
    let e_ack_round = e.e_ack() * cfg.num_nodes as f64;
    let packets = cfg.num_nodes as f64 * cfg.generation_size as f64;

    // Welford for the energy moments; plain means for the rest.
    let mut mean_energy = 0.0f64;
    let mut m2_energy = 0.0f64;
    let mut sum_rounds = 0.0f64;
    let mut sum_slots = 0.0f64;
    let mut sum_throughput = 0.0f64;

    let mut dof = vec![0u32; cfg.num_nodes];
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial);
        dof.fill(cfg.generation_size);
        let mut idx = space.initial_index();
        let mut energy = 0.0f64;
        let mut slots = 0u64;
        let mut rounds = 0u64;
        while idx != 0 {
            if rounds == MAX_ROUNDS_PER_TRIAL {
                return Err(Error::SimulationStalled { trial, limit: MAX_ROUNDS_PER_TRIAL });
            }
            let action = policy.action(idx);
            let action_sum: u64 = action.iter().map(|&c| c as u64).sum();
            energy += e_data * action_sum as f64 + e_ack_round;
            slots += action_sum + 1;
            rounds += 1;
            for (k, &c) in action.iter().enumerate() {
                if dof[k] == 0 {
                    continue;
                }
                let p = cfg.erasures[k];
                let mut survivors = 0u32;
                for _ in 0..c {
                    if uniform(&mut rng) >= p {
                        survivors += 1;
                    }
                }
                dof[k] = dof[k].saturating_sub(survivors);
            }
            idx = space.index_of(&dof);
        }

        let n = (trial + 1) as f64;
        let delta = energy - mean_energy;
        mean_energy += delta / n;
        m2_energy += delta * (energy - mean_energy);
        sum_rounds += rounds as f64;
        sum_slots += slots as f64;
        sum_throughput += packets / slots as f64;
    }

    let n = trials as f64;
    let std_energy = if trials > 1 { (m2_energy / (n - 1.0)).sqrt() } else { 0.0 };
    Ok(SimulationStats {
        trials,
        mean_energy,
        std_energy,
        ci99_halfwidth: 2.576 * std_energy / n.sqrt(),
        mean_rounds: sum_rounds / n,
        mean_slots: sum_slots / n,
        mean_throughput: sum_throughput / n,
        seed,
    })
}
