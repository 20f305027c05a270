//! Shared domain types: network/energy parameters, the joint dof state space,
//! retransmission policies and value tables.
//!
//! A *joint state* is the vector (i_1, …, i_K) of degrees of freedom (coded
//! packets) the base station still needs from each node before it can decode
//! every generation. States are stored as `&[u32]` slices; [`StateSpace`]
//! maps between slices and dense indices so policies and value tables can be
//! flat vectors.

use crate::error::{Error, Result};

/// Hard cap on (M+1)^K unless overridden per config.
pub const DEFAULT_STATE_SPACE_LIMIT: usize = 1_000_000;

/// Star-topology uplink: K sensor nodes, M packets per generation, and one
/// i.i.d. packet-erasure probability per node.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    /// Number of sensor nodes K.
    pub num_nodes: usize,
    /// Packets per node generation M.
    pub generation_size: u32,
    /// Per-node packet erasure probabilities p_k, `num_nodes` entries in [0, 1).
    pub erasures: Vec<f64>,
    /// Guard on the joint state count (M+1)^K.
    pub state_space_limit: usize,
}

impl NetworkConfig {
    pub fn new(num_nodes: usize, generation_size: u32, erasures: Vec<f64>) -> Self {
        Self {
            num_nodes,
            generation_size,
            erasures,
            state_space_limit: DEFAULT_STATE_SPACE_LIMIT,
        }
    }

    /// (M+1)^K without overflow; `None` if it exceeds `u128`/`usize` range.
    pub fn num_states(&self) -> Option<usize> {
        let base = self.generation_size as u128 + 1;
        let mut n: u128 = 1;
        for _ in 0..self.num_nodes {
            n = n.checked_mul(base)?;
        }
        usize::try_from(n).ok()
    }
}

/// Identifies which per-packet transmission energy applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Network-coded retransmissions (per-packet energy (1+β)·e_data_carq).
    Nc,
    /// Plain combined-ARQ baseline (per-packet energy e_data_carq).
    Carq,
}

/// What a value table measures per round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostKind {
    /// e_data·Σc_k + e_ack·K per round.
    Energy,
    /// 1 per round.
    Rounds,
    /// Σc_k data slots plus one ack slot per round.
    Slots,
}

/// Energy model. Everything is derived from the baseline per-packet energy:
/// coded packets cost (1+β)·e_data_carq, and receiving the per-round ack
/// costs α·e_data_carq per node under both schemes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParams {
    /// Energy to transmit one uncoded data packet (the unit of all results).
    pub e_data_carq: f64,
    /// Ack reception energy as a multiple of `e_data_carq`.
    pub alpha: f64,
    /// Fractional per-packet overhead of coding.
    pub beta: f64,
}

impl EnergyParams {
    pub fn new(e_data_carq: f64, alpha: f64, beta: f64) -> Self {
        Self { e_data_carq, alpha, beta }
    }

    /// Parameters in units of e_data_carq = 1.
    pub fn unit(alpha: f64, beta: f64) -> Self {
        Self::new(1.0, alpha, beta)
    }

    pub fn e_data_nc(&self) -> f64 {
        (1.0 + self.beta) * self.e_data_carq
    }

    pub fn e_ack(&self) -> f64 {
        self.alpha * self.e_data_carq
    }

    pub fn e_data(&self, scheme: Scheme) -> f64 {
        match scheme {
            Scheme::Nc => self.e_data_nc(),
            Scheme::Carq => self.e_data_carq,
        }
    }
}

/// Checks every invariant of the configuration and energy parameters.
pub fn validate_config(cfg: &NetworkConfig, e: &EnergyParams) -> Result<()> {
    if cfg.num_nodes < 1 {
        return Err(Error::InvalidConfig("num_nodes must be at least 1".into()));
    }
    if cfg.generation_size < 1 {
        return Err(Error::InvalidConfig("generation_size must be at least 1".into()));
    }
    if cfg.erasures.len() != cfg.num_nodes {
        return Err(Error::InvalidConfig(format!(
            "expected {} erasure probabilities, got {}",
            cfg.num_nodes,
            cfg.erasures.len()
        )));
    }
    for (k, &p) in cfg.erasures.iter().enumerate() {
        if !p.is_finite() || !(0.0..1.0).contains(&p) {
            // p = 1 would make the all-zeros state unreachable.
            return Err(Error::InvalidConfig(format!(
                "p_{} = {p}: must lie in [0, 1); a channel that never delivers \
                 makes absorption impossible",
                k + 1
            )));
        }
    }
    match cfg.num_states() {
        Some(n) if n <= cfg.state_space_limit => {}
        Some(n) => {
            return Err(Error::StateSpaceTooLarge {
                states: n as u128,
                limit: cfg.state_space_limit,
            });
        }
        None => {
            return Err(Error::StateSpaceTooLarge {
                states: u128::MAX,
                limit: cfg.state_space_limit,
            });
        }
    }
    if !e.e_data_carq.is_finite() || e.e_data_carq < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "e_data_carq = {}: must be finite and non-negative",
            e.e_data_carq
        )));
    }
    if !e.alpha.is_finite() || e.alpha <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "alpha = {}: must be finite and positive",
            e.alpha
        )));
    }
    if !e.beta.is_finite() || e.beta < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "beta = {}: must be finite and non-negative",
            e.beta
        )));
    }
    if e.e_data_carq == 0.0 {
        // e_ack = α·e_data_carq would then vanish too and every policy would
        // cost exactly zero.
        return Err(Error::InvalidConfig(
            "e_data_carq = 0: objective would be identically zero".into(),
        ));
    }
    Ok(())
}

/// Dense index map over all (M+1)^K joint states.
///
/// Index order is lexicographic in the dof tuple with node 0 most
/// significant, so index 0 is the absorbing all-zeros state and the last
/// index is the initial all-M state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    num_nodes: usize,
    generation_size: u32,
    num_states: usize,
}

impl StateSpace {
    pub fn new(cfg: &NetworkConfig) -> Result<Self> {
        if cfg.num_nodes < 1 || cfg.generation_size < 1 {
            return Err(Error::InvalidConfig(
                "state space requires num_nodes >= 1 and generation_size >= 1".into(),
            ));
        }
        let num_states = match cfg.num_states() {
            Some(n) if n <= cfg.state_space_limit => n,
            Some(n) => {
                return Err(Error::StateSpaceTooLarge {
                    states: n as u128,
                    limit: cfg.state_space_limit,
                });
            }
            None => {
                return Err(Error::StateSpaceTooLarge {
                    states: u128::MAX,
                    limit: cfg.state_space_limit,
                });
            }
        };
        Ok(Self {
            num_nodes: cfg.num_nodes,
            generation_size: cfg.generation_size,
            num_states,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn generation_size(&self) -> u32 {
        self.generation_size
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    /// Index of the all-M starting state.
    pub fn initial_index(&self) -> usize {
        self.num_states - 1
    }

    pub fn index_of(&self, dof: &[u32]) -> usize {
        debug_assert_eq!(dof.len(), self.num_nodes);
        let base = self.generation_size as usize + 1;
        let mut idx = 0usize;
        for &i in dof {
            debug_assert!(i <= self.generation_size);
            idx = idx * base + i as usize;
        }
        idx
    }

    pub fn decode(&self, index: usize) -> Vec<u32> {
        let mut dof = vec![0u32; self.num_nodes];
        self.decode_into(index, &mut dof);
        dof
    }

    pub fn decode_into(&self, index: usize, dof: &mut [u32]) {
        debug_assert!(index < self.num_states);
        debug_assert_eq!(dof.len(), self.num_nodes);
        let base = self.generation_size as usize + 1;
        let mut rest = index;
        for slot in dof.iter_mut().rev() {
            *slot = (rest % base) as u32;
            rest /= base;
        }
    }

    pub fn dof_sum(&self, index: usize) -> u32 {
        let base = self.generation_size as usize + 1;
        let mut rest = index;
        let mut sum = 0u32;
        while rest > 0 {
            sum += (rest % base) as u32;
            rest /= base;
        }
        sum
    }

    /// All indices ordered by ascending dof sum (ties by index).
    ///
    /// Every transition out of a state either self-loops or strictly lowers
    /// the dof sum, so this is a valid evaluation order for the one-pass
    /// solver: index 0 (the absorbing state) comes first.
    pub fn indices_by_dof_sum(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.num_states).collect();
        order.sort_by_key(|&idx| (self.dof_sum(idx), idx));
        order
    }
}

/// Action table: the number of coded packets each node transmits in the next
/// round, as a function of the full joint state.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    space: StateSpace,
    /// Row-major: `actions[idx * K ..][.. K]` is the action at state `idx`.
    /// The absorbing row stays all-zero.
    actions: Vec<u32>,
}

impl Policy {
    /// Builds a policy by asking `f` for the action at every transient state,
    /// checking the structural invariants (c_k = 0 exactly when i_k = 0, and
    /// c_k ≥ i_k otherwise).
    pub fn from_fn(space: StateSpace, mut f: impl FnMut(&[u32]) -> Vec<u32>) -> Result<Self> {
        let k = space.num_nodes();
        let mut actions = vec![0u32; space.num_states() * k];
        let mut dof = vec![0u32; k];
        for idx in 1..space.num_states() {
            space.decode_into(idx, &mut dof);
            let action = f(&dof);
            check_action(&dof, &action)?;
            actions[idx * k..(idx + 1) * k].copy_from_slice(&action);
        }
        Ok(Self { space, actions })
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn action(&self, index: usize) -> &[u32] {
        let k = self.space.num_nodes();
        &self.actions[index * k..(index + 1) * k]
    }

    /// The whole table, row-major by state index (absorbing row included,
    /// all zeros).
    pub fn actions(&self) -> &[u32] {
        &self.actions
    }

    pub(crate) fn set_action(&mut self, index: usize, action: &[u32]) {
        let k = self.space.num_nodes();
        self.actions[index * k..(index + 1) * k].copy_from_slice(action);
    }

    pub(crate) fn zeroed(space: StateSpace) -> Self {
        let len = space.num_states() * space.num_nodes();
        Self { space, actions: vec![0; len] }
    }

    /// Checks that the policy fits `cfg` and satisfies the per-state
    /// structural invariants.
    pub fn validate(&self, cfg: &NetworkConfig) -> Result<()> {
        if self.space.num_nodes() != cfg.num_nodes
            || self.space.generation_size() != cfg.generation_size
        {
            return Err(Error::InvalidPolicy(format!(
                "policy is for K={}, M={} but the configuration has K={}, M={}",
                self.space.num_nodes(),
                self.space.generation_size(),
                cfg.num_nodes,
                cfg.generation_size
            )));
        }
        let mut dof = vec![0u32; cfg.num_nodes];
        for idx in 1..self.space.num_states() {
            self.space.decode_into(idx, &mut dof);
            check_action(&dof, self.action(idx))?;
        }
        Ok(())
    }
}

fn check_action(dof: &[u32], action: &[u32]) -> Result<()> {
    if action.len() != dof.len() {
        return Err(Error::InvalidPolicy(format!(
            "action {action:?} at state {dof:?} has wrong arity"
        )));
    }
    for (k, (&i, &c)) in dof.iter().zip(action).enumerate() {
        if i == 0 && c != 0 {
            return Err(Error::InvalidPolicy(format!(
                "state {dof:?}: node {} is finished but the action sends {c} packets",
                k + 1
            )));
        }
        if i >= 1 && c < i {
            return Err(Error::InvalidPolicy(format!(
                "state {dof:?}: node {} needs {i} dof but the action sends only {c} packets",
                k + 1
            )));
        }
    }
    Ok(())
}

/// Expected cumulative cost to absorption from every state under some policy.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    space: StateSpace,
    values: Vec<f64>,
    cost_kind: CostKind,
}

impl ValueTable {
    pub(crate) fn new(space: StateSpace, values: Vec<f64>, cost_kind: CostKind) -> Self {
        debug_assert_eq!(values.len(), space.num_states());
        Self { space, values, cost_kind }
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn cost_kind(&self) -> CostKind {
        self.cost_kind
    }

    pub fn value(&self, index: usize) -> f64 {
        self.values[index]
    }

    /// Value at the all-M starting state.
    pub fn initial_value(&self) -> f64 {
        self.values[self.space.initial_index()]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_reference_config() {
        let cfg = NetworkConfig::new(2, 4, vec![0.2, 0.4]);
        validate_config(&cfg, &EnergyParams::unit(1.0, 0.0)).unwrap();
    }

    #[test]
    fn accepts_lossless_single_node() {
        let cfg = NetworkConfig::new(1, 1, vec![0.0]);
        validate_config(&cfg, &EnergyParams::unit(1.0, 0.0)).unwrap();
    }

    #[test]
    fn rejects_certain_erasure() {
        let cfg = NetworkConfig::new(2, 4, vec![0.2, 1.0]);
        let err = validate_config(&cfg, &EnergyParams::unit(1.0, 0.0)).unwrap_err();
        assert!(err.to_string().contains("absorption impossible"), "{err}");
    }

    #[test]
    fn rejects_wrong_erasure_count_and_bad_energy() {
        let cfg = NetworkConfig::new(2, 4, vec![0.2]);
        assert!(validate_config(&cfg, &EnergyParams::unit(1.0, 0.0)).is_err());

        let cfg = NetworkConfig::new(2, 4, vec![0.2, 0.4]);
        assert!(validate_config(&cfg, &EnergyParams::unit(0.0, 0.0)).is_err());
        assert!(validate_config(&cfg, &EnergyParams::unit(-1.0, 0.0)).is_err());
        assert!(validate_config(&cfg, &EnergyParams::unit(1.0, -0.1)).is_err());
        assert!(validate_config(&cfg, &EnergyParams::new(0.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn state_space_guard() {
        let mut cfg = NetworkConfig::new(2, 4, vec![0.2, 0.4]);
        cfg.state_space_limit = 24;
        let err = validate_config(&cfg, &EnergyParams::unit(1.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::StateSpaceTooLarge { states: 25, .. }), "{err}");
    }

    #[test]
    fn energy_derivations() {
        let e = EnergyParams::new(2.0, 1.5, 0.25);
        assert_eq!(e.e_ack(), 3.0);
        assert_eq!(e.e_data_nc(), 2.5);
        assert_eq!(e.e_data(Scheme::Carq), 2.0);
        assert_eq!(e.e_data(Scheme::Nc), 2.5);
        // alpha/beta are stored, not recomputed, so they read back exactly.
        assert_eq!(e.alpha, 1.5);
        assert_eq!(e.beta, 0.25);
    }

    #[test]
    fn index_round_trip_and_order() {
        let cfg = NetworkConfig::new(2, 4, vec![0.2, 0.4]);
        let space = StateSpace::new(&cfg).unwrap();
        assert_eq!(space.num_states(), 25);
        assert_eq!(space.index_of(&[0, 0]), 0);
        assert_eq!(space.index_of(&[4, 4]), 24);
        assert_eq!(space.initial_index(), 24);
        for idx in 0..space.num_states() {
            let dof = space.decode(idx);
            assert_eq!(space.index_of(&dof), idx);
            assert_eq!(space.dof_sum(idx), dof.iter().sum::<u32>());
        }
        // node 0 is the most significant digit
        assert_eq!(space.decode(5), vec![1, 0]);
        assert_eq!(space.decode(1), vec![0, 1]);
    }

    #[test]
    fn dof_sum_order_starts_at_absorbing_state() {
        let cfg = NetworkConfig::new(3, 2, vec![0.1, 0.2, 0.3]);
        let space = StateSpace::new(&cfg).unwrap();
        let order = space.indices_by_dof_sum();
        assert_eq!(order.len(), 27);
        assert_eq!(order[0], 0);
        let sums: Vec<u32> = order.iter().map(|&i| space.dof_sum(i)).collect();
        assert!(sums.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn policy_invariants_enforced() {
        let cfg = NetworkConfig::new(2, 2, vec![0.3, 0.3]);
        let space = StateSpace::new(&cfg).unwrap();
        let id = Policy::from_fn(space.clone(), |dof| dof.to_vec()).unwrap();
        id.validate(&cfg).unwrap();
        assert_eq!(id.action(space.index_of(&[2, 1])), &[2, 1]);
        assert_eq!(id.action(space.index_of(&[0, 2])), &[0, 2]);

        // sending fewer packets than outstanding dof is rejected
        assert!(Policy::from_fn(space.clone(), |dof| vec![0; dof.len()]).is_err());
        // a finished node transmitting is rejected
        assert!(Policy::from_fn(space, |dof| dof.iter().map(|_| 1).collect()).is_err());
    }

    #[test]
    fn policy_config_mismatch() {
        let cfg = NetworkConfig::new(2, 2, vec![0.3, 0.3]);
        let other = NetworkConfig::new(2, 3, vec![0.3, 0.3]);
        let space = StateSpace::new(&cfg).unwrap();
        let id = Policy::from_fn(space, |dof| dof.to_vec()).unwrap();
        assert!(id.validate(&other).is_err());
    }
}
