//! Energy-optimal retransmission planning for network-coded sensor uplinks.
//!
//! K sensor nodes around one base station each upload a generation of M
//! packets over independent erasure channels, TDMA-style: every round each
//! unfinished node transmits a burst of coded packets and all nodes then
//! listen for one broadcast ack. Because coded packets are interchangeable,
//! a node needing i more degrees of freedom may transmit c ≥ i packets to
//! pre-empt erasures — burning transmit energy to save whole rounds (and
//! everyone's ack-listening energy).
//!
//! The joint dof vector forms an absorbing Markov chain, and the expected
//! completion cost of any retransmission policy solves in one pass
//! ([`evaluate_policy`]). [`optimize`] searches every state's action
//! exhaustively for the energy-optimal policy; [`simulate`] cross-checks
//! the analytics with a seeded Monte Carlo run; [`run_sweep`] tabulates how
//! much energy coding saves over plain combined-ARQ retransmission
//! ([`carq_policy`]) across channel and energy-model grids.

pub mod error;
pub mod experiments;
pub mod model;
pub mod monte_carlo;
pub mod optimizer;
pub mod solver;
pub mod transition;

pub use error::{Error, Result};
pub use experiments::{SweepKind, SweepRow, SweepSpec, generation_size_study, run_sweep};
pub use model::{
    CostKind, DEFAULT_STATE_SPACE_LIMIT, EnergyParams, NetworkConfig, Policy, Scheme, StateSpace,
    ValueTable, validate_config,
};
pub use monte_carlo::{MAX_ROUNDS_PER_TRIAL, RNG_ALGORITHM, SimulationStats, simulate};
pub use optimizer::{
    OptimizationResult, SearchStats, TIE_BREAK_REL_TOL, TIE_BREAK_RULE, action_objective,
    carq_policy, optimize, percent_reduction,
};
pub use solver::{RoundCostSpec, evaluate_policy, expected_throughput, per_accepted_packet};
pub use transition::{
    MIN_SUCCESSOR_PROB, NodeTransitionRow, joint_transition_prob, node_transition_prob,
    successor_distribution,
};
