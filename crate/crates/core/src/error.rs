use thiserror::Error;

/// Errors surfaced by the analytic solver, the optimizer and the simulator.
///
/// Everything here is a domain/validation failure: callers embedding the
/// library (e.g. the CLI) can map the whole enum to a single "invalid input
/// or degenerate configuration" exit path, distinct from I/O failures.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration invariant does not hold (bad K/M/p/energy values).
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An operation was called with arguments outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A policy violates its structural invariants or does not fit the
    /// configuration it is being used with.
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    /// The joint state space (M+1)^K exceeds the configured guard.
    #[error(
        "state space has {states} states, exceeding the limit of {limit}; \
         reduce the generation size M or the node count K"
    )]
    StateSpaceTooLarge { states: u128, limit: usize },

    /// A state's self-loop probability is numerically indistinguishable from 1,
    /// so the expected cost to absorption cannot be computed.
    #[error("state {state}: self-loop probability {self_loop} leaves no progress")]
    NumericalDegeneracy { state: String, self_loop: f64 },

    /// The per-state search kept selecting actions on its upper bound even
    /// after the maximum number of bound extensions.
    #[error("state {state}: search bound still active after {extensions} extensions")]
    SearchBoundExhausted { state: String, extensions: u32 },

    /// A simulation trial ran for an implausible number of rounds without
    /// absorbing (indicates an erasure probability essentially equal to 1).
    #[error("trial {trial} exceeded {limit} rounds without completing")]
    SimulationStalled { trial: u64, limit: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
