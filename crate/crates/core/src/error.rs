use thiserror::Error;

/// Errors shared across the solver suite.
#[derive(Debug, Error)]
pub enum Error {
    /// An assignment is missing a value for a vertex that is still alive.
    #[error("no spin assigned to vertex {vertex}")]
    InvalidAssignment { vertex: u32 },

    /// An operation referenced an edge that is not present in the instance.
    #[error("edge ({u}, {v}) is not present in the instance")]
    InvalidEdge { u: u32, v: u32 },

    /// An operation referenced a vertex that is dead or out of range.
    #[error("vertex {vertex} is not alive in the instance")]
    InvalidVertex { vertex: u32 },

    /// A sampled or supplied action is outside the current action space.
    #[error("invalid action: {0}")]
    InvalidAction(String),

    /// A reconstruction map referenced an anchor that was never assigned.
    #[error("reconstruction record for vertex {eliminated} references unassigned anchor {anchor}")]
    CorruptMap { eliminated: u32, anchor: u32 },

    /// The operation only supports zero external fields.
    #[error("operation requires all external fields to be zero")]
    UnsupportedFields,

    /// A size guard was exceeded (brute force, statevector).
    #[error("instance with {n} vertices exceeds the limit of {max} for this operation")]
    SizeLimit { n: usize, max: usize },

    /// A selection was requested from an empty correlation vector.
    #[error("cannot select an edge: the correlation vector is empty")]
    EmptyCorrelations,

    /// Policy parameters do not cover a live vertex pair.
    #[error("policy parameters do not cover pair ({u}, {v})")]
    ParameterCoverage { u: u32, v: u32 },

    /// A run or episode budget below 1 was requested.
    #[error("invalid budget: {0}")]
    InvalidBudget(String),

    /// Batch of size zero handed to an update step.
    #[error("invalid batch: {0}")]
    InvalidBatch(String),

    /// Graph generation parameters that cannot yield a simple regular graph.
    #[error("infeasible parameters: {0}")]
    InfeasibleParameters(String),

    /// A catalogued structure was requested that is not embedded.
    #[error("{0}")]
    NotAvailable(String),

    /// An instance violated a structural invariant (self-loop, zero weight, ...).
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// Trainer/solver configuration error.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
