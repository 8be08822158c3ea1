use thiserror::Error;

/// Errors raised by the puncturing toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unsupported modulation order {0} (expected one of 2, 4, 16, 64)")]
    UnsupportedOrder(usize),

    #[error("non-finite sample {re} + {im}j")]
    NonFiniteSample { re: f64, im: f64 },

    #[error("invalid SNR {0}: must be a non-negative number")]
    InvalidSnr(f64),

    #[error("invalid probability {name} = {value}")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("priors sum to {0}, expected 1")]
    PriorsNotNormalized(f64),

    #[error("symbol index {index} out of range for order {order}")]
    IndexOutOfRange { index: usize, order: usize },

    #[error("symbol {mapping} is not a member of the region of symbol {region}")]
    NotInRegion { region: usize, mapping: usize },

    #[error("mapper {mapper} cannot be used with URLLC order {n} and eMBB order {m}")]
    InvalidMapper { mapper: &'static str, n: usize, m: usize },

    #[error("invalid load profile: {0}")]
    InvalidProfile(String),

    #[error("empty candidate set")]
    EmptyCandidates,

    #[error("block length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("segmented search infeasible: segment {segment} has no admissible candidate")]
    InfeasibleOrdering { segment: usize },

    #[error("empty sample set")]
    EmptySamples,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
