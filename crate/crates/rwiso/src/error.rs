use thiserror::Error;

/// Errors raised by the library. Negative answers ("not isomorphic", "no
/// separation") are ordinary values; variants here are either bad input,
/// resource caps, or contract violations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("ground set has {0} elements; at most 64 are supported")]
    GroundTooLarge(usize),

    #[error("ground set is empty")]
    EmptyGround,

    #[error("sets overlap: {0} and {1}")]
    Overlap(String, String),

    #[error("exhaustive search over {free} free elements exceeds the cap of {cap}")]
    SearchCap { free: usize, cap: usize },

    #[error("width evaluation at node {node} needs 2^{exponent} evaluations (cap 2^{cap})")]
    WidthCap { node: usize, exponent: usize, cap: usize },

    #[error("rank width of {which} exceeds {k}")]
    RankWidthExceeded { which: String, k: usize },

    #[error("invalid index {0}")]
    InvalidIndex(usize),

    #[error("{0}")]
    Precondition(String),

    #[error("assumption violated: {0}")]
    Assumption(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("parse error at {location}: {msg}")]
    Parse { location: String, msg: String },

    #[error("graph has {n} vertices; the brute-force oracle is limited to {cap}")]
    OracleCap { n: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
