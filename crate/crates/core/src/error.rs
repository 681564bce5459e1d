use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("state index {0} out of range")]
    StateOutOfRange(usize),
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(String, String),
    #[error("self-loop at state `{0}`")]
    SelfLoop(String),
    #[error("rate on edge ({from}, {to}) must be finite and strictly positive, got {rate}")]
    InvalidRate { from: String, to: String, rate: f64 },
    #[error("chain has no states")]
    Empty,
    #[error("chain is not irreducible: state `{0}` cannot reach every other state or be reached")]
    NotIrreducible(String),
    #[error("chain has {0} states, above the dense-solver limit of {1}")]
    TooLarge(usize, usize),
    #[error("length mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid probability measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid flow: {0}")]
    InvalidFlow(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("exponent magnitude {0} exceeds overflow guard")]
    Overflow(f64),
    #[error("negative argument to phi: q={q}, p={p}")]
    NegativeArgument { q: f64, p: f64 },
    #[error("stationary solve failed: {0}")]
    SingularSystem(String),
    #[error("chain is not reversible")]
    NotReversible,
    #[error("flow is not divergence-free (max |div| = {0:e})")]
    NonZeroDivergence(f64),
    #[error("condensation graph contains a cycle")]
    CyclicCondensation,
    #[error("class potential is path-dependent (residual {0:e})")]
    PathDependent(f64),
    #[error("optimal flow vanishes on class edge ({0}, {1})")]
    NonPositiveClassFlow(usize, usize),
    #[error("{solver} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
}

pub type Result<T> = std::result::Result<T, Error>;
