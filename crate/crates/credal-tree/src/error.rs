//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Broad error class, used by callers that map errors onto process exit
/// codes or retry policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// The input model, document, or query is malformed or inconsistent.
    Validation,
    /// A numerical precondition failed (enumeration budget, zero-probability
    /// conditioning in a precise oracle, broken root bracket).
    Numerical,
}

/// Everything that can go wrong while building models or answering queries.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty state space")]
    EmptyStateSpace,
    #[error("duplicate state label `{0}`")]
    DuplicateState(String),
    #[error("state space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("expected {expected} values for this space, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("gamble value at position {0} is not finite")]
    NonFiniteValue(usize),
    #[error("probability {value} at position {index} is negative")]
    NegativeProbability { index: usize, value: f64 },
    #[error("mass function sums to {sum}, further than 1e-12 from 1")]
    NotNormalized { sum: f64 },
    #[error("credal set has no vertices")]
    EmptyCredalSet,
    #[error("IDM caution parameter must be positive, got {0}")]
    NonPositiveHyper(f64),

    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error("node `{0}` not found")]
    UnknownNode(String),
    #[error("state `{state}` does not belong to the space of node `{node}`")]
    UnknownState { node: String, state: String },
    #[error("tree has no root: every node lists a parent")]
    NoRoot,
    #[error("multiple roots: `{0}` and `{1}` both lack a parent")]
    MultipleRoots(String, String),
    #[error("node `{0}` is not reachable from the root (cycle or detached component)")]
    Unreachable(String),
    #[error("root node `{0}` must carry a marginal model, not a conditional table")]
    RootModelKind(String),
    #[error("non-root node `{0}` must carry a conditional table keyed by its parent's states")]
    ConditionalModelKind(String),
    #[error("node `{node}` is missing a conditional model for parent state `{state}`")]
    MissingConditional { node: String, state: String },
    #[error("node `{node}`: {source}")]
    NodeModel {
        node: String,
        #[source]
        source: Box<Error>,
    },
    #[error("interval models need a binary space; node `{node}` has {arity} states")]
    IntervalArity { node: String, arity: usize },
    #[error("inconsistent interval bounds on node `{node}`: {detail}")]
    IntervalBounds { node: String, detail: String },
    #[error("target `{0}` is instantiated by the evidence")]
    TargetInstantiated(String),
    #[error("tolerance must be positive, got {0}")]
    NonPositiveTolerance(f64),

    #[error("root bracket violated: f({lo}) = {f_lo}, f({hi}) = {f_hi}")]
    BracketViolation {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
    #[error("enumeration needs {required} selections, over the budget of {budget}")]
    BudgetExceeded { required: u128, budget: u64 },
    #[error("node `{0}` is imprecise (more than one vertex); this oracle needs precise models")]
    NotPrecise(String),
    #[error("evidence has probability zero under every model selection")]
    ZeroEvidenceProbability,
    #[error("node `{0}` has more than one child; this oracle needs a chain")]
    NotAChain(String),
    #[error("infeasible shape: {0}")]
    InfeasibleShape(String),

    #[error("sequence pair lengths differ: {generative} generative vs {observed} observed")]
    SequenceLengthMismatch { generative: usize, observed: usize },
    #[error("empty sequence")]
    EmptySequence,
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("symbol `{0}` is outside the alphabet")]
    UnknownSymbol(String),
    #[error("corruption rate must lie in [0, 1], got {0}")]
    InvalidCorruptionRate(f64),

    #[error("document parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Classifies the error for exit-code mapping.
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::BracketViolation { .. }
            | Error::BudgetExceeded { .. }
            | Error::NotPrecise(_)
            | Error::ZeroEvidenceProbability
            | Error::NotAChain(_) => ErrorClass::Numerical,
            _ => ErrorClass::Validation,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}
