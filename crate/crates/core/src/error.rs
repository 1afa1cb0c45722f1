//! Error types, one enum per layer, unified by [`Error`].

use thiserror::Error;

/// A single violated scenario invariant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioIssue {
    #[error("base station {bs} is over-committed: guaranteed shares sum to {total}")]
    OverCommitted { bs: String, total: f64 },
    #[error("slice {slice}: overall share {overall} != guaranteed {guaranteed} + excess {excess}")]
    ShareMismatch {
        slice: String,
        overall: f64,
        guaranteed: f64,
        excess: f64,
    },
    #[error("slice {slice}: user priorities sum to {sum} (expected 1, or 0 for an inelastic-only slice)")]
    PriorityMismatch { slice: String, sum: f64 },
    #[error("user {user} references unknown {kind} `{target}`")]
    DanglingReference {
        user: String,
        kind: &'static str,
        target: String,
    },
    #[error("slice {slice}: guaranteed shares given for {got} base stations, expected {expected}")]
    ShapeMismatch {
        slice: String,
        got: usize,
        expected: usize,
    },
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("user {user} has zero minimum rate and zero priority")]
    UnclassifiableUser { user: String },
    #[error("invalid {what}: {value}")]
    InvalidValue { what: String, value: f64 },
}

/// Every invariant violation found while validating one scenario.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{} scenario invariant(s) violated: {}", .0.len(), join(.0))]
pub struct ValidationErrors(pub Vec<ScenarioIssue>);

fn join(issues: &[ScenarioIssue]) -> String {
    issues
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AllocationError {
    #[error("base station {bs} has no active bids")]
    DegenerateResource { bs: usize },
    #[error("slice {slice} holds a positive fraction at base station {bs} but bids zero there")]
    ZeroBidSlice { slice: usize, bs: usize },
    #[error("base station {bs} is overloaded but no slice bids above its guarantee (shares over-committed?)")]
    NoExcessBid { bs: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error("slice {slice}: minimum requirement at base station {bs} cannot be met by any finite bid")]
    DivergentRequirement { slice: usize, bs: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("slice {slice}: minimum rates cannot be met within the budget")]
    Infeasible { slice: usize },
    #[error("slice {slice}: best response not attained (requirement at base station {bs} needs a positive bid but the weight floor is zero)")]
    NotAttained { slice: usize, bs: usize },
    #[error("{solver} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConverged {
        solver: String,
        iterations: usize,
        residual: f64,
    },
    #[error("user {user}: best-response/GREET weight ratio {ratio} outside the (1+eps) bound")]
    BoundViolated { user: usize, ratio: f64 },
    #[error("slice {slice} mixes traffic classes; the small-slice bound does not cover it")]
    NotCovered { slice: usize },
    #[error("invalid asynchronous schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Allocation(#[from] AllocationError),
}

#[derive(Debug, Error)]
pub enum RadioError {
    #[error("unsupported layout: {0} sites (expected 1, 7 or 19)")]
    UnsupportedLayout(usize),
    #[error("invalid radio parameter: {0}")]
    InvalidParameter(String),
    #[error("trace: {0}")]
    Trace(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{context}: required share {required} exceeds 1")]
    Undimensionable { context: String, required: f64 },
    #[error("elastic excess {total} exceeds the total headroom {headroom}")]
    InfeasibleMapping { total: f64, headroom: f64 },
    #[error("epoch {epoch}, scheme {scheme}: {source}")]
    Epoch {
        epoch: usize,
        scheme: String,
        #[source]
        source: Box<Error>,
    },
    #[error("invalid experiment setup: {0}")]
    Setup(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Invalid(#[from] ValidationErrors),
}

impl ConfigError {
    /// Parse failures (malformed documents) as opposed to semantic violations.
    pub fn is_parse(&self) -> bool {
        matches!(self, ConfigError::Io { .. } | ConfigError::Parse(_))
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Validation(#[from] ValidationErrors),
    #[error(transparent)]
    Allocation(#[from] AllocationError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Radio(#[from] RadioError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}
