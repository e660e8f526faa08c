//! Error types shared across the crate.

use crate::syntax::Sym;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AspError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("rule {rule_index} is unsafe: variable {var} has no positive body occurrence")]
    Safety { rule_index: usize, var: Sym },
    #[error("grounding exceeded the function nesting bound {bound} (atom {atom})")]
    NonFiniteGrounding { bound: usize, atom: String },
    #[error("program is not ground: {0}")]
    NotGround(String),
    #[error("grounding error: {0}")]
    Grounding(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpaceError {
    #[error("search space exceeds the cap of {cap} entries")]
    Explosion { cap: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TaskError {
    #[error("example {id}: inclusions and exclusions overlap on {atom}")]
    InconsistentExample { id: Sym, atom: String },
    #[error("duplicate example id {0}")]
    DuplicateExample(Sym),
    #[error("ordering endpoint {0} is not a positive example")]
    UnknownOrderingEndpoint(Sym),
    #[error("cautious ordering from {0} to itself can never be respected")]
    ReflexiveCautiousOrdering(Sym),
    #[error("hypothesis refers to unknown search-space id {0}")]
    UnknownRuleId(Sym),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetaError {
    #[error("reserved predicate {0} occurs in the task")]
    ReservedPredicateClash(Sym),
    #[error("malformed meta model: {0}")]
    MalformedMetaModel(String),
}

/// Search-time failures: a malformed ground program or a deadline hit.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error(transparent)]
    Asp(#[from] AspError),
    #[error("solver deadline exceeded")]
    Timeout,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error(transparent)]
    Asp(#[from] AspError),
    #[error(transparent)]
    Meta(#[from] MetaError),
    #[error("iteration limit of {0} exceeded")]
    IterationLimitExceeded(usize),
    #[error("search space too large for brute force ({size} > {max})")]
    SpaceTooLarge { size: usize, max: usize },
    #[error("solver deadline exceeded")]
    Timeout,
    #[error("external solver failed (exit {code:?}): {transcript}")]
    ExternalSolver { code: Option<i32>, transcript: String },
    #[error("meta-external strategy requires an external solver command")]
    MissingExternalCommand,
}

impl From<SolveError> for EngineError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Asp(a) => EngineError::Asp(a),
            SolveError::Timeout => EngineError::Timeout,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BenchError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("sampling exhausted after {0} rejections")]
    ExhaustedSampling(usize),
}
