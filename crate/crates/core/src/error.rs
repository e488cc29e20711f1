use thiserror::Error;

/// Errors surfaced by the library. Point values in messages are 1-indexed,
/// matching all external I/O.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("size mismatch: n = {left} vs n = {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("infeasible restriction class: {0}")]
    InfeasibleClass(String),

    #[error("conflicting partial bijections at x = {x}: y = {y1} vs y = {y2}")]
    Conflict { x: usize, y1: usize, y2: usize },

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("existence failure: {0}")]
    ExistenceFailure(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
