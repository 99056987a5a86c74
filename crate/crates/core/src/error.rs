use thiserror::Error;

/// Errors raised while reading or validating an arena.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArenaError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("vertex `{0}` has no outgoing arc")]
    DeadEnd(String),
    #[error("line {line}: arc references unknown vertex `{vertex}`")]
    UnknownEndpoint { line: usize, vertex: String },
    #[error("line {line}: duplicate arc ({src}, {dst})")]
    DuplicateArc {
        line: usize,
        src: String,
        dst: String,
    },
    #[error("line {line}: vertex `{vertex}` declared twice")]
    DuplicateVertex { line: usize, vertex: String },
    #[error("arena has no vertices")]
    Empty,
    #[error("subgame mask leaves vertex `{0}` without outgoing arcs")]
    EmptyMask(String),
    #[error("subgame mask does not match the arena ({0})")]
    MaskMismatch(String),
    #[error("integer overflow while {0}")]
    Overflow(&'static str),
}

/// Failures of the solving pipeline.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error(transparent)]
    Arena(#[from] ArenaError),
    #[error("strategy is not valid for this arena: {0}")]
    InvalidStrategy(String),
    #[error("arena is not {nu}-valued: Player 0 loses the reweighted energy game at `{vertex}`")]
    NotValued { nu: String, vertex: String },
    #[error("oracle bound exceeded: {count} strategies > {bound}")]
    BoundExceeded { count: u128, bound: u128 },
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T, E = SolveError> = std::result::Result<T, E>;
