use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid game parameters: {0}")]
    InvalidSpec(String),

    #[error("illegal move: {0}")]
    IllegalMove(String),

    #[error("game tree exceeds the node budget of {budget} (explored {explored} nodes before stopping)")]
    BudgetExceeded { budget: u64, explored: u64 },

    #[error("malformed strategy at {path}: {reason}")]
    MalformedStrategy { path: String, reason: String },

    #[error("strategy does not match game: {0}")]
    StrategyMismatch(String),

    #[error("invalid hider strategy: {0}")]
    InvalidHiderStrategy(String),

    #[error("malformed linear program: {0}")]
    MalformedLp(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
