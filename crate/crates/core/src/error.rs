use thiserror::Error;

/// Typed failures. Certified checks never pass silently: anything the
/// finite-height arithmetic cannot validate surfaces as one of these.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("zero vector has no primitive representative")]
    ZeroVector,
    #[error("not a primitive lattice element: {0}")]
    NotPrimitive(String),
    #[error("comparison could not be decided (exact-equality collision): {0}")]
    TieBreak(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("target enclosure too coarse: {0}")]
    EnclosureTooCoarse(String),
    #[error("height too small: {0}")]
    HeightTooSmall(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("tree depth insufficient: {0}")]
    DepthInsufficient(String),
    #[error("degenerate scale list for box counting")]
    DegenerateScales,
    #[error("empty path")]
    EmptyPath,
}

pub type Result<T> = std::result::Result<T, Error>;
