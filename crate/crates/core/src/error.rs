use thiserror::Error;

use crate::numbers::Rat;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("cannot parse rational from {0:?}")]
    Parse(String),
    #[error("box bounds are inverted")]
    InvertedBox,
    #[error("inflation radius must be non-negative, got {0}")]
    NegativeRadius(Rat),
    #[error("square half-side must be positive, got {0}")]
    DegenerateSquare(Rat),
    #[error("affine scale must be positive, got {0}")]
    NonPositiveScale(Rat),
    #[error("index j must be >= 1, got {0}")]
    IndexBelowOne(i64),
    #[error("cell index l must lie in 1..=16, got {0}")]
    CellIndex(u32),
    #[error("square level must be 1, 2 or 3, got {0}")]
    Level(u8),
    #[error("level {depth} has {required} nodes, above the enumeration cap {cap}")]
    CapExceeded {
        depth: u32,
        required: u128,
        cap: u128,
    },
    #[error("viewport is empty or degenerate")]
    EmptyViewport,
    #[error("check {id} aborted: {source}")]
    Check { id: String, source: Box<Error> },
    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
