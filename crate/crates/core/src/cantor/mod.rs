//! Bit strings, points, cylinders and clopen/open subsets of `2^ω`.

mod bits;
mod clopen;
mod open;
mod point;

use thiserror::Error;

pub use bits::Bits;
pub use clopen::ClopenSet;
pub use open::OpenSet;
pub use point::{cantor_pair, Point};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CantorError {
    #[error("malformed bit string {0:?}")]
    BadBits(String),
    #[error("periodic part of an eventually periodic point must be nonempty")]
    EmptyPeriod,
    #[error("malformed point {0:?}; expected \"u=<bits>:v=<bits>\" or \"seed=<int>\"")]
    BadPoint(String),
    #[error("stage {stage} does not extend stage {}", stage - 1)]
    NotMonotone { stage: usize },
}
