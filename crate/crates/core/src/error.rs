use thiserror::Error;

use crate::lattice::{Coord2, Direction};

#[derive(Debug, Error)]
pub enum Error {
    /// A walk ran past its hop budget. Every model here terminates in
    /// theory, so this points at a dynamics bug.
    #[error("{what} exceeded the step cap of {cap}")]
    StepCapExceeded { what: &'static str, cap: u64 },

    #[error("no card left at {site} (direction {direction:?})")]
    CardUnderflow {
        site: Coord2,
        direction: Option<Direction>,
    },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("initial bug distribution is not checkered")]
    RefusesNonCheckered,

    #[error("out of supported range: {0}")]
    OutOfRange(String),

    #[error("resource exhausted: {what}")]
    ResourceExhausted { what: &'static str },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
