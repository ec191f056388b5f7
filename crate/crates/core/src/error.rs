use thiserror::Error;

use crate::game::GameTranscript;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("element {value} lies outside the {u_bits}-bit universe")]
    OutOfUniverse { value: u64, u_bits: u32 },

    #[error("element {0} appears more than once in the input set")]
    DuplicateElement(u64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("field width {width} cannot embed {u_bits}-bit elements")]
    FieldTooNarrow { width: u32, u_bits: u32 },

    #[error("adversary exceeded its budget of {budget} queries")]
    BudgetExceeded { budget: usize },

    /// The adversary went over budget; the transcript is kept for inspection
    /// and is marked invalid.
    #[error("protocol violation: adversary exceeded its budget of {} queries", .0.budget)]
    ProtocolViolation(Box<GameTranscript>),

    #[error("cuckoo build failed after {attempts} placement attempts")]
    BuildFailed { attempts: usize },

    #[error("universe exhausted: {0}")]
    UniverseExhausted(String),

    #[error("no representation is consistent with the {labels} recorded oracle labels")]
    NoConsistentRepresentation { labels: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),
}
