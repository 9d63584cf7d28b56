use thiserror::Error;

use crate::digits::Alphabet;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("radix must be at least 2, got {0}")]
    InvalidRadix(u32),

    #[error("digit {digit} is not in the alphabet {{0, ..., {}}}", .radix - 1)]
    InvalidDigit { digit: i64, radix: u32 },

    #[error("value {0} lies outside [0, 1)")]
    OutOfUnitInterval(String),

    #[error("invalid frequency vector: {0}")]
    InvalidFrequencies(String),

    #[error("frequencies unknown: the stream carries no declared digit frequencies")]
    FrequenciesUnknown,

    #[error("transform `{0}` has no inverse")]
    NotInvertible(String),

    #[error("alphabet mismatch: expected base {expected}, found base {found}")]
    AlphabetMismatch { expected: Alphabet, found: Alphabet },

    #[error("transform `{name}` requires base {required}")]
    UnsupportedAlphabet { name: &'static str, required: u32 },

    #[error("arithmetic overflow while computing {0}")]
    Overflow(&'static str),

    #[error("checkpoints must be positive and strictly increasing (offending value {0})")]
    CheckpointOrder(u64),

    #[error("need at least {needed} checkpoints, got {got}")]
    TooFewCheckpoints { needed: usize, got: usize },

    #[error("stream ended after {got} digits, before checkpoint {needed}")]
    StreamExhausted { needed: u64, got: u64 },

    #[error("{0}")]
    Domain(String),
}
