use thiserror::Error;

/// Errors raised by the simulator building blocks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("cyclic prefix of length {cp_len} exceeds block length {block_len}")]
    CpTooLong { cp_len: usize, block_len: usize },

    #[error("cyclic prefix of length {cp_len} is shorter than the channel memory ({taps} taps)")]
    CpShorterThanChannel { cp_len: usize, taps: usize },

    #[error("frame has no cyclic prefix attached")]
    MissingCp,

    #[error("frame still carries a cyclic prefix")]
    CpAttached,

    #[error("frame is in the wrong domain for this operation")]
    WrongDomain,

    #[error("{taps} channel taps do not fit in a block of {block_len} symbols")]
    TapsExceedBlock { taps: usize, block_len: usize },

    #[error("no eigenray falls within the first {max_taps} tap bins")]
    NoTapsInRange { max_taps: usize },

    #[error("ML search space of {size} blocks exceeds the limit of {limit}")]
    MlSearchTooLarge { size: u128, limit: u128 },

    #[error("relay gain undefined: channel and noise power are both zero")]
    DegenerateGain,
}

pub type Result<T> = std::result::Result<T, Error>;
