use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("empty database")]
    EmptyDatabase,

    #[error("BSP undefined below length 2 (got {0})")]
    PartitionTooShort(usize),

    #[error("expected support undefined for singletons")]
    Singleton,

    #[error("pattern of length {0} exceeds the supported maximum of {max}", max = crate::combinator::MAX_TEMPLATE_LEN)]
    PatternTooLong(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
