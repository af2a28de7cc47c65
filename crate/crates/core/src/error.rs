use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or argument lies outside its documented domain.
    #[error("invalid input: {0}")]
    Input(String),

    /// The total stub count does not fit under the configured cap.
    #[error("stub count {stubs} exceeds the configured stub cap {cap}; use lazy mode or raise the cap")]
    StubCap { stubs: u64, cap: u64 },

    /// The sum of degrees overflowed 64-bit integers.
    #[error("total degree overflows 64 bits")]
    DegreeOverflow,

    /// An operation was called in a state that does not allow it.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
