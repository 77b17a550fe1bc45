use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A configuration value violates a type invariant.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A computed probability fell outside [0, 1].
    #[error("invalid probability {value} for {what}")]
    InvalidProbability { what: &'static str, value: f64 },

    /// A quantity is mathematically undefined for the given inputs.
    #[error("undefined: {0}")]
    Undefined(String),

    /// Measured counts are inconsistent with a physical interpretation.
    #[error("non-physical input: {0}")]
    NonPhysical(String),

    #[error("channel offset {channel} out of range for {channel_count}-channel AWG")]
    ChannelOutOfRange { channel: i32, channel_count: u32 },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("parameter `{0}` is not identifiable from the data")]
    NonIdentifiable(&'static str),
}

impl Error {
    /// True for failures of a numerical procedure rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::InvalidProbability { .. } | Error::Undefined(_) | Error::NonIdentifiable(_)
        )
    }
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidConfig(msg.into()))
}
