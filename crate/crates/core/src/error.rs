use thiserror::Error;

pub type Result<T> = std::result::Result<T, WirecutError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WirecutError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("synthesis failed: {0}")]
    SynthesisFailure(String),

    /// The supplied unitary set does not reproduce the identity channel.
    #[error("unitary set is not a 2-design (PTM residual {residual:.3e})")]
    DesignViolation { residual: f64 },

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl WirecutError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        WirecutError::InvalidInput(msg.into())
    }

    pub(crate) fn limit(msg: impl Into<String>) -> Self {
        WirecutError::ResourceLimit(msg.into())
    }
}

impl From<serde_json::Error> for WirecutError {
    fn from(e: serde_json::Error) -> Self {
        WirecutError::Parse(e.to_string())
    }
}
