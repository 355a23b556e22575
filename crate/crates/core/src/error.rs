use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("kernel is not in the {class} class: {reason}")]
    NotInClass { class: &'static str, reason: String },

    #[error("state {state} unreachable: its self-reinforcement probability is zero")]
    Unreachable { state: u8 },

    #[error("no dual in this class: {0}")]
    NoDual(String),

    #[error("{what} has {size} entries, cap is {cap}")]
    CapExceeded { what: &'static str, size: u128, cap: u128 },

    #[error("site {0} lies outside the configuration window")]
    OutsideWindow(i64),

    #[error("empty sample set")]
    EmptySamples,

    #[error("model spec: {0}")]
    Spec(#[from] serde_json::Error),
}

impl Error {
    /// True for rejections caused by the input (bad parameters, failed class
    /// checks, oversized instances) rather than by a defect in the tool.
    pub fn is_rejection(&self) -> bool {
        !matches!(self, Error::EmptySamples)
    }
}
