use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("shape mismatch in {what}: expected {expected}, found {found}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite loss at epoch {epoch}, step {step}: {loss}")]
    NonFiniteLoss {
        epoch: usize,
        step: usize,
        loss: f64,
    },

    #[error("misaligned inputs: {0}")]
    Misaligned(String),

    #[error("missing reference for episode {0}")]
    MissingReference(String),
}
