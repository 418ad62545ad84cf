use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("variable x{index} exceeds field dimension p = {p}")]
    VariableOutOfRange { index: usize, p: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("second fundamental form is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("bilinear form is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("dimension {0} is too small: the form is only determined by its curvature tensor in dimension >= 3")]
    DimensionTooSmall(usize),

    #[error("input is not of the form R_phi (relative residual {0:e})")]
    ResidualTooLarge(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True when the failure is a violated mathematical hypothesis rather
    /// than malformed input. The CLI maps these to exit code 2.
    pub fn is_hypothesis_violation(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. }
                | Error::Hypothesis(_)
                | Error::DimensionTooSmall(_)
                | Error::ResidualTooLarge(_)
                | Error::Domain(_)
        )
    }
}
