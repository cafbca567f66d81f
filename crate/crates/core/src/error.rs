use thiserror::Error;

/// Errors raised by the inference, evolution and simulation routines.
#[derive(Debug, Error)]
pub enum IfdError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{function} is undefined at eigenvalue {eigenvalue}")]
    Domain { function: &'static str, eigenvalue: f64 },

    #[error("matrix is not positive definite (eigenvalues in [{min_eigenvalue}, {max_eigenvalue}])")]
    NotPositiveDefinite { min_eigenvalue: f64, max_eigenvalue: f64 },

    #[error("Neumann series diverges: operator norm {norm} >= 1")]
    SeriesDiverges { norm: f64 },

    #[error("time step too large: {0}")]
    StepTooLarge(String),

    #[error("mass parameter mu must be nonzero (zero-mode prior variance diverges)")]
    DegenerateMass,

    #[error("unsupported pixel count {0}: must be odd and greater than one")]
    UnsupportedPixelCount(usize),

    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("convergence sweep needs at least 3 resolutions, got {0}")]
    InsufficientSweep(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl IfdError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        IfdError::InvalidInput(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        IfdError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for failures that stem from the numerics rather than the input
    /// description (step size, definiteness, divergent series).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            IfdError::NotPositiveDefinite { .. }
                | IfdError::StepTooLarge(_)
                | IfdError::SeriesDiverges { .. }
                | IfdError::Domain { .. }
        )
    }
}

pub type Result<T, E = IfdError> = std::result::Result<T, E>;
