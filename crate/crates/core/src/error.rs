use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("identity `{name}` violated: max deviation {max_dev:.3e} exceeds tolerance {tol:.3e}")]
    IdentityViolation {
        name: String,
        max_dev: f64,
        tol: f64,
    },

    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("metric not positive definite at grid point {point}")]
    NotPositiveDefinite { point: usize },

    #[error("function vanishes on the grid: min |h| = {min_abs:.3e} below threshold {threshold:.3e}")]
    VanishingFunction { min_abs: f64, threshold: f64 },

    #[error("operator composition exceeds supported derivative order {max}")]
    OrderOverflow { max: usize },

    #[error("expansion fit ill-conditioned: {0}")]
    IllConditionedFit(String),

    #[error("out of scope: {0}")]
    OutOfScope(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn identity(name: impl Into<String>, max_dev: f64, tol: f64) -> Self {
        Error::IdentityViolation {
            name: name.into(),
            max_dev,
            tol,
        }
    }
}

/// Checks a residual against a tolerance, wrapping failures in
/// [`Error::IdentityViolation`].
pub fn ensure_identity(name: &str, max_dev: f64, tol: f64) -> Result<()> {
    if max_dev.is_finite() && max_dev <= tol {
        Ok(())
    } else {
        Err(Error::identity(name, max_dev, tol))
    }
}
