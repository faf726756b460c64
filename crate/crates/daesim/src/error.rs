//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    /// Newton iteration failed to converge within the configured budget.
    #[error("Newton iteration diverged after {iterations} iterations (final residual {final_residual:.3e})")]
    NewtonDivergence {
        iterations: usize,
        final_residual: f64,
    },

    /// A pivot fell below the singularity threshold during elimination.
    #[error("singular Jacobian encountered during linear solve")]
    SingularJacobian,

    /// The step controller drove the step size below its floor.
    #[error("step size underflow at t = {t:.6e} (h = {h:.3e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    /// A model builder could not produce a consistent initial point.
    #[error("initialization failed: {0}")]
    InitializationFailure(String),

    /// Trajectory comparison received incompatible variable sets.
    #[error("variable mismatch: {0}")]
    VariableMismatch(String),

    /// A case file failed to parse.
    #[error("malformed case file at line {line}: {message}")]
    MalformedCase { line: usize, message: String },

    /// Invalid scenario configuration (unknown key, bad value, ...).
    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, SolverError>;
