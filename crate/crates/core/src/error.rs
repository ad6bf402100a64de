use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum QptError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected} samples, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    #[error("no bifurcated branch for mode k={k} at beta={beta} (g={g})")]
    NoBranch { k: usize, beta: f64, g: f64 },

    #[error("Newton did not converge in {iterations} iterations (residual {residual:e})")]
    MaxIterations { iterations: usize, residual: f64 },

    #[error("singular Jacobian (pivot {pivot:e} at row {row}); close to a critical point")]
    SingularJacobian { row: usize, pivot: f64 },

    #[error("line search step underflow (residual {residual:e})")]
    StepUnderflow { residual: f64 },

    #[error("continuation stalled at beta={beta} (step below {min_step:e})")]
    ContinuationStall { beta: f64, min_step: f64 },

    #[error("beta_end={beta_end} lies on the wrong side of beta_k={beta_k} for g={g}")]
    WrongSide { beta_k: f64, beta_end: f64, g: f64 },

    #[error("implicit step diverged at step {step} after {sweeps} sweeps; try a smaller dt")]
    ImplicitStepDivergence { step: usize, sweeps: usize },
}

impl QptError {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            QptError::InvalidInput(_)
                | QptError::DimensionMismatch { .. }
                | QptError::WrongSide { .. }
                | QptError::NoBranch { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, QptError>;
