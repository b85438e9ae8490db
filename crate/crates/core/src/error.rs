use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension {d} is out of range: expected {min} <= d <= {max}")]
    Dimension { d: usize, min: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("vector is not normalized: norm = {norm}")]
    NotNormalized { norm: f64 },

    #[error("matrix is not Hermitian: max residual {residual:e}")]
    NotHermitian { residual: f64 },

    #[error("clone-swap constraint violated: (lambda_C - lambda_D) cos(2 theta) = {residual:e}")]
    SwapConstraint { residual: f64 },

    #[error("kappa fit residual {residual:e} exceeds tolerance {tolerance:e}")]
    KappaFit { residual: f64, tolerance: f64 },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("all {restarts} restarts were infeasible")]
    Infeasible { restarts: usize },

    #[error("unknown {kind} `{name}`; available: {available}")]
    UnknownName {
        kind: &'static str,
        name: String,
        available: String,
    },
}

/// Validates `min_dim <= d <= max_dim`.
pub fn check_dim(d: usize, max_dim: usize) -> Result<()> {
    if d < 2 || d > max_dim {
        return Err(Error::Dimension {
            d,
            min: 2,
            max: max_dim,
        });
    }
    Ok(())
}
