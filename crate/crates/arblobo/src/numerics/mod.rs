//! Numeric substrate: deterministic random streams, dense linear algebra,
//! composite Gauss-Legendre quadrature, backtracking gradient descent, and the
//! exact 1-D empirical Wasserstein distance.
//!
//! Everything here is pure given its inputs. [`RandomStream`] is an explicit
//! value, never ambient state, so callers can run replications on disjoint
//! streams from any number of threads without coordination.

mod linalg;
mod optimize;
mod quadrature;
mod rng;
mod wasserstein;

pub use linalg::{
    add_scaled, cholesky, dot, mvn_log_density, norm2, solve_lower_triangular, sub, sym_eigen,
    DenseMatrix, SymEigen,
};
pub use optimize::{check_gradient, gradient_descent, OptimizerResult};
pub use quadrature::quadrature_1d;
pub use rng::{sample_gaussian, sample_student_t, RandomStream};
pub use wasserstein::empirical_w1_1d;

use thiserror::Error;

/// Errors raised by the numeric substrate.
#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("matrix is not square: {0} x {1}")]
    NotSquare(usize, usize),

    #[error("matrix is not symmetric within tolerance")]
    NotSymmetric,

    #[error("matrix is not positive definite (pivot {pivot:e} in column {col})")]
    NotPositiveDefinite { col: usize, pivot: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("gradient descent exceeded {0} iterations")]
    MaxIterExceeded(usize),

    #[error("iterate norm {norm:e} exceeded the divergence guard {max_norm:e}")]
    DivergenceSuspected { norm: f64, max_norm: f64 },

    #[error("empty input")]
    EmptyInput,
}

/// Result alias for the numeric substrate.
pub type Result<T> = std::result::Result<T, NumericsError>;
