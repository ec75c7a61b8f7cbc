//! Gradient descent with Armijo backtracking, plus a finite-difference
//! gradient checker.

use crate::Scalar;

use super::linalg::{add_scaled, norm2};
use super::{NumericsError, Result};

const ARMIJO_C1: f64 = 1e-4;
const BACKTRACK_SHRINK: f64 = 0.5;
const MAX_BACKTRACKS: usize = 80;

/// Outcome of a gradient-descent run.
#[derive(Clone, Debug)]
pub struct OptimizerResult<T> {
    pub minimizer: Vec<T>,
    pub objective: T,
    pub grad_norm: T,
    pub iterations: usize,
    /// True iff the gradient norm reached the requested tolerance. A `false`
    /// value means the line search stalled at floating-point resolution
    /// before the tolerance was met.
    pub converged: bool,
}

/// Minimizes `objective` by steepest descent with backtracking line search
/// (Armijo constant `1e-4`, shrink factor `0.5`, initial step 1).
///
/// Stops successfully once `‖gradient‖₂ ≤ tolerance`. An iterate whose norm
/// exceeds `max_norm` aborts with [`NumericsError::DivergenceSuspected`] —
/// for the logistic targets in this crate that signals data separation, where
/// no finite maximizer exists.
pub fn gradient_descent<T: Scalar>(
    objective: impl Fn(&[T]) -> T,
    gradient: impl Fn(&[T]) -> Vec<T>,
    x0: &[T],
    tolerance: T,
    max_iter: usize,
    max_norm: T,
) -> Result<OptimizerResult<T>> {
    if !(tolerance > T::zero()) {
        return Err(NumericsError::InvalidParameter("tolerance must be positive".to_string()));
    }
    let c1 = T::lit(ARMIJO_C1);
    let shrink = T::lit(BACKTRACK_SHRINK);
    let mut x = x0.to_vec();
    let mut fx = objective(&x);
    if !fx.is_finite() {
        return Err(NumericsError::NonFinite("objective at start"));
    }
    for iter in 0..=max_iter {
        let xnorm = norm2(&x);
        if xnorm > max_norm {
            return Err(NumericsError::DivergenceSuspected {
                norm: xnorm.to_f64().unwrap_or(f64::NAN),
                max_norm: max_norm.to_f64().unwrap_or(f64::NAN),
            });
        }
        let g = gradient(&x);
        let gnorm = norm2(&g);
        if !gnorm.is_finite() {
            return Err(NumericsError::NonFinite("gradient"));
        }
        if gnorm <= tolerance {
            return Ok(OptimizerResult {
                minimizer: x,
                objective: fx,
                grad_norm: gnorm,
                iterations: iter,
                converged: true,
            });
        }
        if iter == max_iter {
            return Err(NumericsError::MaxIterExceeded(max_iter));
        }
        let mut step = T::one();
        let mut advanced = false;
        for _ in 0..MAX_BACKTRACKS {
            let candidate = add_scaled(&x, -step, &g);
            let fc = objective(&candidate);
            // Strict decrease: once the Armijo right-hand side rounds back
            // to fx the test would accept zero-progress steps forever.
            if fc.is_finite() && fc < fx && fc <= fx - c1 * step * gnorm * gnorm {
                x = candidate;
                fx = fc;
                advanced = true;
                break;
            }
            step = step * shrink;
        }
        if !advanced {
            // Objective differences are below floating-point resolution, but
            // near a strongly convex optimum the gradient still carries
            // signal: keep backtracking, accepting steps that shrink the
            // gradient norm instead.
            step = T::one();
            for _ in 0..MAX_BACKTRACKS {
                let candidate = add_scaled(&x, -step, &g);
                let cand_gnorm = norm2(&gradient(&candidate));
                let fc = objective(&candidate);
                if fc.is_finite() && cand_gnorm < gnorm {
                    x = candidate;
                    fx = fc;
                    advanced = true;
                    break;
                }
                step = step * shrink;
            }
        }
        if !advanced {
            return Ok(OptimizerResult {
                minimizer: x,
                objective: fx,
                grad_norm: gnorm,
                iterations: iter,
                converged: false,
            });
        }
    }
    unreachable!("loop returns on every path")
}

/// Maximum componentwise relative error between `grad` and a central
/// finite-difference approximation of `f` at `x`:
/// `max_i |grad_i − fd_i| / (1 + |grad_i|)`.
pub fn check_gradient<T: Scalar>(
    f: impl Fn(&[T]) -> T,
    grad: impl Fn(&[T]) -> Vec<T>,
    x: &[T],
    eps: T,
) -> Result<T> {
    if !(eps > T::zero()) {
        return Err(NumericsError::InvalidParameter("eps must be positive".to_string()));
    }
    let g = grad(x);
    if g.len() != x.len() {
        return Err(NumericsError::DimensionMismatch { expected: x.len(), got: g.len() });
    }
    let two = T::lit(2.0);
    let mut worst = T::zero();
    let mut point = x.to_vec();
    for i in 0..x.len() {
        point[i] = x[i] + eps;
        let fp = f(&point);
        point[i] = x[i] - eps;
        let fm = f(&point);
        point[i] = x[i];
        if !fp.is_finite() || !fm.is_finite() || !g[i].is_finite() {
            return Err(NumericsError::NonFinite("gradient check"));
        }
        let fd = (fp - fm) / (two * eps);
        let err = (g[i] - fd).abs() / (T::one() + g[i].abs());
        worst = worst.max(err);
    }
    Ok(worst)
}
