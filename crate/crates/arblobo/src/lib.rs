//! Lower bounds on the convergence rate of accept-reject-based (ARB) Markov
//! chains — Metropolis-Hastings, Barker, portkey Barker, non-reversible
//! Metropolis-Hastings, and random-scan componentwise chains — in total
//! variation and Wasserstein distances.
//!
//! The central quantity is the acceptance probability
//! `A(θ) = ∫ a(θ,θ') q(θ,θ') dθ'`: the chain started at `θ` keeps at least
//! `[1 − A(θ)]^t` of its mass stuck at the start after `t` steps, which gives
//! `‖P^t(θ,·) − Π‖_TV ≥ [1 − A(θ)]^t` and, for geometrically ergodic chains,
//! `ρ ≥ 1 − inf_θ A(θ)`. Analogous bounds hold in Wasserstein distances with
//! a dimension-dependent constant. The crate provides:
//!
//! * [`numerics`] — deterministic random streams, dense linear algebra,
//!   Gauss-Legendre quadrature, gradient descent, and 1-D empirical
//!   Wasserstein distance;
//! * [`targets`] — the concrete target densities the bounds are exercised on
//!   (Gaussians, a 2-D Gaussian mixture, a sub-exponential density, Bayesian
//!   logistic regression under flat, Zellner-g, and Gaussian priors);
//! * [`proposals`] — Gaussian random-walk / mean-map / Crank-Nicolson and
//!   multivariate-t proposal families with pointwise densities and density
//!   suprema;
//! * [`kernels`] — acceptance rules, single-step transition simulation, Monte
//!   Carlo estimation of `A(θ)`, and random-scan composition;
//! * [`bounds`] — every closed-form lower-bound / acceptance-upper-bound
//!   formula, evaluated in log space;
//! * [`oracle`] — an exact finite-state laboratory (transition matrices, TV
//!   curves, spectral gaps, conductance, exact optimal transport) used to
//!   verify the bounds;
//! * [`experiments`] — the two simulation studies (logistic regression with
//!   Zellner's g-prior over a `(d, n)` grid, and flat-prior logistic
//!   regression with increasing `n`) plus worked-example and oracle
//!   verification suites, emitting CSV.
//!
//! The numeric core is generic over the scalar type through [`Scalar`];
//! experiment drivers and the CLI use the concrete [`Real`] (= `f64`)
//! aliases below.
//!
//! ```
//! use arblobo::bounds::{sc_accept_ub, tv_lower_curve};
//! use arblobo::kernels::{AcceptanceRule, ArbKernel};
//! use arblobo::numerics::{DenseMatrix, RandomStream};
//! use arblobo::proposals::make_rw_gaussian;
//! use arblobo::targets::make_gaussian;
//!
//! # fn main() -> Result<(), Box<dyn std::error::Error>> {
//! // Random-walk Metropolis-Hastings on N(0, I₅) with proposal scale h = 1.
//! let target = make_gaussian(1.0, 5)?;
//! let proposal = make_rw_gaussian(1.0, &DenseMatrix::identity(5))?;
//! let kernel = ArbKernel::new(target, proposal, AcceptanceRule::MetropolisHastings)?;
//!
//! // Estimate A at the mode; the closed-form bound (1 + h/ξ)^{-d/2} is
//! // exact for Gaussian targets.
//! let mut stream = RandomStream::new(1, 0);
//! let estimate = kernel.mc_acceptance(&[0.0; 5], 10_000, &mut stream)?;
//! let bound = sc_accept_ub(1.0, 1.0, 5, 0.0)?.value;
//! assert!((estimate.mean - bound).abs() <= 3.0 * estimate.std_err);
//!
//! // The chain keeps at least (1 − A)^t of its mass stuck at the start.
//! let curve = tv_lower_curve(bound, 10)?;
//! assert!(curve.values[0] > 0.8);
//! # Ok(())
//! # }
//! ```

// Validations use the `!(x > y)` form on purpose: unlike `x <= y` it also
// rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod experiments;
pub mod kernels;
pub mod numerics;
pub mod oracle;
pub mod proposals;
pub mod targets;

use std::fmt;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar the numeric core is generic over.
///
/// Implemented for `f32` and `f64`. The stated tolerances (and the
/// verification suites) assume `f64`; `f32` is supported for the algebra but
/// cannot meet the `1e-10`-class contracts.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    /// Converts an `f64` constant into the scalar type.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("constant must be representable")
    }

    /// Converts a `usize` count into the scalar type.
    fn count(value: usize) -> Self {
        Self::from_usize(value).expect("count must be representable")
    }
}

impl<T> Scalar for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + fmt::Debug
        + fmt::Display
        + Send
        + Sync
        + 'static
{
}

/// Default scalar type used by the experiment drivers and the CLI.
pub type Real = f64;

/// Dense matrix over the default scalar.
pub type Matrix = numerics::DenseMatrix<Real>;

/// Dense (owned) vector over the default scalar.
pub type Vector = Vec<Real>;
