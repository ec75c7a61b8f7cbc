//! Proposal families `Q(θ, ·)`: samplers, pointwise log-densities
//! `log q(θ, θ')`, and global density suprema `B` with `q ≤ B`.
//!
//! Every family is parameterized as `(h, C)` with `C` a fixed shape matrix
//! and `h` the scalar tuning parameter, which is the knob all the scaling
//! studies turn.

use std::sync::Arc;

use thiserror::Error;

use crate::numerics::{
    cholesky, mvn_log_density, sample_gaussian, sample_student_t, solve_lower_triangular, sub,
    DenseMatrix, NumericsError, RandomStream,
};
use crate::targets::TargetDensity;
use crate::Scalar;

/// Errors raised when constructing or querying proposals.
#[derive(Debug, Error)]
pub enum ProposalError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("proposal family has no finite density supremum")]
    Unbounded,

    #[error("target does not expose a gradient (required for MALA)")]
    GradientUnavailable,

    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, ProposalError>;

/// Family tag, used for validation (the non-reversible rule requires a
/// Crank-Nicolson proposal) and diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProposalKind {
    RandomWalkGaussian,
    MeanMapGaussian,
    Mala,
    Independence,
    CrankNicolson,
    StudentT,
}

type SamplerFn<T> = Arc<dyn Fn(&[T], &mut RandomStream) -> Vec<T> + Send + Sync>;
type LogQFn<T> = Arc<dyn Fn(&[T], &[T]) -> T + Send + Sync>;

/// A proposal distribution family `Q(θ, ·)` with density `q(θ, ·)`.
#[derive(Clone)]
pub struct ProposalFamily<T: Scalar> {
    dim: usize,
    kind: ProposalKind,
    sampler: SamplerFn<T>,
    log_q: LogQFn<T>,
    log_density_sup: Option<T>,
}

impl<T: Scalar> ProposalFamily<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> ProposalKind {
        self.kind
    }

    /// Draws `θ' ~ Q(θ, ·)`.
    pub fn sample(&self, from: &[T], stream: &mut RandomStream) -> Vec<T> {
        debug_assert_eq!(from.len(), self.dim);
        (self.sampler)(from, stream)
    }

    /// Evaluates `log q(from, to)`.
    pub fn log_q(&self, from: &[T], to: &[T]) -> T {
        debug_assert_eq!(from.len(), self.dim);
        debug_assert_eq!(to.len(), self.dim);
        (self.log_q)(from, to)
    }

    /// `log B` with `q(θ, θ') ≤ B` for all pairs, when finite.
    pub fn log_density_sup(&self) -> Option<T> {
        self.log_density_sup
    }
}

/// Stored `log B` of a proposal family; errors for families without a finite
/// density supremum.
pub fn density_sup<T: Scalar>(proposal: &ProposalFamily<T>) -> Result<T> {
    proposal.log_density_sup.ok_or(ProposalError::Unbounded)
}

fn validate_scale<T: Scalar>(h: T, c: &DenseMatrix<T>) -> Result<(DenseMatrix<T>, T)> {
    if !(h > T::zero()) || !h.is_finite() {
        return Err(ProposalError::InvalidParameter("scale h must be positive".to_string()));
    }
    let chol_c = cholesky(c)?;
    let d = c.rows();
    let mut half_log_det_c = T::zero();
    for i in 0..d {
        half_log_det_c = half_log_det_c + chol_c[(i, i)].ln();
    }
    // Cholesky factor of hC.
    Ok((chol_c.scale(h.sqrt()), half_log_det_c))
}

fn gaussian_family<T: Scalar>(
    kind: ProposalKind,
    mean_map: impl Fn(&[T]) -> Vec<T> + Send + Sync + 'static,
    h: T,
    c: &DenseMatrix<T>,
) -> Result<ProposalFamily<T>> {
    let d = c.rows();
    let (chol, half_log_det_c) = validate_scale(h, c)?;
    let two = T::lit(2.0);
    let log_sup = -T::count(d) / two * (two * T::PI() * h).ln() - half_log_det_c;
    let mean_map = Arc::new(mean_map);
    let mean_for_sampler = Arc::clone(&mean_map);
    let chol_sample = chol.clone();
    let sampler = move |from: &[T], stream: &mut RandomStream| {
        let mean = mean_for_sampler(from);
        debug_assert_eq!(mean.len(), d);
        sample_gaussian(stream, &mean, &chol_sample).expect("dimensions validated")
    };
    let log_q = move |from: &[T], to: &[T]| mvn_log_density(to, &mean_map(from), &chol);
    Ok(ProposalFamily {
        dim: d,
        kind,
        sampler: Arc::new(sampler),
        log_q: Arc::new(log_q),
        log_density_sup: Some(log_sup),
    })
}

/// Random-walk Gaussian proposal `N(θ, hC)`.
///
/// `B = (2πh)^{-d/2} det(C)^{-1/2}`, attained at `θ' = θ`.
pub fn make_rw_gaussian<T: Scalar>(h: T, c: &DenseMatrix<T>) -> Result<ProposalFamily<T>> {
    gaussian_family(ProposalKind::RandomWalkGaussian, |from: &[T]| from.to_vec(), h, c)
}

/// Gaussian proposal with a state-dependent mean: `N(μ(θ), hC)`.
///
/// The density supremum is the same as for the random walk — it does not
/// depend on `μ`.
pub fn make_mean_map_gaussian<T: Scalar>(
    mu: impl Fn(&[T]) -> Vec<T> + Send + Sync + 'static,
    h: T,
    c: &DenseMatrix<T>,
) -> Result<ProposalFamily<T>> {
    gaussian_family(ProposalKind::MeanMapGaussian, mu, h, c)
}

/// MALA proposal `N(θ + h ∇log π(θ)/2, h I_d)` for a differentiable target.
pub fn make_mala<T: Scalar>(target: &TargetDensity<T>, h: T) -> Result<ProposalFamily<T>> {
    let d = target.dim();
    let probe = vec![T::zero(); d];
    if target.grad_log_density(&probe).is_none() {
        return Err(ProposalError::GradientUnavailable);
    }
    let target = target.clone();
    let half = T::lit(0.5);
    let mu = move |from: &[T]| {
        let g = target.grad_log_density(from).expect("gradient checked at construction");
        from.iter().zip(&g).map(|(&x, &gx)| x + half * h * gx).collect()
    };
    let mut family = gaussian_family(ProposalKind::Mala, mu, h, &DenseMatrix::identity(d))?;
    family.kind = ProposalKind::Mala;
    Ok(family)
}

/// Independence sampler `N(center, hC)`: the mean map is constant.
pub fn make_independence_gaussian<T: Scalar>(
    center: Vec<T>,
    h: T,
    c: &DenseMatrix<T>,
) -> Result<ProposalFamily<T>> {
    if center.len() != c.rows() {
        return Err(ProposalError::InvalidParameter(
            "center dimension must match the shape matrix".to_string(),
        ));
    }
    gaussian_family(ProposalKind::Independence, move |_: &[T]| center.clone(), h, c)
}

/// Crank-Nicolson proposal `N(√(1-h) θ, h I_d)` for `h ∈ (0, 1]`; its
/// invariant density is the standard Gaussian.
pub fn make_crank_nicolson<T: Scalar>(h: T, dim: usize) -> Result<ProposalFamily<T>> {
    if !(h > T::zero() && h <= T::one()) {
        return Err(ProposalError::InvalidParameter("h must lie in (0, 1]".to_string()));
    }
    if dim == 0 {
        return Err(ProposalError::InvalidParameter("dimension must be at least 1".to_string()));
    }
    let shrink = (T::one() - h).sqrt();
    let mut family = gaussian_family(
        ProposalKind::CrankNicolson,
        move |from: &[T]| from.iter().map(|&x| shrink * x).collect(),
        h,
        &DenseMatrix::identity(dim),
    )?;
    family.kind = ProposalKind::CrankNicolson;
    Ok(family)
}

fn lgamma<T: Scalar>(x: T) -> T {
    T::lit(libm::lgamma(x.to_f64().expect("finite gamma argument")))
}

/// Multivariate t proposal `t_ν(μ(θ), hC)`.
///
/// `log B` is the implemented density's value at its mode:
/// `log Γ((ν+d)/2) − log Γ(ν/2) − (d/2) log(νπh) − ½ log det C`.
pub fn make_student_t_proposal<T: Scalar>(
    nu: T,
    mu: impl Fn(&[T]) -> Vec<T> + Send + Sync + 'static,
    h: T,
    c: &DenseMatrix<T>,
) -> Result<ProposalFamily<T>> {
    if !(nu > T::zero()) || !nu.is_finite() {
        return Err(ProposalError::InvalidParameter(
            "degrees of freedom must be positive".to_string(),
        ));
    }
    let d = c.rows();
    let (chol, half_log_det_c) = validate_scale(h, c)?;
    let two = T::lit(2.0);
    let df = T::count(d);
    let log_norm = lgamma((nu + df) / two)
        - lgamma(nu / two)
        - df / two * (nu * T::PI() * h).ln()
        - half_log_det_c;
    let mu = Arc::new(mu);
    let mu_sample = Arc::clone(&mu);
    let chol_sample = chol.clone();
    let sampler = move |from: &[T], stream: &mut RandomStream| {
        let mean = mu_sample(from);
        sample_student_t(stream, nu, &mean, &chol_sample).expect("parameters validated")
    };
    let log_q = move |from: &[T], to: &[T]| {
        let mean = mu(from);
        let y = solve_lower_triangular(&chol, &sub(to, &mean));
        let m = y.iter().fold(T::zero(), |acc, &v| acc + v * v);
        log_norm - (nu + df) / two * (m / nu).ln_1p()
    };
    Ok(ProposalFamily {
        dim: d,
        kind: ProposalKind::StudentT,
        sampler: Arc::new(sampler),
        log_q: Arc::new(log_q),
        log_density_sup: Some(log_norm),
    })
}

/// Looser reference supremum for the t family that omits the `ν^{-d/2}` mode
/// factor: `log [Γ((ν+d)/2) / (Γ(ν/2) (hπ)^{d/2} det(C)^{1/2})]`.
///
/// For `ν ≥ 1` this is an upper bound on [`density_sup`]; both are exposed so
/// diagnostics can report either normalization.
pub fn student_t_reference_log_sup<T: Scalar>(nu: T, h: T, c: &DenseMatrix<T>) -> Result<T> {
    if !(nu > T::zero()) || !nu.is_finite() {
        return Err(ProposalError::InvalidParameter(
            "degrees of freedom must be positive".to_string(),
        ));
    }
    let (_, half_log_det_c) = validate_scale(h, c)?;
    let d = c.rows();
    let two = T::lit(2.0);
    let df = T::count(d);
    Ok(lgamma((nu + df) / two)
        - lgamma(nu / two)
        - df / two * (h * T::PI()).ln()
        - half_log_det_c)
}
