//! Target densities the bounds are exercised on.
//!
//! A [`TargetDensity`] bundles an (optionally unnormalized) log-density with
//! the metadata the bound formulas consume: the density supremum `s`, the
//! strong-convexity parameter `ξ` (meaning the negative log-density `f` is
//! `ξ⁻¹`-strongly convex), and a known mode where available. Acceptance
//! ratios only ever use log-density differences, so normalizing constants are
//! never required; `s` is stored separately for the Wasserstein constants and
//! may be an upper bound rather than the exact supremum.

use std::sync::Arc;

use thiserror::Error;

use crate::numerics::{dot, sym_eigen, DenseMatrix, NumericsError};
use crate::Scalar;

/// Errors raised when constructing or querying targets.
#[derive(Debug, Error)]
pub enum TargetError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("design matrix is rank deficient (smallest XᵀX eigenvalue {0:e})")]
    RankDeficient(f64),

    #[error("target does not expose a Hessian")]
    HessianUnavailable,

    #[error("invalid coordinate index {index} for dimension {dim}")]
    InvalidIndex { index: usize, dim: usize },

    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, TargetError>;

type PointFn<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;
type GradFn<T> = Arc<dyn Fn(&[T]) -> Vec<T> + Send + Sync>;
type HessFn<T> = Arc<dyn Fn(&[T]) -> DenseMatrix<T> + Send + Sync>;
type RegionFn<T> = Arc<dyn Fn(&[T]) -> bool + Send + Sync>;

/// Support of a target density.
#[derive(Clone)]
pub enum Support<T> {
    /// All of ℝ^d.
    All,
    /// A region given by a membership predicate.
    Region(RegionFn<T>),
}

/// A target density with optional derivatives and bound metadata.
#[derive(Clone)]
pub struct TargetDensity<T: Scalar> {
    dim: usize,
    log_density: PointFn<T>,
    grad_log_density: Option<GradFn<T>>,
    hessian_neg_log: Option<HessFn<T>>,
    sup_density: Option<T>,
    strong_convexity: Option<T>,
    mode: Option<Vec<T>>,
    support: Support<T>,
}

impl<T: Scalar> TargetDensity<T> {
    /// Builds a target from a (possibly unnormalized) log-density on all of
    /// ℝ^d. Metadata is attached with the `with_*` builders.
    pub fn from_log_density(
        dim: usize,
        log_density: impl Fn(&[T]) -> T + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            log_density: Arc::new(log_density),
            grad_log_density: None,
            hessian_neg_log: None,
            sup_density: None,
            strong_convexity: None,
            mode: None,
            support: Support::All,
        }
    }

    pub fn with_grad(mut self, grad: impl Fn(&[T]) -> Vec<T> + Send + Sync + 'static) -> Self {
        self.grad_log_density = Some(Arc::new(grad));
        self
    }

    pub fn with_hessian_neg_log(
        mut self,
        hessian: impl Fn(&[T]) -> DenseMatrix<T> + Send + Sync + 'static,
    ) -> Self {
        self.hessian_neg_log = Some(Arc::new(hessian));
        self
    }

    pub fn with_sup_density(mut self, s: T) -> Self {
        self.sup_density = Some(s);
        self
    }

    pub fn with_strong_convexity(mut self, xi: T) -> Self {
        self.strong_convexity = Some(xi);
        self
    }

    pub fn with_mode(mut self, mode: Vec<T>) -> Self {
        self.mode = Some(mode);
        self
    }

    pub fn with_support(mut self, region: impl Fn(&[T]) -> bool + Send + Sync + 'static) -> Self {
        self.support = Support::Region(Arc::new(region));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Log-density at `point`; `-∞` off support.
    pub fn log_density(&self, point: &[T]) -> T {
        debug_assert_eq!(point.len(), self.dim);
        if !self.in_support(point) {
            return T::neg_infinity();
        }
        (self.log_density)(point)
    }

    pub fn in_support(&self, point: &[T]) -> bool {
        match &self.support {
            Support::All => true,
            Support::Region(pred) => pred(point),
        }
    }

    /// Gradient of the log-density, when available.
    pub fn grad_log_density(&self, point: &[T]) -> Option<Vec<T>> {
        self.grad_log_density.as_ref().map(|g| g(point))
    }

    /// Hessian of the negative log-density, when available.
    pub fn hessian_neg_log(&self, point: &[T]) -> Option<DenseMatrix<T>> {
        self.hessian_neg_log.as_ref().map(|h| h(point))
    }

    /// Supremum (or a finite upper bound) of the density.
    pub fn sup_density(&self) -> Option<T> {
        self.sup_density
    }

    /// Strong-convexity parameter `ξ`: the negative log-density is
    /// `ξ⁻¹`-strongly convex.
    pub fn strong_convexity(&self) -> Option<T> {
        self.strong_convexity
    }

    pub fn mode(&self) -> Option<&[T]> {
        self.mode.as_deref()
    }
}

/// Binary-response design data for the logistic targets.
#[derive(Clone, Debug)]
pub struct LogisticData<T: Scalar> {
    x: DenseMatrix<T>,
    y: Vec<u8>,
}

impl<T: Scalar> LogisticData<T> {
    pub fn new(x: DenseMatrix<T>, y: Vec<u8>) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(TargetError::InvalidParameter(format!(
                "design has {} rows but {} labels",
                x.rows(),
                y.len()
            )));
        }
        if y.iter().any(|&v| v > 1) {
            return Err(TargetError::InvalidParameter("labels must be 0 or 1".to_string()));
        }
        if !x.is_finite() {
            return Err(TargetError::InvalidParameter("design entries must be finite".to_string()));
        }
        Ok(Self { x, y })
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn d(&self) -> usize {
        self.x.cols()
    }

    pub fn design(&self) -> &DenseMatrix<T> {
        &self.x
    }

    pub fn labels(&self) -> &[u8] {
        &self.y
    }
}

/// `log(1 + e^z)` without overflow: `max(z, 0) + log1p(e^{-|z|})`.
pub fn softplus<T: Scalar>(z: T) -> T {
    z.max(T::zero()) + (-z.abs()).exp().ln_1p()
}

/// Logistic sigmoid, evaluated on the numerically safe branch.
pub fn sigmoid<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        ((-z).exp() + T::one()).recip()
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// Isotropic Gaussian target `N(0, σ² I_d)` with exact metadata:
/// `s = (2πσ²)^{-d/2}`, `ξ = σ²`, mode at the origin.
pub fn make_gaussian<T: Scalar>(sigma2: T, dim: usize) -> Result<TargetDensity<T>> {
    if !(sigma2 > T::zero()) || !sigma2.is_finite() {
        return Err(TargetError::InvalidParameter("variance must be positive".to_string()));
    }
    if dim == 0 {
        return Err(TargetError::InvalidParameter("dimension must be at least 1".to_string()));
    }
    let two = T::lit(2.0);
    let log_norm = -T::count(dim) / two * (two * T::PI() * sigma2).ln();
    let target = TargetDensity::from_log_density(dim, move |theta: &[T]| {
        log_norm - dot(theta, theta) / (two * sigma2)
    })
    .with_grad(move |theta: &[T]| theta.iter().map(|&t| -t / sigma2).collect())
    .with_hessian_neg_log(move |_: &[T]| DenseMatrix::identity(dim).scale(sigma2.recip()))
    .with_sup_density(log_norm.exp())
    .with_strong_convexity(sigma2)
    .with_mode(vec![T::zero(); dim]);
    Ok(target)
}

/// Two-dimensional Gaussian mixture
/// `π(x, y) = (b/2π) (e^{-(x² + b²y²)} + e^{-(b²x² + y²)})` for `b > 1`.
///
/// The density supremum `b/π` is attained at the origin.
pub fn make_gaussian_mixture_2d<T: Scalar>(b: T) -> Result<TargetDensity<T>> {
    if !(b > T::one()) || !b.is_finite() {
        return Err(TargetError::InvalidParameter("mixture spread b must exceed 1".to_string()));
    }
    let two = T::lit(2.0);
    let log_scale = (b / (two * T::PI())).ln();
    let exponents = move |p: &[T]| {
        let (x, y) = (p[0], p[1]);
        let e1 = x * x + b * b * y * y;
        let e2 = b * b * x * x + y * y;
        (e1, e2)
    };
    let target = TargetDensity::from_log_density(2, move |p: &[T]| {
        let (e1, e2) = exponents(p);
        // log(e^{-e1} + e^{-e2}) through the larger term.
        let m = (-e1).max(-e2);
        log_scale + m + ((-e1 - m).exp() + (-e2 - m).exp()).ln()
    })
    .with_grad(move |p: &[T]| {
        let (x, y) = (p[0], p[1]);
        let (e1, e2) = exponents(p);
        // Posterior weight of the first component, stable in both tails.
        let w1 = sigmoid(e2 - e1);
        let w2 = T::one() - w1;
        let b2 = b * b;
        vec![-two * x * (w1 + b2 * w2), -two * y * (b2 * w1 + w2)]
    })
    .with_sup_density(b / T::PI())
    .with_mode(vec![T::zero(), T::zero()]);
    Ok(target)
}

/// Sub-exponential 2-D density with unnormalized log-density
/// `-(θ₁² + θ₁²θ₂² + θ₂²)`.
pub fn make_subexponential_2d<T: Scalar>() -> TargetDensity<T> {
    let two = T::lit(2.0);
    TargetDensity::from_log_density(2, |p: &[T]| {
        let (a, b) = (p[0], p[1]);
        -(a * a + a * a * b * b + b * b)
    })
    .with_grad(move |p: &[T]| {
        let (a, b) = (p[0], p[1]);
        vec![-two * a * (T::one() + b * b), -two * b * (T::one() + a * a)]
    })
    .with_mode(vec![T::zero(), T::zero()])
}

/// Exact full conditional of the sub-exponential 2-D density: with the
/// coordinate `fixed_index ∈ {0, 1}` held at `fixed_value = v`, the other
/// coordinate is `N(0, 1/(2(1 + v²)))`.
pub fn subexponential_conditional_1d<T: Scalar>(
    fixed_index: usize,
    fixed_value: T,
) -> Result<TargetDensity<T>> {
    if fixed_index > 1 {
        return Err(TargetError::InvalidIndex { index: fixed_index, dim: 2 });
    }
    let v = fixed_value;
    let sigma2 = (T::lit(2.0) * (T::one() + v * v)).recip();
    make_gaussian(sigma2, 1)
}

enum Penalty<T: Scalar> {
    None,
    /// Negative log-prior `½ βᵀ P β` with precision matrix `P`.
    Quadratic(Arc<DenseMatrix<T>>),
}

/// Shared core of the three logistic posteriors: negative log-density
/// `Σ_i [softplus(βᵀxᵢ) − yᵢ βᵀxᵢ] + ½ βᵀPβ` with analytic gradient and
/// Hessian.
fn logistic_target<T: Scalar>(data: LogisticData<T>, penalty: Penalty<T>) -> TargetDensity<T> {
    let data = Arc::new(data);
    let precision = match penalty {
        Penalty::None => None,
        Penalty::Quadratic(p) => Some(p),
    };
    let d = data.d();
    let two = T::lit(2.0);

    let data_ll = Arc::clone(&data);
    let prec_ll = precision.clone();
    let data_grad = Arc::clone(&data);
    let prec_grad = precision.clone();
    let data_hess = Arc::clone(&data);
    let prec_hess = precision;

    TargetDensity::from_log_density(d, move |beta: &[T]| {
        let mut neg_log = T::zero();
        for i in 0..data_ll.n() {
            let z = dot(data_ll.x.row(i), beta);
            let y = T::lit(f64::from(data_ll.y[i]));
            neg_log = neg_log + softplus(z) - y * z;
        }
        if let Some(p) = &prec_ll {
            neg_log = neg_log + dot(&p.matvec(beta), beta) / two;
        }
        -neg_log
    })
    .with_grad(move |beta: &[T]| {
        let mut g = vec![T::zero(); d];
        for i in 0..data_grad.n() {
            let row = data_grad.x.row(i);
            let z = dot(row, beta);
            let resid = T::lit(f64::from(data_grad.y[i])) - sigmoid(z);
            for j in 0..d {
                g[j] = g[j] + resid * row[j];
            }
        }
        if let Some(p) = &prec_grad {
            let pb = p.matvec(beta);
            for j in 0..d {
                g[j] = g[j] - pb[j];
            }
        }
        g
    })
    .with_hessian_neg_log(move |beta: &[T]| {
        let mut h = match &prec_hess {
            Some(p) => (**p).clone(),
            None => DenseMatrix::zeros(d, d),
        };
        for i in 0..data_hess.n() {
            let row = data_hess.x.row(i);
            let s = sigmoid(dot(row, beta));
            let w = s * (T::one() - s);
            for a in 0..d {
                for b in 0..d {
                    h[(a, b)] = h[(a, b)] + w * row[a] * row[b];
                }
            }
        }
        h
    })
}

fn smallest_gram_eigenvalue<T: Scalar>(data: &LogisticData<T>) -> Result<T> {
    let gram = data.design().gram();
    let eigen = sym_eigen(&gram)?;
    Ok(*eigen.values.last().expect("gram matrix is non-empty"))
}

/// Flat-prior Bayesian logistic posterior (unnormalized). Requires a
/// full-column-rank design, checked through the smallest eigenvalue of `XᵀX`.
pub fn make_logistic_flat<T: Scalar>(data: &LogisticData<T>) -> Result<TargetDensity<T>> {
    if data.d() == 0 {
        return Err(TargetError::InvalidParameter("design needs at least one column".to_string()));
    }
    let min_eig = smallest_gram_eigenvalue(data)?;
    if !(min_eig > T::lit(1e-10)) {
        return Err(TargetError::RankDeficient(min_eig.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(logistic_target(data.clone(), Penalty::None))
}

/// Logistic posterior under Zellner's g-prior: the flat-prior log-density
/// minus `βᵀXᵀXβ/(2g)`. Records `ξ = g / λ_min(XᵀX)` since the negative
/// log-posterior Hessian dominates `XᵀX/g` everywhere.
pub fn make_logistic_zellner<T: Scalar>(data: &LogisticData<T>, g: T) -> Result<TargetDensity<T>> {
    if !(g > T::zero()) || !g.is_finite() {
        return Err(TargetError::InvalidParameter("g must be positive".to_string()));
    }
    let min_eig = smallest_gram_eigenvalue(data)?;
    if !(min_eig > T::lit(1e-10)) {
        return Err(TargetError::RankDeficient(min_eig.to_f64().unwrap_or(f64::NAN)));
    }
    let precision = Arc::new(data.design().gram().scale(g.recip()));
    let target = logistic_target(data.clone(), Penalty::Quadratic(precision));
    Ok(target.with_strong_convexity(g / min_eig))
}

/// Logistic posterior under an isotropic Gaussian prior `N(0, σ² I_d)`;
/// `ξ = σ²`.
pub fn make_logistic_gaussian_prior<T: Scalar>(
    data: &LogisticData<T>,
    sigma2_prior: T,
) -> Result<TargetDensity<T>> {
    if !(sigma2_prior > T::zero()) || !sigma2_prior.is_finite() {
        return Err(TargetError::InvalidParameter("prior variance must be positive".to_string()));
    }
    let d = data.d();
    if d == 0 {
        return Err(TargetError::InvalidParameter("design needs at least one column".to_string()));
    }
    let precision = Arc::new(DenseMatrix::identity(d).scale(sigma2_prior.recip()));
    let target = logistic_target(data.clone(), Penalty::Quadratic(precision));
    Ok(target.with_strong_convexity(sigma2_prior))
}

/// Smallest eigenvalue of the negative log-density Hessian at `point`.
pub fn smallest_hessian_eigenvalue<T: Scalar>(target: &TargetDensity<T>, point: &[T]) -> Result<T> {
    let hess = target.hessian_neg_log(point).ok_or(TargetError::HessianUnavailable)?;
    let eigen = sym_eigen(&hess)?;
    Ok(*eigen.values.last().expect("hessian is non-empty"))
}
