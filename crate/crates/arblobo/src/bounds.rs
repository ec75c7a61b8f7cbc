//! Closed-form convergence-rate lower bounds and acceptance-probability
//! upper bounds, all evaluated in log space with `log1p` so that
//! `1 − A ≈ 1 − 10^{-300}` and `A ≈ 10^{-300}` stay representable at the same
//! time.
//!
//! Acceptance upper bounds are clamped to `[0, 1]` but keep the raw value —
//! a vacuous bound is still information. Rate bounds accept a user-supplied
//! acceptance value understood as (an upper bound on) `inf_θ A(θ)`; the crate
//! never claims to compute a true infimum over the state space — the infimum
//! is only exact where a formula gives it (the mode of log-concave targets).

use thiserror::Error;

use crate::Scalar;

/// Errors raised by the bound formulas.
#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("value out of range: {0}")]
    OutOfRange(String),
}

pub type Result<T> = std::result::Result<T, BoundsError>;

fn check_unit_interval<T: Scalar>(name: &str, value: T) -> Result<()> {
    if !(value >= T::zero() && value <= T::one()) {
        return Err(BoundsError::OutOfRange(format!("{name} must lie in [0, 1], got {value}")));
    }
    Ok(())
}

fn check_positive<T: Scalar>(name: &str, value: T) -> Result<()> {
    if !(value > T::zero()) || !value.is_finite() {
        return Err(BoundsError::OutOfRange(format!("{name} must be positive, got {value}")));
    }
    Ok(())
}

/// Distance kind of a bound curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    TotalVariation,
    Wasserstein,
}

/// A lower-bound curve `t ↦ value` for `t = 1..=horizon`.
#[derive(Clone, Debug)]
pub struct BoundCurve<T> {
    pub kind: BoundKind,
    /// Acceptance value the curve was computed from.
    pub accept: T,
    pub horizon: usize,
    /// `values[t-1]` is the bound at iteration `t`.
    pub values: Vec<T>,
    /// Leading constant (Wasserstein only).
    pub constant: Option<T>,
    /// State dimension (Wasserstein only).
    pub dim: Option<usize>,
}

/// An acceptance upper bound clamped to `[0, 1]`, with the raw (possibly
/// vacuous) value retained.
#[derive(Clone, Copy, Debug)]
pub struct AcceptBound<T> {
    pub value: T,
    pub raw: T,
}

impl<T: Scalar> AcceptBound<T> {
    fn clamped(raw: T) -> Self {
        Self { value: raw.min(T::one()), raw }
    }
}

/// `(1 − A)^t`, the total-variation lower bound after `t` steps.
pub fn tv_lower_bound<T: Scalar>(accept: T, t: usize) -> Result<T> {
    check_unit_interval("acceptance", accept)?;
    if t == 0 {
        return Err(BoundsError::OutOfRange("iteration must be at least 1".to_string()));
    }
    if accept == T::one() {
        return Ok(T::zero());
    }
    Ok((T::count(t) * (-accept).ln_1p()).exp())
}

/// Total-variation lower-bound curve for `t = 1..=horizon`.
pub fn tv_lower_curve<T: Scalar>(accept: T, horizon: usize) -> Result<BoundCurve<T>> {
    let values =
        (1..=horizon).map(|t| tv_lower_bound(accept, t)).collect::<Result<Vec<_>>>()?;
    Ok(BoundCurve {
        kind: BoundKind::TotalVariation,
        accept,
        horizon,
        values,
        constant: None,
        dim: None,
    })
}

/// Geometric-rate lower bound in total variation: `ρ ≥ 1 − inf_θ A(θ)`.
pub fn geo_rate_lb_tv<T: Scalar>(accept_inf: T) -> Result<T> {
    check_unit_interval("acceptance infimum", accept_inf)?;
    Ok(T::one() - accept_inf)
}

/// Norm used in the Wasserstein cost condition `c ≥ C₀‖·−·‖₁`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormTag {
    L1,
    L2,
    LInf,
}

/// Tight constant `C₀` with `‖v‖ ≥ C₀ ‖v‖₁` on ℝ^d for the given norm.
pub fn norm_equivalence_constant<T: Scalar>(norm: NormTag, dim: usize) -> Result<T> {
    if dim == 0 {
        return Err(BoundsError::OutOfRange("dimension must be at least 1".to_string()));
    }
    Ok(match norm {
        NormTag::L1 => T::one(),
        NormTag::L2 => T::count(dim).sqrt().recip(),
        NormTag::LInf => T::count(dim).recip(),
    })
}

/// Leading Wasserstein constant `C_{d,π} = C₀ d [2 s^{1/d} (1+d)^{1+1/d}]⁻¹`.
pub fn wasserstein_constant<T: Scalar>(c0: T, dim: usize, sup_density: T) -> Result<T> {
    check_positive("C₀", c0)?;
    check_positive("density supremum", sup_density)?;
    if dim == 0 {
        return Err(BoundsError::OutOfRange("dimension must be at least 1".to_string()));
    }
    let d = T::count(dim);
    let inv_d = d.recip();
    let log_value = c0.ln() + d.ln()
        - T::lit(2.0).ln()
        - inv_d * sup_density.ln()
        - (T::one() + inv_d) * (T::one() + d).ln();
    Ok(log_value.exp())
}

/// Wasserstein lower bound `C_{d,π} (1 − A)^{t(1 + 1/d)}`.
pub fn wasserstein_lower_bound<T: Scalar>(
    accept: T,
    t: usize,
    dim: usize,
    constant: T,
) -> Result<T> {
    check_unit_interval("acceptance", accept)?;
    check_positive("constant", constant)?;
    if t == 0 || dim == 0 {
        return Err(BoundsError::OutOfRange("iteration and dimension must be ≥ 1".to_string()));
    }
    if accept == T::one() {
        return Ok(T::zero());
    }
    let exponent = T::count(t) * (T::one() + T::count(dim).recip());
    Ok(constant * (exponent * (-accept).ln_1p()).exp())
}

/// Wasserstein lower-bound curve for `t = 1..=horizon`.
pub fn wasserstein_lower_curve<T: Scalar>(
    accept: T,
    horizon: usize,
    dim: usize,
    constant: T,
) -> Result<BoundCurve<T>> {
    let values = (1..=horizon)
        .map(|t| wasserstein_lower_bound(accept, t, dim, constant))
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundCurve {
        kind: BoundKind::Wasserstein,
        accept,
        horizon,
        values,
        constant: Some(constant),
        dim: Some(dim),
    })
}

/// Geometric-rate lower bound in Wasserstein distances:
/// `ρ ≥ (1 − inf A)^{(d+1)/d}`.
pub fn geo_rate_lb_wass<T: Scalar>(accept_inf: T, dim: usize) -> Result<T> {
    check_unit_interval("acceptance infimum", accept_inf)?;
    if dim == 0 {
        return Err(BoundsError::OutOfRange("dimension must be at least 1".to_string()));
    }
    if accept_inf == T::one() {
        return Ok(T::zero());
    }
    let exponent = (T::count(dim) + T::one()) / T::count(dim);
    Ok((exponent * (-accept_inf).ln_1p()).exp())
}

/// Acceptance upper bound for a random-walk Gaussian proposal on a target
/// whose negative log-density is `ξ⁻¹`-strongly convex, at a point with
/// subgradient norm `v_norm`:
/// `A(θ₀) ≤ (1 + h/ξ)^{-d/2} exp{(h/2) v_norm² / (1 + h/ξ)}`.
///
/// With `v_norm = 0` (the mode) this is `(1 + h/ξ)^{-d/2}`, which is exact
/// for Gaussian targets.
pub fn sc_accept_ub<T: Scalar>(h: T, xi: T, dim: usize, v_norm: T) -> Result<AcceptBound<T>> {
    check_positive("h", h)?;
    check_positive("ξ", xi)?;
    if dim == 0 || !(v_norm >= T::zero()) {
        return Err(BoundsError::OutOfRange(
            "dimension must be ≥ 1 and the subgradient norm nonnegative".to_string(),
        ));
    }
    let two = T::lit(2.0);
    let ratio = h / xi;
    let log_raw =
        -T::count(dim) / two * ratio.ln_1p() + h / two * v_norm * v_norm / (T::one() + ratio);
    Ok(AcceptBound::clamped(log_raw.exp()))
}

/// Acceptance upper bound from a bounded proposal density:
/// `A(θ₀) ≤ B / π(θ₀)`, given in logs.
pub fn accept_ub_bounded_proposal<T: Scalar>(log_pi_at_point: T, log_b: T) -> AcceptBound<T> {
    AcceptBound::clamped((log_b - log_pi_at_point).exp())
}

/// Asymptotic Zellner-prior acceptance bound at the posterior mode:
/// `A(β*) ≤ (h n (1 − √γ)²/(2g) + 1)^{-d/2}` with `γ` the limiting `d/n`.
pub fn zellner_accept_ub<T: Scalar>(
    h: T,
    n: usize,
    gamma: T,
    g: T,
    dim: usize,
) -> Result<AcceptBound<T>> {
    check_positive("h", h)?;
    check_positive("g", g)?;
    if !(gamma > T::zero() && gamma < T::one()) {
        return Err(BoundsError::OutOfRange(format!("γ must lie in (0, 1), got {gamma}")));
    }
    if n == 0 || dim == 0 {
        return Err(BoundsError::OutOfRange("n and d must be ≥ 1".to_string()));
    }
    let two = T::lit(2.0);
    let shrink = T::one() - gamma.sqrt();
    let log_raw =
        -T::count(dim) / two * (h * T::count(n) * shrink * shrink / (two * g)).ln_1p();
    Ok(AcceptBound::clamped(log_raw.exp()))
}

/// Parameters of the concentration (Laplace) lower bound.
///
/// Only `λ₀` (the local inverse-curvature level) and the slack `c ∈ (0, 1]`
/// enter the computed bound; the remaining hypothesis constants of the
/// concentration regime (local convexity radius, strict optimality margin,
/// tail integral, dimension growth exponent) have no computational role and
/// are not inputs.
#[derive(Clone, Copy, Debug)]
pub struct LaplaceParams<T> {
    pub lambda0: T,
    pub c: T,
    pub n: usize,
    pub dim: usize,
}

impl<T: Scalar> LaplaceParams<T> {
    pub fn new(lambda0: T, c: T, n: usize, dim: usize) -> Result<Self> {
        check_positive("λ₀", lambda0)?;
        if !(c > T::zero() && c <= T::one()) {
            return Err(BoundsError::OutOfRange(format!("c must lie in (0, 1], got {c}")));
        }
        if n == 0 || dim == 0 {
            return Err(BoundsError::OutOfRange("n and d must be ≥ 1".to_string()));
        }
        Ok(Self { lambda0, c, n, dim })
    }
}

/// Log of the concentration lower bound on the density maximum:
/// `log π_n(θ*) ≥ (d/2) log(n/(2πλ₀)) − log(1 + c)`.
pub fn laplace_density_lb<T: Scalar>(params: &LaplaceParams<T>) -> T {
    let two = T::lit(2.0);
    T::count(params.dim) / two * (T::count(params.n) / (two * T::PI() * params.lambda0)).ln()
        - params.c.ln_1p()
}

/// Acceptance upper bound at the mode of the 2-D Gaussian mixture with
/// spread `b` under a random-walk proposal of variance `h`:
/// `A(x, y) ≤ 1 / (bh [e^{-(x² + b²y²)} + e^{-(b²x² + y²)}])`.
pub fn mixture_accept_ub<T: Scalar>(b: T, h: T, x: T, y: T) -> Result<AcceptBound<T>> {
    if !(b > T::one()) {
        return Err(BoundsError::OutOfRange(format!("b must exceed 1, got {b}")));
    }
    check_positive("h", h)?;
    let e1 = -(x * x + b * b * y * y);
    let e2 = -(b * b * x * x + y * y);
    let m = e1.max(e2);
    let log_sum = m + ((e1 - m).exp() + (e2 - m).exp()).ln();
    let log_raw = -(b.ln() + h.ln() + log_sum);
    Ok(AcceptBound::clamped(log_raw.exp()))
}

/// Combined random-scan acceptance `Σ_k λ_k Â_k`.
pub fn rs_combined_acceptance<T: Scalar>(probs: &[T], accepts: &[T]) -> Result<T> {
    if probs.len() != accepts.len() || probs.is_empty() {
        return Err(BoundsError::OutOfRange(
            "probabilities and acceptances must have equal nonzero length".to_string(),
        ));
    }
    let total = probs.iter().fold(T::zero(), |acc, &p| acc + p);
    if (total - T::one()).abs() > T::lit(1e-12) {
        return Err(BoundsError::OutOfRange(format!("probabilities sum to {total}, not 1")));
    }
    let mut combined = T::zero();
    for (&p, &a) in probs.iter().zip(accepts) {
        if !(p > T::zero()) {
            return Err(BoundsError::OutOfRange("probabilities must be positive".to_string()));
        }
        check_unit_interval("acceptance", a)?;
        combined = combined + p * a;
    }
    Ok(combined)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tv_bound_values() {
        assert_eq!(tv_lower_bound(0.0, 7).unwrap(), 1.0);
        assert_eq!(tv_lower_bound(1.0, 7).unwrap(), 0.0);
        assert!((tv_lower_bound(0.5f64, 2).unwrap() - 0.25).abs() < 1e-15);
        assert!(tv_lower_bound(-0.1, 1).is_err());
        assert!(tv_lower_bound(1.1, 1).is_err());
        assert!(tv_lower_bound(0.5, 0).is_err());
    }

    #[test]
    fn tv_curve_shape() {
        let curve = tv_lower_curve(0.3, 10).unwrap();
        assert_eq!(curve.values.len(), 10);
        for w in curve.values.windows(2) {
            assert!(w[1] <= w[0]);
        }
        assert!(curve.values.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn geo_rate_values() {
        // Gaussian-prior logistic with h = σ² = 1, d = 2: ρ ≥ 1 − 1/2.
        let a_inf = sc_accept_ub(1.0f64, 1.0, 2, 0.0).unwrap().value;
        assert!((geo_rate_lb_tv(a_inf).unwrap() - 0.5).abs() < 1e-14);
        // A_inf = 0 means the rate bound is 1: not geometrically ergodic.
        assert_eq!(geo_rate_lb_tv(0.0).unwrap(), 1.0);
        // Mixture example b = 2, h = 1: ρ ≥ 1 − 1/(2bh) = 3/4.
        let a = mixture_accept_ub(2.0f64, 1.0, 0.0, 0.0).unwrap().value;
        assert!((geo_rate_lb_tv(a).unwrap() - 0.75).abs() < 1e-14);
    }

    #[test]
    fn norm_constants() {
        assert_eq!(norm_equivalence_constant::<f64>(NormTag::L1, 9).unwrap(), 1.0);
        assert_eq!(norm_equivalence_constant::<f64>(NormTag::L2, 4).unwrap(), 0.5);
        assert_eq!(norm_equivalence_constant::<f64>(NormTag::LInf, 1).unwrap(), 1.0);
        assert_eq!(norm_equivalence_constant::<f64>(NormTag::LInf, 5).unwrap(), 0.2);
    }

    #[test]
    fn wasserstein_constant_values() {
        assert!((wasserstein_constant(1.0f64, 1, 1.0).unwrap() - 0.125).abs() < 1e-15);
        let s = (2.0 * std::f64::consts::PI).sqrt().recip();
        let c = wasserstein_constant(1.0, 1, s).unwrap();
        assert!((c - (2.0 * std::f64::consts::PI).sqrt() / 8.0).abs() < 1e-12);
        assert!((c - 0.31333).abs() < 1e-5);
        // Decreasing in the density supremum.
        assert!(wasserstein_constant(1.0, 3, 2.0).unwrap() < wasserstein_constant(1.0, 3, 1.0).unwrap());
    }

    #[test]
    fn wasserstein_bound_values() {
        assert_eq!(wasserstein_lower_bound(1.0, 3, 2, 0.4).unwrap(), 0.0);
        let c = (2.0 * std::f64::consts::PI).sqrt() / 8.0;
        let v = wasserstein_lower_bound(0.5, 1, 1, c).unwrap();
        assert!((v - c * 0.25).abs() < 1e-12);
        assert!((v - 0.07833).abs() < 2e-5);
        // Large d: the exponent approaches the TV exponent t.
        let big = wasserstein_lower_bound(0.5f64, 4, 1_000_000, 1.0).unwrap();
        assert!((big - tv_lower_bound(0.5, 4).unwrap()).abs() < 1e-4);
    }

    #[test]
    fn wasserstein_rate_values() {
        assert_eq!(geo_rate_lb_wass(0.0, 3).unwrap(), 1.0);
        assert!((geo_rate_lb_wass(0.5f64, 1).unwrap() - 0.25).abs() < 1e-14);
        let nearly_tv = geo_rate_lb_wass(0.3f64, 1_000_000).unwrap();
        assert!((nearly_tv - 0.7).abs() < 1e-5);
    }

    #[test]
    fn sc_bound_values() {
        let b = sc_accept_ub(1.0f64, 1.0, 2, 0.0).unwrap();
        assert!((b.value - 0.5).abs() < 1e-15);
        // Exact for a 1-D standard Gaussian at the mode: (1 + h)^{-1/2}.
        let b = sc_accept_ub(3.0, 1.0, 1, 0.0).unwrap();
        assert!((b.value - 0.25f64.sqrt().sqrt() * 2.0f64.sqrt().recip()).abs() < 1e-12
            || (b.value - (1.0f64 + 3.0).powf(-0.5)).abs() < 1e-12);
        // Large subgradient norm: clamped at 1 but the raw value is kept.
        let b = sc_accept_ub(1.0, 1.0, 1, 10.0).unwrap();
        assert_eq!(b.value, 1.0);
        assert!(b.raw > 1.0);
        assert!(sc_accept_ub(0.0, 1.0, 1, 0.0).is_err());
    }

    #[test]
    fn bounded_proposal_values() {
        // 1-D N(0,1) with h = 1: B = π(0), bound is vacuous.
        let log_pi = -(0.5 * (2.0 * std::f64::consts::PI).ln());
        let b = accept_ub_bounded_proposal(log_pi, log_pi);
        assert!((b.value - 1.0).abs() < 1e-15);
        // N(0, 0.01): bound is σ = 0.1.
        let log_pi = -(0.5 * (2.0 * std::f64::consts::PI * 0.01).ln());
        let b = accept_ub_bounded_proposal(log_pi, -(0.5 * (2.0 * std::f64::consts::PI).ln()));
        assert!((b.value - 0.1).abs() < 1e-14);
    }

    #[test]
    fn zellner_bound_values() {
        let b = zellner_accept_ub(1.0, 16, 0.25, 10.0, 4).unwrap();
        assert!((b.value - 1.2f64.powi(-2)).abs() < 1e-12);
        assert!((b.value - 0.6944).abs() < 1e-4);
        // h → 0 gives a vacuous bound of 1.
        let b = zellner_accept_ub(1e-300f64, 16, 0.25, 10.0, 4).unwrap();
        assert!((b.value - 1.0).abs() < 1e-12);
        assert!(zellner_accept_ub(1.0, 16, 0.0, 10.0, 4).is_err());
        assert!(zellner_accept_ub(1.0, 16, 1.0, 10.0, 4).is_err());
    }

    #[test]
    fn laplace_bound_values() {
        // c = 1, λ₀ = 1/(2π), n = 1, d = 2: log(1/2).
        let p = LaplaceParams::new(1.0 / (2.0 * std::f64::consts::PI), 1.0, 1, 2).unwrap();
        assert!((laplace_density_lb(&p) - 0.5f64.ln()).abs() < 1e-14);

        // Exact Gaussian check: for π = N(0, λ₀/n I_d), the true mode density
        // (n/(2πλ₀))^{d/2} dominates the bound for any c > 0.
        for (lambda0, n, d, c) in [(0.5, 10, 3, 0.3), (2.0, 100, 5, 1.0)] {
            let p = LaplaceParams::new(lambda0, c, n, d).unwrap();
            let exact = d as f64 / 2.0
                * (n as f64 / (2.0 * std::f64::consts::PI * lambda0)).ln();
            assert!(exact >= laplace_density_lb(&p));
        }

        // Composed with a bounded Gaussian proposal this reproduces the
        // concentration acceptance bound (λ₀/(nh))^{d/2} (1+c)/det(C)^{1/2}.
        let (lambda0, c, n, d, h) = (0.7, 0.4, 50, 3, 0.2);
        let p = LaplaceParams::new(lambda0, c, n, d).unwrap();
        let log_b = -(d as f64) / 2.0 * (2.0 * std::f64::consts::PI * h).ln();
        let bound = accept_ub_bounded_proposal(laplace_density_lb(&p), log_b);
        let direct = (lambda0 / (n as f64 * h)).powf(d as f64 / 2.0) * (1.0 + c);
        assert!((bound.raw - direct).abs() < 1e-12 * direct);

        assert!(LaplaceParams::new(0.0, 1.0, 1, 1).is_err());
        assert!(LaplaceParams::new(1.0, 0.0, 1, 1).is_err());
        assert!(LaplaceParams::new(1.0, 1.5, 1, 1).is_err());
    }

    #[test]
    fn mixture_bound_values() {
        let b = mixture_accept_ub(2.0f64, 1.0, 0.0, 0.0).unwrap();
        assert!((b.value - 0.25).abs() < 1e-15);
        // Far from the origin the raw bound blows up and is clamped.
        let b = mixture_accept_ub(2.0, 1.0, 5.0, 5.0).unwrap();
        assert_eq!(b.value, 1.0);
        assert!(b.raw > 1.0);
        assert!(mixture_accept_ub(1.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn rs_combination() {
        assert_eq!(rs_combined_acceptance(&[1.0], &[0.37]).unwrap(), 0.37);
        let v = rs_combined_acceptance(&[0.25f64, 0.25, 0.5], &[0.2, 0.2, 0.2]).unwrap();
        assert!((v - 0.2).abs() < 1e-15);
        assert!(rs_combined_acceptance(&[0.5, 0.6], &[0.2, 0.2]).is_err());
        assert!(rs_combined_acceptance(&[0.5, 0.5], &[0.2, 1.2]).is_err());
        // Hybrid example h = 2, equal probabilities: combined ≤ 1/√(2h) gives
        // a curve at least 0.5^t.
        let combined = rs_combined_acceptance(&[0.5, 0.5], &[0.45, 0.43]).unwrap();
        let curve = tv_lower_curve(combined, 5).unwrap();
        for (i, v) in curve.values.iter().enumerate() {
            assert!(*v >= 0.5f64.powi(i as i32 + 1));
        }
    }

    proptest! {
        #[test]
        fn tv_bound_is_monotone_in_acceptance(
            a1 in 0.0f64..1.0,
            a2 in 0.0f64..1.0,
            t in 1usize..50,
        ) {
            let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
            // Larger acceptance gives a smaller lower bound.
            prop_assert!(tv_lower_bound(hi, t).unwrap() <= tv_lower_bound(lo, t).unwrap());
        }

        #[test]
        fn wasserstein_never_beats_tv_exponent(
            a in 0.0f64..1.0,
            t in 1usize..30,
            d in 1usize..20,
        ) {
            let w = wasserstein_lower_bound(a, t, d, 1.0).unwrap();
            let tv = tv_lower_bound(a, t).unwrap();
            prop_assert!(w <= tv + 1e-15);
        }

        #[test]
        fn accept_bounds_are_clamped(h in 1e-3f64..10.0, xi in 1e-3f64..10.0, v in 0.0f64..20.0) {
            let b = sc_accept_ub(h, xi, 3, v).unwrap();
            prop_assert!(b.value <= 1.0);
            prop_assert!(b.value >= 0.0);
            prop_assert!(b.raw >= b.value);
        }
    }
}
