//! Accept-reject-based Markov kernels: acceptance rules `a(θ, θ')`, one-step
//! transition simulation, Monte Carlo estimation of the acceptance
//! probability `A(θ) = ∫ a(θ, θ') q(θ, θ') dθ'`, and random-scan composition
//! of componentwise kernels.
//!
//! All acceptance ratios are computed in log space, so log-density
//! differences up to `|Δ| ≈ 1e6` (extreme concentration regimes) neither
//! overflow nor produce NaN. An off-support current state accepts any
//! in-support proposal; chains are nonetheless always initialized in-support.

use std::sync::Arc;

use thiserror::Error;

use crate::numerics::{dot, quadrature_1d, NumericsError, RandomStream};
use crate::proposals::{ProposalFamily, ProposalKind};
use crate::targets::{sigmoid, TargetDensity};
use crate::Scalar;

/// Errors raised by kernel construction and estimation.
#[derive(Debug, Error)]
pub enum KernelError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("target dimension {target} does not match proposal dimension {proposal}")]
    DimensionMismatch { target: usize, proposal: usize },

    #[error("non-reversible Crank-Nicolson rule misuse: {0}")]
    InvalidNonReversibleSetup(String),

    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, KernelError>;

/// Acceptance rule of an ARB kernel.
///
/// * `MetropolisHastings`: `min(1, π'q'/πq)`, and 1 when `πq = 0`.
/// * `Barker`: `π'q' / (πq + π'q')`.
/// * `PortkeyBarker`: `π'q' / [(1 + δ)(πq + π'q')]`, the Barker rule damped
///   by the symmetric slack `d(θ,θ') = δ(πq + π'q')` with `δ ≥ 0`.
/// * `NonReversibleCrankNicolson`: `min(1, (γ + π'q')/(πq))` with vorticity
///   `γ(θ,θ') = c[ρ(θ)q(θ,θ') − ρ(θ')q(θ',θ)]`, `c = 1/(2^d σ^d)`, and `ρ`
///   the standard Gaussian density. Only valid for a `N(0, σ²I_d)` target
///   with `σ² > 1` and a Crank-Nicolson proposal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AcceptanceRule<T> {
    MetropolisHastings,
    Barker,
    PortkeyBarker { delta: T },
    NonReversibleCrankNicolson { sigma2: T },
}

fn validate_rule<T: Scalar>(
    rule: &AcceptanceRule<T>,
    target: &TargetDensity<T>,
    proposal: &ProposalFamily<T>,
) -> Result<()> {
    match rule {
        AcceptanceRule::PortkeyBarker { delta } => {
            if !(*delta >= T::zero()) || !delta.is_finite() {
                return Err(KernelError::InvalidParameter(
                    "portkey slack δ must be nonnegative".to_string(),
                ));
            }
        }
        AcceptanceRule::NonReversibleCrankNicolson { sigma2 } => {
            if !(*sigma2 > T::one()) {
                return Err(KernelError::InvalidNonReversibleSetup(
                    "target variance σ² must exceed 1".to_string(),
                ));
            }
            if proposal.kind() != ProposalKind::CrankNicolson {
                return Err(KernelError::InvalidNonReversibleSetup(
                    "proposal must be Crank-Nicolson".to_string(),
                ));
            }
            // Spot-check that the target is the matching N(0, σ²I_d).
            let d = target.dim();
            let two = T::lit(2.0);
            let origin = vec![T::zero(); d];
            let expect = -T::count(d) / two * (two * T::PI() * *sigma2).ln();
            if (target.log_density(&origin) - expect).abs() > T::lit(1e-9) {
                return Err(KernelError::InvalidNonReversibleSetup(
                    "target is not N(0, σ²I) with the stated σ²".to_string(),
                ));
            }
            let mut unit = vec![T::zero(); d];
            unit[0] = T::one();
            let drop = target.log_density(&unit) - target.log_density(&origin);
            if (drop + (two * *sigma2).recip()).abs() > T::lit(1e-9) {
                return Err(KernelError::InvalidNonReversibleSetup(
                    "target is not N(0, σ²I) with the stated σ²".to_string(),
                ));
            }
        }
        _ => {}
    }
    Ok(())
}

fn non_reversible_accept<T: Scalar>(
    sigma2: T,
    target: &TargetDensity<T>,
    proposal: &ProposalFamily<T>,
    from: &[T],
    to: &[T],
    log_from: T,
) -> T {
    let d = target.dim();
    let two = T::lit(2.0);
    let log_c = -T::count(d) * two.ln() - T::count(d) / two * sigma2.ln();
    let log_rho = |x: &[T]| -T::count(d) / two * (two * T::PI()).ln() - dot(x, x) / two;
    let t1 = log_c + log_rho(from) + proposal.log_q(from, to);
    let t2 = target.log_density(to) + proposal.log_q(to, from);
    let t3 = log_c + log_rho(to) + proposal.log_q(to, from);
    // t2 ≥ t3 always (c ρ/π ≤ 1), so the numerator is strictly positive.
    let m = t1.max(t2);
    let numerator = (t1 - m).exp() + (t2 - m).exp() - (t3 - m).exp();
    let log_num = m + numerator.ln();
    (log_num - log_from).min(T::zero()).exp()
}

/// Acceptance probability `a(θ, θ') ∈ [0, 1]` of `rule` for the given target
/// and proposal, computed in log space.
///
/// When `π(θ)q(θ,θ') = 0` (the current state is off support) the result
/// is 1 for every rule.
pub fn accept_prob<T: Scalar>(
    rule: &AcceptanceRule<T>,
    target: &TargetDensity<T>,
    proposal: &ProposalFamily<T>,
    from: &[T],
    to: &[T],
) -> Result<T> {
    validate_rule(rule, target, proposal)?;
    Ok(accept_prob_validated(rule, target, proposal, from, to))
}

fn accept_prob_validated<T: Scalar>(
    rule: &AcceptanceRule<T>,
    target: &TargetDensity<T>,
    proposal: &ProposalFamily<T>,
    from: &[T],
    to: &[T],
) -> T {
    let log_from = target.log_density(from) + proposal.log_q(from, to);
    if log_from == T::neg_infinity() {
        return T::one();
    }
    match rule {
        AcceptanceRule::MetropolisHastings => {
            let log_to = target.log_density(to) + proposal.log_q(to, from);
            (log_to - log_from).min(T::zero()).exp()
        }
        AcceptanceRule::Barker => {
            let log_to = target.log_density(to) + proposal.log_q(to, from);
            sigmoid(log_to - log_from)
        }
        AcceptanceRule::PortkeyBarker { delta } => {
            let log_to = target.log_density(to) + proposal.log_q(to, from);
            sigmoid(log_to - log_from) / (T::one() + *delta)
        }
        AcceptanceRule::NonReversibleCrankNicolson { sigma2 } => {
            non_reversible_accept(*sigma2, target, proposal, from, to, log_from)
        }
    }
}

/// Result of one kernel transition.
#[derive(Clone, Debug)]
pub struct StepOutcome<T> {
    pub state: Vec<T>,
    pub accepted: bool,
    pub proposal: Vec<T>,
}

/// Monte Carlo estimate of an acceptance probability, with provenance.
#[derive(Clone, Debug)]
pub struct AcceptanceEstimate<T> {
    pub mean: T,
    pub std_err: T,
    pub samples: usize,
    pub seed: u64,
    pub stream_id: u64,
}

/// An accept-reject-based Markov kernel: target, proposal, and rule.
#[derive(Clone)]
pub struct ArbKernel<T: Scalar> {
    target: TargetDensity<T>,
    proposal: ProposalFamily<T>,
    rule: AcceptanceRule<T>,
}

impl<T: Scalar> ArbKernel<T> {
    pub fn new(
        target: TargetDensity<T>,
        proposal: ProposalFamily<T>,
        rule: AcceptanceRule<T>,
    ) -> Result<Self> {
        if target.dim() != proposal.dim() {
            return Err(KernelError::DimensionMismatch {
                target: target.dim(),
                proposal: proposal.dim(),
            });
        }
        validate_rule(&rule, &target, &proposal)?;
        Ok(Self { target, proposal, rule })
    }

    pub fn target(&self) -> &TargetDensity<T> {
        &self.target
    }

    pub fn proposal(&self) -> &ProposalFamily<T> {
        &self.proposal
    }

    pub fn rule(&self) -> &AcceptanceRule<T> {
        &self.rule
    }

    /// `a(from, to)`; the rule was validated at construction.
    pub fn accept_prob(&self, from: &[T], to: &[T]) -> T {
        accept_prob_validated(&self.rule, &self.target, &self.proposal, from, to)
    }

    /// Draws `θ' ~ Q(θ, ·)` and accepts it with probability `a(θ, θ')`; on
    /// rejection the state is unchanged.
    pub fn step(&self, from: &[T], stream: &mut RandomStream) -> StepOutcome<T> {
        let candidate = self.proposal.sample(from, stream);
        let a = self.accept_prob(from, &candidate);
        let u: T = stream.uniform();
        if u < a {
            StepOutcome { state: candidate.clone(), accepted: true, proposal: candidate }
        } else {
            StepOutcome { state: from.to_vec(), accepted: false, proposal: candidate }
        }
    }

    /// Unbiased Monte Carlo estimate of `A(θ)`: the mean of `a(θ, θ'_i)`
    /// over `n ≥ 2` i.i.d. proposal draws `θ'_i ~ Q(θ, ·)`.
    pub fn mc_acceptance(
        &self,
        at: &[T],
        n: usize,
        stream: &mut RandomStream,
    ) -> Result<AcceptanceEstimate<T>> {
        if n < 2 {
            return Err(KernelError::InvalidParameter(
                "acceptance estimation needs at least 2 samples".to_string(),
            ));
        }
        let seed = stream.seed();
        let stream_id = stream.stream_id();
        let mut sum = T::zero();
        let mut sum_sq = T::zero();
        for _ in 0..n {
            let candidate = self.proposal.sample(at, stream);
            let a = self.accept_prob(at, &candidate);
            sum = sum + a;
            sum_sq = sum_sq + a * a;
        }
        let nf = T::count(n);
        let mean = sum / nf;
        let var = ((sum_sq - sum * sum / nf) / (nf - T::one())).max(T::zero());
        Ok(AcceptanceEstimate { mean, std_err: (var / nf).sqrt(), samples: n, seed, stream_id })
    }
}

/// Deterministic quadrature evaluation of `A(θ) = ∫ a(θ, y) q(θ, y) dy` for
/// one-dimensional kernels, over the truncated range `[lo, hi]`.
pub fn quadrature_acceptance<T: Scalar>(
    kernel: &ArbKernel<T>,
    at: &[T],
    lo: T,
    hi: T,
    panels: usize,
) -> Result<T> {
    if kernel.target.dim() != 1 {
        return Err(KernelError::InvalidParameter(
            "quadrature acceptance is for 1-D kernels".to_string(),
        ));
    }
    let integrand = |y: T| {
        let point = [y];
        kernel.accept_prob(at, &point) * kernel.proposal.log_q(at, &point).exp()
    };
    Ok(quadrature_1d(integrand, lo, hi, panels)?)
}

type ConditionalFactory<T> = Arc<dyn Fn(&[T]) -> TargetDensity<T> + Send + Sync>;

/// One component of a random-scan kernel: the coordinate block it updates,
/// a factory producing the conditional target given the full current state,
/// and the block-dimensional proposal and rule.
#[derive(Clone)]
pub struct ScanComponent<T: Scalar> {
    block: Vec<usize>,
    conditional: ConditionalFactory<T>,
    proposal: ProposalFamily<T>,
    rule: AcceptanceRule<T>,
}

impl<T: Scalar> ScanComponent<T> {
    pub fn new(
        block: Vec<usize>,
        conditional: impl Fn(&[T]) -> TargetDensity<T> + Send + Sync + 'static,
        proposal: ProposalFamily<T>,
        rule: AcceptanceRule<T>,
    ) -> Result<Self> {
        if block.is_empty() {
            return Err(KernelError::InvalidParameter("component block is empty".to_string()));
        }
        let mut seen = block.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != block.len() {
            return Err(KernelError::InvalidParameter(
                "component block repeats a coordinate".to_string(),
            ));
        }
        if proposal.dim() != block.len() {
            return Err(KernelError::DimensionMismatch {
                target: block.len(),
                proposal: proposal.dim(),
            });
        }
        Ok(Self { block, conditional: Arc::new(conditional), proposal, rule })
    }

    pub fn block(&self) -> &[usize] {
        &self.block
    }

    fn kernel_at(&self, state: &[T]) -> Result<ArbKernel<T>> {
        let target = (self.conditional)(state);
        ArbKernel::new(target, self.proposal.clone(), self.rule)
    }

    fn block_values(&self, state: &[T]) -> Vec<T> {
        self.block.iter().map(|&i| state[i]).collect()
    }
}

/// Random-scan composition: selects component `k` with probability `λ_k` and
/// applies its kernel to that coordinate block, holding the rest fixed.
#[derive(Clone)]
pub struct RandomScanKernel<T: Scalar> {
    components: Vec<ScanComponent<T>>,
    probs: Vec<T>,
}

impl<T: Scalar> RandomScanKernel<T> {
    /// Selection probabilities must be strictly positive and sum to 1 within
    /// `1e-12`; a component that could never be selected is rejected here.
    pub fn new(components: Vec<ScanComponent<T>>, probs: Vec<T>) -> Result<Self> {
        if components.is_empty() {
            return Err(KernelError::InvalidParameter("no components".to_string()));
        }
        if components.len() != probs.len() {
            return Err(KernelError::InvalidParameter(
                "selection probabilities must match the component count".to_string(),
            ));
        }
        if probs.iter().any(|p| !(*p > T::zero()) || !(*p <= T::one())) {
            return Err(KernelError::InvalidParameter(
                "selection probabilities must lie in (0, 1]".to_string(),
            ));
        }
        let total = probs.iter().fold(T::zero(), |acc, &p| acc + p);
        if (total - T::one()).abs() > T::lit(1e-12) {
            return Err(KernelError::InvalidParameter(format!(
                "selection probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { components, probs })
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    /// Draws a component index by inverse CDF. A single-component scan skips
    /// the draw, so it consumes exactly the randomness of its plain kernel.
    pub fn sample_component(&self, stream: &mut RandomStream) -> usize {
        if self.components.len() == 1 {
            return 0;
        }
        let u: T = stream.uniform();
        let mut acc = T::zero();
        for (k, &p) in self.probs.iter().enumerate() {
            acc = acc + p;
            if u < acc {
                return k;
            }
        }
        self.components.len() - 1
    }

    /// One random-scan transition from `state`.
    pub fn rs_step(&self, state: &[T], stream: &mut RandomStream) -> Result<Vec<T>> {
        let k = self.sample_component(stream);
        let component = &self.components[k];
        if component.block.iter().any(|&i| i >= state.len()) {
            return Err(KernelError::InvalidParameter(
                "component block exceeds the state dimension".to_string(),
            ));
        }
        let kernel = component.kernel_at(state)?;
        let outcome = kernel.step(&component.block_values(state), stream);
        let mut next = state.to_vec();
        for (slot, &i) in component.block.iter().enumerate() {
            next[i] = outcome.state[slot];
        }
        Ok(next)
    }

    /// Estimates each component's conditional acceptance probability at the
    /// current state and the combined value `Σ_k λ_k Â_k`.
    pub fn component_acceptances(
        &self,
        state: &[T],
        n: usize,
        stream: &mut RandomStream,
    ) -> Result<(Vec<AcceptanceEstimate<T>>, AcceptanceEstimate<T>)> {
        let mut estimates = Vec::with_capacity(self.components.len());
        for component in &self.components {
            let kernel = component.kernel_at(state)?;
            estimates.push(kernel.mc_acceptance(&component.block_values(state), n, stream)?);
        }
        let mut mean = T::zero();
        let mut var = T::zero();
        for (est, &p) in estimates.iter().zip(&self.probs) {
            mean = mean + p * est.mean;
            var = var + p * p * est.std_err * est.std_err;
        }
        let combined = AcceptanceEstimate {
            mean,
            std_err: var.sqrt(),
            samples: n,
            seed: stream.seed(),
            stream_id: stream.stream_id(),
        };
        Ok((estimates, combined))
    }
}
