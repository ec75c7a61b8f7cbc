//! Finite-state exactness laboratory.
//!
//! Discrete ARB chains carry the whole kernel decomposition explicitly —
//! proposal matrix `Q`, acceptance matrix `a`, transition matrix
//! `P_ij = a_ij Q_ij` (off-diagonal) with the rejected mass on the diagonal —
//! so total-variation curves, spectral gaps, conductance, and exact
//! Wasserstein distances can be computed to machine precision and compared
//! against the closed-form bounds.
//!
//! On a finite space the stationary atoms are not null, so the continuous
//! `TV ≥ (1 − A(θ))^t` statement picks up a correction: the verified form is
//! `TV(t) ≥ (1 − A_off(i))^t − π_i`, where `A_off` counts only off-diagonal
//! accepted mass.

mod transport;

pub use transport::{exact_w1, TransportPlan, MAX_ATOMS};

use thiserror::Error;

use crate::kernels::{AcceptanceRule, ArbKernel, KernelError};
use crate::numerics::{quadrature_1d, sym_eigen, DenseMatrix, NumericsError, RandomStream};
use crate::Scalar;

/// Largest state count for exhaustive conductance search (2^(m-1) subsets).
pub const MAX_CONDUCTANCE_STATES: usize = 20;

/// Largest grid size for 1-D kernel discretization.
pub const MAX_GRID_STATES: usize = 400;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("rule not supported on finite chains: {0}")]
    UnsupportedRule(String),

    #[error("chain is not reversible (worst detailed-balance residual {worst:e})")]
    NotReversible { worst: f64 },

    #[error("{states} states exceed the supported maximum {max}")]
    TooManyStates { states: usize, max: usize },

    #[error("lower bound violated at state {state}, t = {t}: TV {lhs:e} < bound {rhs:e}")]
    TheoremViolation { state: usize, t: usize, lhs: f64, rhs: f64 },

    #[error("fitted Wasserstein decay rate {fitted} exceeds spectral bound {beta} + 0.02")]
    RateViolation { fitted: f64, beta: f64 },

    #[error("grid covers only {covered} of the target mass")]
    InsufficientCoverage { covered: f64 },

    #[error("infeasible marginals: {0}")]
    InfeasibleMarginals(String),

    #[error("optimality certification failed: {0}")]
    CertificationFailed(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Numerics(#[from] NumericsError),

    #[error(transparent)]
    Kernel(#[from] KernelError),
}

pub type Result<T> = std::result::Result<T, OracleError>;

/// A finite-state ARB chain with its full kernel decomposition.
#[derive(Clone, Debug)]
pub struct FiniteChain<T: Scalar> {
    coords: Vec<Vec<T>>,
    stationary: Vec<T>,
    transition: DenseMatrix<T>,
    proposal: DenseMatrix<T>,
    acceptance: DenseMatrix<T>,
    off_acceptance: Vec<T>,
}

impl<T: Scalar> FiniteChain<T> {
    /// Validates and assembles a chain from explicit parts. The transition
    /// matrix must be row-stochastic with `P_ii = 1 − A_off(i)` and must
    /// leave the stationary weights invariant.
    pub fn from_parts(
        coords: Vec<Vec<T>>,
        stationary: Vec<T>,
        transition: DenseMatrix<T>,
        proposal: DenseMatrix<T>,
        acceptance: DenseMatrix<T>,
    ) -> Result<Self> {
        let m = stationary.len();
        if m == 0 {
            return Err(OracleError::InvalidChain("no states".to_string()));
        }
        for matrix in [&transition, &proposal, &acceptance] {
            if matrix.rows() != m || matrix.cols() != m {
                return Err(OracleError::InvalidChain("matrix dimensions disagree".to_string()));
            }
        }
        if coords.len() != m {
            return Err(OracleError::InvalidChain("coordinate count disagrees".to_string()));
        }
        let tol = T::lit(1e-12);
        let total = stationary.iter().fold(T::zero(), |acc, &p| acc + p);
        if stationary.iter().any(|&p| !(p > T::zero())) || (total - T::one()).abs() > tol {
            return Err(OracleError::InvalidChain(
                "stationary weights must be positive and sum to 1".to_string(),
            ));
        }
        for i in 0..m {
            let mut row_sum = T::zero();
            for j in 0..m {
                let p = transition[(i, j)];
                if !(p >= -tol) {
                    return Err(OracleError::InvalidChain(format!(
                        "negative transition probability at ({i}, {j})"
                    )));
                }
                row_sum = row_sum + p;
            }
            if (row_sum - T::one()).abs() > tol {
                return Err(OracleError::InvalidChain(format!(
                    "row {i} sums to {row_sum}, not 1"
                )));
            }
        }
        let mut off_acceptance = vec![T::zero(); m];
        for i in 0..m {
            let mut acc = T::zero();
            for j in 0..m {
                if i != j {
                    acc = acc + acceptance[(i, j)] * proposal[(i, j)];
                }
            }
            off_acceptance[i] = acc;
            if (transition[(i, i)] - (T::one() - acc)).abs() > T::lit(1e-10) {
                return Err(OracleError::InvalidChain(format!(
                    "diagonal of row {i} does not carry the rejected mass"
                )));
            }
        }
        // Stationarity πᵀP = πᵀ.
        let image = transition.vecmat(&stationary);
        let drift = image
            .iter()
            .zip(&stationary)
            .fold(T::zero(), |acc, (&a, &b)| acc + (a - b).abs());
        if drift > T::lit(1e-10) {
            return Err(OracleError::InvalidChain(format!(
                "stationary weights are not invariant (L1 drift {drift})"
            )));
        }
        Ok(Self { coords, stationary, transition, proposal, acceptance, off_acceptance })
    }

    pub fn states(&self) -> usize {
        self.stationary.len()
    }

    pub fn stationary(&self) -> &[T] {
        &self.stationary
    }

    pub fn transition(&self) -> &DenseMatrix<T> {
        &self.transition
    }

    pub fn proposal_matrix(&self) -> &DenseMatrix<T> {
        &self.proposal
    }

    pub fn acceptance_matrix(&self) -> &DenseMatrix<T> {
        &self.acceptance
    }

    /// `A_off(i) = Σ_{j≠i} a_ij Q_ij`, the probability of an accepted move
    /// away from state `i`.
    pub fn off_acceptance(&self, state: usize) -> T {
        self.off_acceptance[state]
    }

    pub fn coords(&self) -> &[Vec<T>] {
        &self.coords
    }

    pub fn with_coords(mut self, coords: Vec<Vec<T>>) -> Result<Self> {
        if coords.len() != self.states() {
            return Err(OracleError::InvalidChain("coordinate count disagrees".to_string()));
        }
        self.coords = coords;
        Ok(self)
    }

    /// Largest detailed-balance residual `|π_i P_ij − π_j P_ji|`.
    pub fn detailed_balance_residual(&self) -> T {
        let m = self.states();
        let mut worst = T::zero();
        for i in 0..m {
            for j in (i + 1)..m {
                let lhs = self.stationary[i] * self.transition[(i, j)];
                let rhs = self.stationary[j] * self.transition[(j, i)];
                worst = worst.max((lhs - rhs).abs());
            }
        }
        worst
    }

    /// Exact total-variation curve `t ↦ ½‖P^t(start, ·) − π‖₁` for
    /// `t = 1..=horizon`.
    pub fn exact_tv_curve(&self, start: usize, horizon: usize) -> Vec<T> {
        let m = self.states();
        assert!(start < m, "start state out of range");
        let half = T::lit(0.5);
        let mut row = vec![T::zero(); m];
        row[start] = T::one();
        let mut curve = Vec::with_capacity(horizon);
        for _ in 0..horizon {
            row = self.transition.vecmat(&row);
            let l1 = row
                .iter()
                .zip(&self.stationary)
                .fold(T::zero(), |acc, (&a, &b)| acc + (a - b).abs());
            curve.push(half * l1);
        }
        curve
    }

    /// Checks the stuck-mass lower bound `TV(t) ≥ (1 − A_off(i))^t − π_i`
    /// for every state and every `t ≤ horizon` (slack `1e-10`), reporting the
    /// worst margin on success and the first counterexample on failure.
    pub fn finite_tv_theorem_check(&self, horizon: usize) -> Result<TvTheoremReport<T>> {
        let slack = T::lit(1e-10);
        let mut worst_margin = T::infinity();
        let mut checks = 0usize;
        for state in 0..self.states() {
            let curve = self.exact_tv_curve(state, horizon);
            let keep = T::one() - self.off_acceptance[state];
            let mut power = T::one();
            for (idx, &tv) in curve.iter().enumerate() {
                power = power * keep;
                let bound = power - self.stationary[state];
                let margin = tv - bound;
                checks += 1;
                if margin < worst_margin {
                    worst_margin = margin;
                }
                if margin < -slack {
                    return Err(OracleError::TheoremViolation {
                        state,
                        t: idx + 1,
                        lhs: tv.to_f64().unwrap_or(f64::NAN),
                        rhs: bound.to_f64().unwrap_or(f64::NAN),
                    });
                }
            }
        }
        Ok(TvTheoremReport { states: self.states(), horizon, checks, worst_margin })
    }

    /// Spectral gap `1 − β` of a reversible chain, with
    /// `β = max_{i ≥ 2} |λ_i|` computed from the symmetrized matrix
    /// `D^{1/2} P D^{-1/2}`.
    pub fn spectral_gap(&self) -> Result<SpectralGap<T>> {
        let residual = self.detailed_balance_residual();
        if residual > T::lit(1e-10) {
            return Err(OracleError::NotReversible {
                worst: residual.to_f64().unwrap_or(f64::NAN),
            });
        }
        let m = self.states();
        let sym = DenseMatrix::from_fn(m, m, |i, j| {
            (self.stationary[i] / self.stationary[j]).sqrt() * self.transition[(i, j)]
        });
        let half = T::lit(0.5);
        let sym = DenseMatrix::from_fn(m, m, |i, j| (sym[(i, j)] + sym[(j, i)]) * half);
        let eigen = sym_eigen(&sym)?;
        let beta = eigen.values.iter().skip(1).fold(T::zero(), |acc, &l| acc.max(l.abs()));
        Ok(SpectralGap { gap: T::one() - beta, beta })
    }

    /// Exact conductance `k_P = min_B Σ_{i∈B} π_i P(i, Bᶜ) / (Π(B)Π(Bᶜ))`
    /// by exhaustive search over proper subsets (fixing state 0 in `B`
    /// covers complements).
    pub fn conductance(&self) -> Result<Conductance<T>> {
        let m = self.states();
        if m > MAX_CONDUCTANCE_STATES {
            return Err(OracleError::TooManyStates { states: m, max: MAX_CONDUCTANCE_STATES });
        }
        if m < 2 {
            return Err(OracleError::InvalidChain("conductance needs at least 2 states".to_string()));
        }
        let full: u32 = (1u32 << m) - 1;
        let mut best = T::infinity();
        let mut best_mask = 0u32;
        let mut mask = 1u32;
        while mask < full {
            if mask & 1 == 1 {
                let mut pi_b = T::zero();
                let mut flow = T::zero();
                for i in 0..m {
                    if mask >> i & 1 == 1 {
                        pi_b = pi_b + self.stationary[i];
                        for j in 0..m {
                            if mask >> j & 1 == 0 {
                                flow = flow + self.stationary[i] * self.transition[(i, j)];
                            }
                        }
                    }
                }
                let value = flow / (pi_b * (T::one() - pi_b));
                if value < best {
                    best = value;
                    best_mask = mask;
                }
            }
            mask += 2;
        }
        let subset = (0..m).filter(|&i| best_mask >> i & 1 == 1).collect();
        Ok(Conductance { value: best, subset })
    }

    /// Cost matrix `min(1, ‖x_i − x_j‖₂)` over the state coordinates.
    pub fn bounded_metric_cost(&self) -> DenseMatrix<T> {
        let m = self.states();
        DenseMatrix::from_fn(m, m, |i, j| {
            let mut sq = T::zero();
            for (a, b) in self.coords[i].iter().zip(&self.coords[j]) {
                sq = sq + (*a - *b) * (*a - *b);
            }
            sq.sqrt().min(T::one())
        })
    }

    /// Computes `W_{d∧1}(P^t(i, ·), π)` exactly for every start and fits the
    /// decay rate; for a reversible chain the fitted rate cannot exceed
    /// `β + 0.02` (the fit tolerance is pragmatic, not sharp). Illustrates —
    /// does not prove — the equivalence of the spectral gap and geometric
    /// Wasserstein convergence.
    pub fn finite_equiv_illustration(&self, horizon: usize) -> Result<EquivReport<T>> {
        let beta = self.spectral_gap()?.beta;
        let cost = self.bounded_metric_cost();
        let m = self.states();
        let floor = T::lit(1e-12);
        let mut fitted_rate = T::zero();
        let mut constant = T::zero();
        let mut distances = Vec::with_capacity(m);
        for start in 0..m {
            let mut row = vec![T::zero(); m];
            row[start] = T::one();
            let mut series = Vec::with_capacity(horizon);
            for _ in 0..horizon {
                row = self.transition.vecmat(&row);
                let w = exact_w1(&row, &self.stationary, &cost)?.cost;
                series.push(w);
            }
            distances.push(series.clone());
            // Log-linear fit over the points above the numeric floor. Only
            // the tail half is fitted: early iterations mix several spectral
            // modes, which can tilt the fitted slope above log β.
            let usable: Vec<(T, T)> = series
                .iter()
                .enumerate()
                .filter(|(_, &w)| w > floor)
                .map(|(idx, &w)| (T::count(idx + 1), w.ln()))
                .collect();
            if usable.len() < 2 {
                continue;
            }
            let skip = if usable.len() >= 6 { usable.len() / 2 } else { 0 };
            let points = &usable[skip..];
            let nf = T::count(points.len());
            let sum_t = points.iter().fold(T::zero(), |acc, &(t, _)| acc + t);
            let sum_y = points.iter().fold(T::zero(), |acc, &(_, y)| acc + y);
            let sum_tt = points.iter().fold(T::zero(), |acc, &(t, _)| acc + t * t);
            let sum_ty = points.iter().fold(T::zero(), |acc, &(t, y)| acc + t * y);
            let denom = nf * sum_tt - sum_t * sum_t;
            if denom == T::zero() {
                continue;
            }
            let slope = (nf * sum_ty - sum_t * sum_y) / denom;
            let intercept = (sum_y - slope * sum_t) / nf;
            fitted_rate = fitted_rate.max(slope.exp());
            constant = constant.max(intercept.exp());
        }
        if fitted_rate > beta + T::lit(0.02) {
            return Err(OracleError::RateViolation {
                fitted: fitted_rate.to_f64().unwrap_or(f64::NAN),
                beta: beta.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(EquivReport { fitted_rate, beta, constant, horizon, distances })
    }
}

/// Report of a finite TV theorem check.
#[derive(Clone, Debug)]
pub struct TvTheoremReport<T> {
    pub states: usize,
    pub horizon: usize,
    pub checks: usize,
    /// Smallest value of `TV(t) − [(1 − A_off(i))^t − π_i]` over the sweep;
    /// nonnegative (up to slack) when the bound holds.
    pub worst_margin: T,
}

#[derive(Clone, Copy, Debug)]
pub struct SpectralGap<T> {
    pub gap: T,
    pub beta: T,
}

#[derive(Clone, Debug)]
pub struct Conductance<T> {
    pub value: T,
    /// A minimizing subset (contains state 0 by the complement symmetry).
    pub subset: Vec<usize>,
}

/// Report of the Wasserstein-rate illustration.
#[derive(Clone, Debug)]
pub struct EquivReport<T> {
    pub fitted_rate: T,
    pub beta: T,
    /// Largest fitted leading constant across starts.
    pub constant: T,
    pub horizon: usize,
    /// `distances[i][t-1] = W_{d∧1}(P^t(i, ·), π)`.
    pub distances: Vec<Vec<T>>,
}

fn finite_acceptance<T: Scalar>(
    rule: &AcceptanceRule<T>,
    pi: &[T],
    q: &DenseMatrix<T>,
    i: usize,
    j: usize,
) -> Result<T> {
    let forward = pi[i] * q[(i, j)];
    let backward = pi[j] * q[(j, i)];
    Ok(match rule {
        AcceptanceRule::MetropolisHastings => {
            if forward == T::zero() {
                T::one()
            } else {
                (backward / forward).min(T::one())
            }
        }
        AcceptanceRule::Barker => {
            if forward == T::zero() {
                T::one()
            } else {
                backward / (forward + backward)
            }
        }
        AcceptanceRule::PortkeyBarker { delta } => {
            if !(*delta >= T::zero()) {
                return Err(OracleError::InvalidChain("portkey δ must be nonnegative".to_string()));
            }
            if forward == T::zero() {
                T::one()
            } else {
                backward / ((forward + backward) * (T::one() + *delta))
            }
        }
        AcceptanceRule::NonReversibleCrankNicolson { .. } => {
            return Err(OracleError::UnsupportedRule(
                "the non-reversible Crank-Nicolson rule is tied to a continuous Gaussian target"
                    .to_string(),
            ));
        }
    })
}

/// Builds a finite ARB chain from stationary weights, a proposal matrix, and
/// an acceptance rule: `P_ij = a_ij Q_ij` off the diagonal, with the
/// rejected mass on the diagonal. Default coordinates are `x_i = i`.
pub fn build_finite_arb<T: Scalar>(
    pi: &[T],
    q: &DenseMatrix<T>,
    rule: &AcceptanceRule<T>,
) -> Result<FiniteChain<T>> {
    let m = pi.len();
    if m == 0 {
        return Err(OracleError::InvalidChain("no states".to_string()));
    }
    if q.rows() != m || q.cols() != m {
        return Err(OracleError::InvalidChain("proposal matrix dimension mismatch".to_string()));
    }
    let tol = T::lit(1e-12);
    let total = pi.iter().fold(T::zero(), |acc, &p| acc + p);
    if pi.iter().any(|&p| !(p > T::zero())) || (total - T::one()).abs() > tol {
        return Err(OracleError::InvalidChain(
            "stationary weights must be positive and sum to 1".to_string(),
        ));
    }
    for i in 0..m {
        let mut row = T::zero();
        for j in 0..m {
            if !(q[(i, j)] >= T::zero()) {
                return Err(OracleError::InvalidChain("proposal entries must be ≥ 0".to_string()));
            }
            row = row + q[(i, j)];
        }
        if (row - T::one()).abs() > tol {
            return Err(OracleError::InvalidChain(format!(
                "proposal row {i} sums to {row}, not 1"
            )));
        }
    }

    let mut acceptance = DenseMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            acceptance[(i, j)] = finite_acceptance(rule, pi, q, i, j)?;
        }
    }
    let mut transition = DenseMatrix::zeros(m, m);
    for i in 0..m {
        let mut off = T::zero();
        for j in 0..m {
            if i != j {
                let p = acceptance[(i, j)] * q[(i, j)];
                transition[(i, j)] = p;
                off = off + p;
            }
        }
        transition[(i, i)] = T::one() - off;
    }
    let coords = (0..m).map(|i| vec![T::count(i)]).collect();
    FiniteChain::from_parts(coords, pi.to_vec(), transition, q.clone(), acceptance)
}

/// A discretized 1-D kernel together with its construction diagnostics.
#[derive(Clone, Debug)]
pub struct DiscretizedChain<T: Scalar> {
    pub chain: FiniteChain<T>,
    /// `‖πᵀP − πᵀ‖₁` of the discrete chain.
    pub stationarity_residual: T,
    pub cell_width: T,
}

/// Discretizes a 1-D ARB kernel onto `states` midpoint cells of `[lo, hi]`:
/// `π_i ∝ π(x_i)`, `Q_ij ∝ q(x_i, x_j)` row-normalized, then the finite ARB
/// construction with the kernel's own rule.
///
/// The grid must cover at least `1 − 1e-8` of the target mass, assessed by
/// comparing quadrature over `[lo, hi]` against a 50%-widened interval.
pub fn discretize_kernel_1d<T: Scalar>(
    kernel: &ArbKernel<T>,
    lo: T,
    hi: T,
    states: usize,
) -> Result<DiscretizedChain<T>> {
    if kernel.target().dim() != 1 {
        return Err(OracleError::InvalidChain("discretization is for 1-D kernels".to_string()));
    }
    if !(2..=MAX_GRID_STATES).contains(&states) {
        return Err(OracleError::InvalidChain(format!(
            "grid size must lie in 2..={MAX_GRID_STATES}"
        )));
    }
    if !(lo < hi) {
        return Err(OracleError::InvalidChain("grid range is empty".to_string()));
    }
    let target = kernel.target();
    // Coverage check with a shifted exponent so unnormalized log-densities
    // cannot overflow.
    let shift = target.log_density(&[(lo + hi) / T::lit(2.0)]);
    let density = |x: T| (target.log_density(&[x]) - shift).exp();
    let pad = (hi - lo) / T::lit(2.0);
    let mass_in = quadrature_1d(density, lo, hi, 128).map_err(OracleError::Numerics)?;
    let mass_ext =
        quadrature_1d(density, lo - pad, hi + pad, 192).map_err(OracleError::Numerics)?;
    let covered = mass_in / mass_ext;
    if !(covered >= T::one() - T::lit(1e-8)) {
        return Err(OracleError::InsufficientCoverage {
            covered: covered.to_f64().unwrap_or(f64::NAN),
        });
    }

    let width = (hi - lo) / T::count(states);
    let half = T::lit(0.5);
    let centers: Vec<T> = (0..states).map(|i| lo + width * (T::count(i) + half)).collect();
    let mut pi: Vec<T> = centers.iter().map(|&x| (target.log_density(&[x]) - shift).exp()).collect();
    let total = pi.iter().fold(T::zero(), |acc, &p| acc + p);
    pi.iter_mut().for_each(|p| *p = *p / total);

    let proposal = kernel.proposal();
    let mut q = DenseMatrix::zeros(states, states);
    for i in 0..states {
        let mut row_total = T::zero();
        for j in 0..states {
            let v = proposal.log_q(&[centers[i]], &[centers[j]]).exp();
            q[(i, j)] = v;
            row_total = row_total + v;
        }
        for j in 0..states {
            q[(i, j)] = q[(i, j)] / row_total;
        }
    }

    let chain = build_finite_arb(&pi, &q, kernel.rule())?
        .with_coords(centers.iter().map(|&x| vec![x]).collect())?;
    let image = chain.transition().vecmat(chain.stationary());
    let residual = image
        .iter()
        .zip(chain.stationary())
        .fold(T::zero(), |acc, (&a, &b)| acc + (a - b).abs());
    Ok(DiscretizedChain { chain, stationarity_residual: residual, cell_width: width })
}

/// Seeded random reversible chain: 2 to `max_states` states, strictly
/// positive stationary weights and proposal rows, 1-D coordinates in
/// `[0, 2.5)`.
pub fn random_reversible_chain<T: Scalar>(
    stream: &mut RandomStream,
    max_states: usize,
    rule: &AcceptanceRule<T>,
) -> FiniteChain<T> {
    assert!(max_states >= 2);
    let m = 2 + stream.index(max_states - 1);
    let mut pi: Vec<T> = (0..m).map(|_| T::lit(0.1) + stream.uniform::<T>()).collect();
    let total = pi.iter().fold(T::zero(), |acc, &p| acc + p);
    pi.iter_mut().for_each(|p| *p = *p / total);
    let mut q = DenseMatrix::zeros(m, m);
    for i in 0..m {
        let mut row = T::zero();
        for j in 0..m {
            let v = T::lit(0.05) + stream.uniform::<T>();
            q[(i, j)] = v;
            row = row + v;
        }
        for j in 0..m {
            q[(i, j)] = q[(i, j)] / row;
        }
    }
    let coords = (0..m).map(|_| vec![stream.uniform_in(T::zero(), T::lit(2.5))]).collect();
    build_finite_arb(&pi, &q, rule)
        .and_then(|c| c.with_coords(coords))
        .expect("randomly generated chain inputs are valid")
}
