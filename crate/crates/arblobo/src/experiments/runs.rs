//! The experiment drivers.

use std::time::Instant;

use rayon::prelude::*;

use crate::bounds::{
    accept_ub_bounded_proposal, laplace_density_lb, mixture_accept_ub, sc_accept_ub,
    zellner_accept_ub, LaplaceParams,
};
use crate::kernels::{quadrature_acceptance, AcceptanceRule, ArbKernel, RandomScanKernel, ScanComponent};
use crate::numerics::{gradient_descent, DenseMatrix, NumericsError, RandomStream};
use crate::oracle::{random_reversible_chain, FiniteChain};
use crate::proposals::{make_crank_nicolson, make_rw_gaussian};
use crate::targets::{
    make_gaussian, make_gaussian_mixture_2d, make_logistic_flat, make_logistic_gaussian_prior,
    make_logistic_zellner, smallest_hessian_eigenvalue, subexponential_conditional_1d,
    TargetDensity,
};

use super::{
    generate_logistic_data, summarize, ExperimentError, ExperimentOutput, ExperimentRow,
    ResolvedConfig, Result,
};

/// Mode-finding tolerance used by both scaling studies.
const MODE_TOLERANCE: f64 = 1e-8;
const MODE_MAX_ITER: usize = 50_000;
/// Iterate-norm guard; for flat-prior logistic regression an excursion past
/// this radius signals data separation (no finite maximizer).
const SEPARATION_GUARD: f64 = 100.0;
/// How many fresh data sets to try when separation is detected.
const MAX_REGENERATIONS: usize = 20;

/// Stream id for `(grid index, replication, slot)`. Slots `0..64` are data
/// attempts; slot `64 + k` feeds the Monte Carlo estimate of h-rule `k`.
fn stream_id(grid_index: usize, replication: usize, slot: usize) -> u64 {
    debug_assert!(slot < 1_000);
    debug_assert!(replication < 1_000_000 / 1_000);
    (grid_index as u64) * 1_000_000 + (replication as u64) * 1_000 + slot as u64
}

fn find_mode(
    target: &TargetDensity<f64>,
    max_norm: f64,
) -> std::result::Result<crate::numerics::OptimizerResult<f64>, NumericsError> {
    let objective = |b: &[f64]| -target.log_density(b);
    let gradient = |b: &[f64]| {
        target
            .grad_log_density(b)
            .expect("logistic targets expose gradients")
            .iter()
            .map(|v| -v)
            .collect::<Vec<f64>>()
    };
    let start = vec![0.0; target.dim()];
    gradient_descent(objective, gradient, &start, MODE_TOLERANCE, MODE_MAX_ITER, max_norm)
}

fn failure_rows(
    config: &ResolvedConfig,
    replication: usize,
    d: usize,
    n: usize,
    reason: &str,
) -> Vec<ExperimentRow> {
    config
        .h_rules
        .iter()
        .map(|rule| ExperimentRow {
            experiment: config.experiment,
            replication,
            d,
            n,
            h_rule: rule.to_string(),
            h: rule.evaluate(d, n),
            accept_mean: f64::NAN,
            accept_se: f64::NAN,
            log_accept: f64::NAN,
            rate_lb: f64::NAN,
            closed_form_ub: f64::NAN,
            flag: format!("optimizer_failed: {reason}"),
            asymptotic_ub: None,
            lambda0_hat: None,
            optimizer_iterations: 0,
            wall_time: std::time::Duration::ZERO,
        })
        .collect()
}

fn zellner_cell(
    config: &ResolvedConfig,
    grid_index: usize,
    replication: usize,
) -> Result<Vec<ExperimentRow>> {
    let (d, n) = config.grid[grid_index];
    let mut data_stream =
        RandomStream::new(config.seed, stream_id(grid_index, replication, 0));
    let data = generate_logistic_data(
        &mut data_stream,
        n,
        d,
        config.mechanism,
        config.beta_true.as_deref(),
    )?;
    let target = make_logistic_zellner(&data, config.g)?;
    let mode = match find_mode(&target, 1e6) {
        Ok(r) => r,
        Err(e) => return Ok(failure_rows(config, replication, d, n, &e.to_string())),
    };
    let xi = target.strong_convexity().expect("Zellner target records ξ");
    let gamma = d as f64 / n as f64;
    let mut rows = Vec::with_capacity(config.h_rules.len());
    for (k, rule) in config.h_rules.iter().enumerate() {
        let started = Instant::now();
        let h = rule.evaluate(d, n);
        let proposal = make_rw_gaussian(h, &DenseMatrix::identity(d))?;
        let kernel =
            ArbKernel::new(target.clone(), proposal, AcceptanceRule::MetropolisHastings)?;
        let mut mc_stream =
            RandomStream::new(config.seed, stream_id(grid_index, replication, 64 + k));
        let est = kernel.mc_acceptance(&mode.minimizer, config.mc_samples, &mut mc_stream)?;
        // Data-dependent bound (1 + h λ_min(XᵀX)/g)^{-d/2} through ξ.
        let empirical_ub = sc_accept_ub(h, xi, d, 0.0)?.value;
        let asymptotic_ub = zellner_accept_ub(h, n, gamma, config.g, d)?.value;
        rows.push(ExperimentRow {
            experiment: config.experiment,
            replication,
            d,
            n,
            h_rule: rule.to_string(),
            h,
            accept_mean: est.mean,
            accept_se: est.std_err,
            log_accept: est.mean.ln(),
            rate_lb: 1.0 - est.mean,
            closed_form_ub: empirical_ub,
            flag: String::new(),
            asymptotic_ub: Some(asymptotic_ub),
            lambda0_hat: None,
            optimizer_iterations: mode.iterations,
            wall_time: started.elapsed(),
        });
    }
    Ok(rows)
}

/// Zellner-prior scaling study over the `(d, n)` grid: per replication, draw
/// data, locate the posterior mode by gradient descent, estimate `A(β*)` by
/// Monte Carlo for each h-rule, and record the closed-form bounds.
pub fn run_zellner(config: &ResolvedConfig) -> Result<ExperimentOutput> {
    let jobs: Vec<(usize, usize)> = (0..config.grid.len())
        .flat_map(|g| (0..config.replications).map(move |r| (g, r)))
        .collect();
    let nested: Vec<Vec<ExperimentRow>> = jobs
        .par_iter()
        .map(|&(g, r)| zellner_cell(config, g, r))
        .collect::<Result<_>>()?;
    let rows: Vec<ExperimentRow> = nested.into_iter().flatten().collect();
    let summary = summarize(&rows);
    Ok(ExperimentOutput { config: config.clone(), rows, summary })
}

fn flat_cell(
    config: &ResolvedConfig,
    grid_index: usize,
    replication: usize,
) -> Result<Vec<ExperimentRow>> {
    let (d, n) = config.grid[grid_index];
    let mut regenerations = 0usize;
    let (target, mode, lambda0_hat) = loop {
        let mut data_stream =
            RandomStream::new(config.seed, stream_id(grid_index, replication, regenerations));
        let data = generate_logistic_data(
            &mut data_stream,
            n,
            d,
            config.mechanism,
            config.beta_true.as_deref(),
        )?;
        let target = make_logistic_flat(&data)?;
        match find_mode(&target, SEPARATION_GUARD) {
            Ok(r) => {
                let min_curvature = smallest_hessian_eigenvalue(&target, &r.minimizer)?;
                // λ₀ for the density scaled as exp(-n f_n): the Hessian of
                // f_n is H/n, so λ₀ = n / λ_min(H).
                let lambda0 = n as f64 / min_curvature;
                break (target, r, lambda0);
            }
            Err(NumericsError::DivergenceSuspected { .. }) => {
                regenerations += 1;
                if regenerations >= MAX_REGENERATIONS {
                    return Ok(failure_rows(
                        config,
                        replication,
                        d,
                        n,
                        &format!("separation persisted across {MAX_REGENERATIONS} data sets"),
                    ));
                }
            }
            Err(e) => return Ok(failure_rows(config, replication, d, n, &e.to_string())),
        }
    };
    let flag = if regenerations == 0 {
        String::new()
    } else {
        format!("regenerated({regenerations})")
    };
    let laplace = LaplaceParams::new(lambda0_hat, 1.0, n, d)?;
    let mut rows = Vec::with_capacity(config.h_rules.len());
    for (k, rule) in config.h_rules.iter().enumerate() {
        let started = Instant::now();
        let h = rule.evaluate(d, n);
        let proposal = make_rw_gaussian(h, &DenseMatrix::identity(d))?;
        let kernel =
            ArbKernel::new(target.clone(), proposal, AcceptanceRule::MetropolisHastings)?;
        let mut mc_stream =
            RandomStream::new(config.seed, stream_id(grid_index, replication, 64 + k));
        let est = kernel.mc_acceptance(&mode.minimizer, config.mc_samples, &mut mc_stream)?;
        // Concentration reference bound 2 (λ₀/(nh))^{d/2} with empirical λ₀.
        let log_b = -(d as f64) / 2.0 * (2.0 * std::f64::consts::PI * h).ln();
        let concentration_ub = accept_ub_bounded_proposal(laplace_density_lb(&laplace), log_b);
        rows.push(ExperimentRow {
            experiment: config.experiment,
            replication,
            d,
            n,
            h_rule: rule.to_string(),
            h,
            accept_mean: est.mean,
            accept_se: est.std_err,
            log_accept: est.mean.ln(),
            rate_lb: 1.0 - est.mean,
            closed_form_ub: concentration_ub.value,
            flag: flag.clone(),
            asymptotic_ub: None,
            lambda0_hat: Some(lambda0_hat),
            optimizer_iterations: mode.iterations,
            wall_time: started.elapsed(),
        });
    }
    Ok(rows)
}

/// Flat-prior scaling study with increasing `n`: the MLE is located with a
/// separation guard, the empirical `λ₀` is read off the Hessian at the MLE,
/// and the concentration bound is recorded next to the estimates.
pub fn run_flat_logistic(config: &ResolvedConfig) -> Result<ExperimentOutput> {
    let jobs: Vec<(usize, usize)> = (0..config.grid.len())
        .flat_map(|g| (0..config.replications).map(move |r| (g, r)))
        .collect();
    let nested: Vec<Vec<ExperimentRow>> = jobs
        .par_iter()
        .map(|&(g, r)| flat_cell(config, g, r))
        .collect::<Result<_>>()?;
    let rows: Vec<ExperimentRow> = nested.into_iter().flatten().collect();
    let summary = summarize(&rows);
    Ok(ExperimentOutput { config: config.clone(), rows, summary })
}

/// One worked-example inequality check: passes when `lhs ≤ rhs + slack`.
#[derive(Clone, Debug)]
pub struct ExampleCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
    pub detail: String,
}

impl ExampleCheck {
    fn new(name: &str, lhs: f64, rhs: f64, slack: f64, detail: String) -> Self {
        Self { name: name.to_string(), lhs, rhs, slack, pass: lhs <= rhs + slack, detail }
    }
}

/// Pass/fail table of the worked examples.
#[derive(Clone, Debug)]
pub struct ExamplesReport {
    pub checks: Vec<ExampleCheck>,
}

impl ExamplesReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,lhs,rhs,slack,pass,detail\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                c.name,
                c.lhs,
                c.rhs,
                c.slack,
                if c.pass { "pass" } else { "FAIL" },
                c.detail
            ));
        }
        out
    }
}

/// Evaluates each worked example at its stated parameters and checks the
/// stated inequality by quadrature (1-D) or Monte Carlo with a `3·se` slack.
pub fn run_examples(config: &ResolvedConfig) -> Result<ExamplesReport> {
    let n_mc = config.mc_samples;
    let mut checks = Vec::new();

    // Non-reversible Crank-Nicolson vs Metropolis-Hastings on N(0, σ²I):
    // A_NR(θ) ≤ 2^{-d} + A_MH(θ), evaluated by quadrature at d = 1.
    {
        let sigma2 = 4.0;
        let h = 0.5f64;
        let theta = [1.0f64];
        let target = make_gaussian(sigma2, 1)?;
        let proposal = make_crank_nicolson(h, 1)?;
        let nr = ArbKernel::new(
            target.clone(),
            proposal.clone(),
            AcceptanceRule::NonReversibleCrankNicolson { sigma2 },
        )?;
        let mh = ArbKernel::new(target, proposal, AcceptanceRule::MetropolisHastings)?;
        let center = (1.0 - h).sqrt() * theta[0];
        let spread = 12.0 * h.sqrt();
        let (lo, hi) = (center - spread, center + spread);
        let a_nr = quadrature_acceptance(&nr, &theta, lo, hi, 256)?;
        let a_mh = quadrature_acceptance(&mh, &theta, lo, hi, 256)?;
        checks.push(ExampleCheck::new(
            "cn_nonreversible_vs_mh",
            a_nr,
            0.5 + a_mh,
            1e-8,
            format!("A_NR={a_nr} A_MH={a_mh} (quadrature)"),
        ));
    }

    // Gaussian mixture, b = 2, h = 1: Â(0,0) ≤ 1/(2bh) = 1/4.
    {
        let (b, h) = (2.0, 1.0);
        let target = make_gaussian_mixture_2d(b)?;
        let proposal = make_rw_gaussian(h, &DenseMatrix::identity(2))?;
        let kernel = ArbKernel::new(target, proposal, AcceptanceRule::MetropolisHastings)?;
        let mut stream = RandomStream::new(config.seed, 910_000);
        let est = kernel.mc_acceptance(&[0.0, 0.0], n_mc, &mut stream)?;
        let bound = mixture_accept_ub(b, h, 0.0, 0.0)?.value;
        checks.push(ExampleCheck::new(
            "mixture_accept_ub",
            est.mean,
            bound,
            3.0 * est.std_err,
            format!("estimate={} se={}", est.mean, est.std_err),
        ));
    }

    // Gaussian-prior logistic regression: Â(β*) ≤ (h/σ² + 1)^{-d/2}.
    {
        let (d, n, sigma2_prior, h) = (2usize, 20usize, 1.0, 1.0);
        let mut data_stream = RandomStream::new(config.seed, 920_000);
        let data =
            generate_logistic_data(&mut data_stream, n, d, config.mechanism, None)?;
        let target = make_logistic_gaussian_prior(&data, sigma2_prior)?;
        let mode = find_mode(&target, 1e6).map_err(ExperimentError::Numerics)?;
        let proposal = make_rw_gaussian(h, &DenseMatrix::identity(d))?;
        let kernel = ArbKernel::new(target, proposal, AcceptanceRule::MetropolisHastings)?;
        let mut stream = RandomStream::new(config.seed, 920_001);
        let est = kernel.mc_acceptance(&mode.minimizer, n_mc, &mut stream)?;
        let bound = sc_accept_ub(h, sigma2_prior, d, 0.0)?.value;
        checks.push(ExampleCheck::new(
            "gaussian_prior_logistic_mode_ub",
            est.mean,
            bound,
            3.0 * est.std_err,
            format!("estimate={} se={} rate_lb={}", est.mean, est.std_err, 1.0 - bound),
        ));
    }

    // Random-scan hybrid on the sub-exponential target, h = 2:
    // combined acceptance at the origin ≤ 1/√(2h).
    {
        let h = 2.0;
        let scan = subexponential_scan(h, [0.5, 0.5])?;
        let mut stream = RandomStream::new(config.seed, 930_000);
        let (_, combined) = scan.component_acceptances(&[0.0, 0.0], n_mc, &mut stream)?;
        let bound = 1.0 / (2.0 * h).sqrt();
        checks.push(ExampleCheck::new(
            "hybrid_rs_combined_ub",
            combined.mean,
            bound,
            3.0 * combined.std_err,
            format!("estimate={} se={}", combined.mean, combined.std_err),
        ));
    }

    Ok(ExamplesReport { checks })
}

/// Random-scan random-walk Metropolis kernel for the sub-exponential 2-D
/// target with per-coordinate proposal variance `h`.
pub fn subexponential_scan(h: f64, probs: [f64; 2]) -> Result<RandomScanKernel<f64>> {
    let proposal = make_rw_gaussian(h, &DenseMatrix::identity(1))?;
    let first = ScanComponent::new(
        vec![0],
        |state: &[f64]| {
            subexponential_conditional_1d(1, state[1]).expect("index 1 is valid")
        },
        proposal.clone(),
        AcceptanceRule::MetropolisHastings,
    )?;
    let second = ScanComponent::new(
        vec![1],
        |state: &[f64]| {
            subexponential_conditional_1d(0, state[0]).expect("index 0 is valid")
        },
        proposal,
        AcceptanceRule::MetropolisHastings,
    )?;
    Ok(RandomScanKernel::new(vec![first, second], probs.to_vec())?)
}

/// Outcome of the finite-chain verification suite.
#[derive(Clone, Debug)]
pub struct OracleSuiteReport {
    pub horizon: usize,
    pub tv_chains: usize,
    pub tv_violations: usize,
    pub worst_tv_margin: f64,
    pub conductance_chains: usize,
    pub conductance_violations: usize,
    pub equiv_chains: usize,
    pub equiv_violations: usize,
    pub two_state_ok: bool,
}

impl OracleSuiteReport {
    pub fn violations(&self) -> usize {
        self.tv_violations
            + self.conductance_violations
            + self.equiv_violations
            + usize::from(!self.two_state_ok)
    }

    pub fn to_csv(&self) -> String {
        format!(
            "check,count,violations,detail\n\
             tv_lower_bound,{},{},worst_margin={}\n\
             conductance_ordering,{},{},\n\
             wasserstein_rate,{},{},\n\
             two_state_example,1,{},\n",
            self.tv_chains,
            self.tv_violations,
            self.worst_tv_margin,
            self.conductance_chains,
            self.conductance_violations,
            self.equiv_chains,
            self.equiv_violations,
            usize::from(!self.two_state_ok),
        )
    }
}

fn two_state_example_ok() -> bool {
    let pi = [2.0f64 / 3.0, 1.0 / 3.0];
    let q = match DenseMatrix::from_rows(&[vec![0.5f64, 0.5], vec![0.5, 0.5]]) {
        Ok(q) => q,
        Err(_) => return false,
    };
    let chain: FiniteChain<f64> =
        match crate::oracle::build_finite_arb(&pi, &q, &AcceptanceRule::MetropolisHastings) {
            Ok(chain) => chain,
            Err(_) => return false,
        };
    let p = chain.transition();
    let tv1 = chain.exact_tv_curve(0, 1)[0];
    let Ok(gap) = chain.spectral_gap() else { return false };
    let Ok(cond) = chain.conductance() else { return false };
    (p[(0, 0)] - 0.75).abs() < 1e-12
        && (p[(0, 1)] - 0.25).abs() < 1e-12
        && (chain.off_acceptance(0) - 0.25).abs() < 1e-12
        && (tv1 - 1.0 / 12.0).abs() < 1e-12
        && (gap.gap - 0.75).abs() < 1e-12
        && (cond.value - 0.75).abs() < 1e-12
}

/// Runs the finite-chain property suites over seeded random chains: the TV
/// lower-bound check, the conductance orderings `1 − β ≤ k_P ≤ min_i
/// A_off(i)/(1 − π_i)`, and the Wasserstein-rate illustration.
pub fn run_oracle_suite(config: &ResolvedConfig) -> Result<OracleSuiteReport> {
    let rule_for = |k: usize| {
        if k.is_multiple_of(2) {
            AcceptanceRule::MetropolisHastings
        } else {
            AcceptanceRule::Barker
        }
    };

    let mut tv_stream = RandomStream::new(config.seed, 1);
    let mut tv_violations = 0usize;
    let mut worst_margin = f64::INFINITY;
    for k in 0..config.chains {
        let chain: FiniteChain<f64> =
            random_reversible_chain(&mut tv_stream, 12, &rule_for(k));
        match chain.finite_tv_theorem_check(config.horizon) {
            Ok(report) => worst_margin = worst_margin.min(report.worst_margin),
            Err(_) => tv_violations += 1,
        }
    }

    let conductance_chains = 200usize;
    let mut cond_stream = RandomStream::new(config.seed, 2);
    let mut conductance_violations = 0usize;
    for k in 0..conductance_chains {
        let chain: FiniteChain<f64> =
            random_reversible_chain(&mut cond_stream, 12, &rule_for(k));
        let gap = chain.spectral_gap()?.gap;
        let k_p = chain.conductance()?.value;
        let singleton = (0..chain.states())
            .map(|i| chain.off_acceptance(i) / (1.0 - chain.stationary()[i]))
            .fold(f64::INFINITY, f64::min);
        if gap > k_p + 1e-10 || k_p > singleton + 1e-10 {
            conductance_violations += 1;
        }
    }

    let equiv_chains = 20usize;
    let mut equiv_stream = RandomStream::new(config.seed, 3);
    let mut equiv_violations = 0usize;
    for k in 0..equiv_chains {
        let chain: FiniteChain<f64> =
            random_reversible_chain(&mut equiv_stream, 6, &rule_for(k));
        if chain.finite_equiv_illustration(20).is_err() {
            equiv_violations += 1;
        }
    }

    Ok(OracleSuiteReport {
        horizon: config.horizon,
        tv_chains: config.chains,
        tv_violations,
        worst_tv_margin: worst_margin,
        conductance_chains,
        conductance_violations,
        equiv_chains,
        equiv_violations,
        two_state_ok: two_state_example_ok(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{resolve, ExperimentConfig, ExperimentId, HRule};

    fn small_config(experiment: ExperimentId, seed: u64) -> ResolvedConfig {
        let mut cfg = ExperimentConfig::new(experiment, seed);
        cfg.replications = Some(2);
        cfg.mc_samples = Some(200);
        cfg.grid = Some(match experiment {
            ExperimentId::Zellner => vec![[2, 8], [4, 16]],
            _ => vec![[3, 30]],
        });
        resolve(&cfg).unwrap()
    }

    #[test]
    fn zellner_rows_have_consistent_fields() {
        let cfg = small_config(ExperimentId::Zellner, 11);
        let out = run_zellner(&cfg).unwrap();
        assert_eq!(out.rows.len(), 2 * 2 * 3);
        for row in &out.rows {
            assert!(row.accept_mean >= 0.0 && row.accept_mean <= 1.0);
            assert_eq!(row.rate_lb, 1.0 - row.accept_mean);
            assert_eq!(row.log_accept, row.accept_mean.ln());
            assert!(row.closed_form_ub >= 0.0 && row.closed_form_ub <= 1.0);
            assert!(row.asymptotic_ub.is_some());
            assert!(row.flag.is_empty());
            // The data-dependent bound holds with Monte Carlo slack.
            assert!(row.accept_mean <= row.closed_form_ub + 3.0 * row.accept_se);
        }
        // Summaries are recomputable from the rows.
        let recomputed = summarize(&out.rows);
        assert_eq!(recomputed, out.summary);
    }

    #[test]
    fn zellner_output_is_deterministic() {
        let cfg = small_config(ExperimentId::Zellner, 12);
        let a = run_zellner(&cfg).unwrap();
        let b = run_zellner(&cfg).unwrap();
        assert_eq!(a.rows_csv(), b.rows_csv());
        assert_eq!(a.summary_csv(), b.summary_csv());
    }

    #[test]
    fn flat_rows_track_the_concentration_bound() {
        let cfg = small_config(ExperimentId::FlatLogistic, 13);
        let out = run_flat_logistic(&cfg).unwrap();
        assert_eq!(out.rows.len(), 2 * 4);
        for row in &out.rows {
            assert!(!row.failed());
            assert!(row.lambda0_hat.unwrap() > 0.0);
            assert!(row.closed_form_ub >= 0.0 && row.closed_form_ub <= 1.0);
        }
    }

    #[test]
    fn examples_all_pass_at_modest_sample_size() {
        let mut cfg = ExperimentConfig::new(ExperimentId::Examples, 5);
        cfg.mc_samples = Some(4_000);
        let report = run_examples(&resolve(&cfg).unwrap()).unwrap();
        assert_eq!(report.checks.len(), 4);
        for check in &report.checks {
            assert!(check.pass, "{}: {} > {} + {}", check.name, check.lhs, check.rhs, check.slack);
        }
        assert!(report.all_pass());
        assert!(report.to_csv().contains("mixture_accept_ub"));
    }

    #[test]
    fn oracle_suite_is_clean_on_a_small_run() {
        let mut cfg = ExperimentConfig::new(ExperimentId::OracleSuite, 7);
        cfg.chains = Some(40);
        cfg.horizon = Some(15);
        let report = run_oracle_suite(&resolve(&cfg).unwrap()).unwrap();
        assert_eq!(report.violations(), 0);
        assert!(report.two_state_ok);
        assert!(report.worst_tv_margin >= -1e-10);
        // Deterministic report text.
        let again = run_oracle_suite(&resolve(&cfg).unwrap()).unwrap();
        assert_eq!(report.to_csv(), again.to_csv());
    }

    #[test]
    fn h_rule_labels_appear_in_csv() {
        let mut cfg = ExperimentConfig::new(ExperimentId::Zellner, 3);
        cfg.replications = Some(1);
        cfg.mc_samples = Some(50);
        cfg.grid = Some(vec![[2, 8]]);
        cfg.h_rules = Some(vec![HRule::Const { c: 0.6 }]);
        let out = run_zellner(&resolve(&cfg).unwrap()).unwrap();
        let csv = out.rows_csv();
        assert!(csv.starts_with(super::super::ROWS_CSV_HEADER));
        assert!(csv.contains("const(0.6)"));
        assert!(csv.contains("zellner,0,2,8,"));
    }
}
