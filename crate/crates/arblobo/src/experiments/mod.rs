//! Experiment drivers: the Zellner-prior and flat-prior logistic regression
//! scaling studies, the worked-example inequality checks, and the finite-
//! chain verification suite, with CSV output.
//!
//! Replications are independent jobs over disjoint random streams keyed by
//! `(grid point, replication, slot)`, so serial and parallel schedules
//! produce byte-identical output for a fixed seed.

mod data;
mod runs;

pub use data::generate_logistic_data;
pub use runs::{
    run_examples, run_flat_logistic, run_oracle_suite, run_zellner, ExampleCheck, ExamplesReport,
    OracleSuiteReport,
};

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::BoundsError;
use crate::kernels::KernelError;
use crate::numerics::NumericsError;
use crate::oracle::OracleError;
use crate::proposals::ProposalError;
use crate::targets::TargetError;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Target(#[from] TargetError),

    #[error(transparent)]
    Proposal(#[from] ProposalError),

    #[error(transparent)]
    Kernel(#[from] KernelError),

    #[error(transparent)]
    Bounds(#[from] BoundsError),

    #[error(transparent)]
    Oracle(#[from] OracleError),

    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

/// Which experiment a config drives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    Zellner,
    FlatLogistic,
    OracleSuite,
    Examples,
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ExperimentId::Zellner => "zellner",
            ExperimentId::FlatLogistic => "flat-logistic",
            ExperimentId::OracleSuite => "oracle-suite",
            ExperimentId::Examples => "examples",
        };
        f.write_str(name)
    }
}

/// Named proposal-scaling rules: `const(c) = c`, `opt_scale(c) = c/d`,
/// `inv_dn(c) = c/(dn)`, `inv_n(c) = c/n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum HRule {
    Const { c: f64 },
    OptScale { c: f64 },
    InvDn { c: f64 },
    InvN { c: f64 },
}

impl HRule {
    pub fn evaluate(&self, d: usize, n: usize) -> f64 {
        match self {
            HRule::Const { c } => *c,
            HRule::OptScale { c } => c / d as f64,
            HRule::InvDn { c } => c / (d as f64 * n as f64),
            HRule::InvN { c } => c / n as f64,
        }
    }

    fn coefficient(&self) -> f64 {
        match self {
            HRule::Const { c } | HRule::OptScale { c } | HRule::InvDn { c } | HRule::InvN { c } => {
                *c
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let c = self.coefficient();
        if !(c > 0.0) || !c.is_finite() {
            return Err(ExperimentError::Config(format!(
                "h-rule coefficient must be positive, got {c}"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for HRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HRule::Const { c } => write!(f, "const({c})"),
            HRule::OptScale { c } => write!(f, "opt_scale({c})"),
            HRule::InvDn { c } => write!(f, "inv_dn({c})"),
            HRule::InvN { c } => write!(f, "inv_n({c})"),
        }
    }
}

/// How binary responses are generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum YMechanism {
    /// `Y_i ~ Bernoulli(sigmoid(β_trueᵀ X_i))`; the default `β_true` is
    /// `(1, …, 1)/√d` so signal strength is dimension-stable.
    Logistic,
    FairCoin,
}

/// User-facing experiment config; unset fields take per-experiment defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replications: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_rules: Option<Vec<HRule>>,
    /// `(d, n)` grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mechanism: Option<YMechanism>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_true: Option<Vec<f64>>,
    /// Number of random chains in the oracle suite.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chains: Option<usize>,
    /// Iteration horizon of the oracle suite's TV checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentId, seed: u64) -> Self {
        Self {
            experiment,
            seed,
            replications: None,
            mc_samples: None,
            g: None,
            h_rules: None,
            grid: None,
            mechanism: None,
            beta_true: None,
            chains: None,
            horizon: None,
        }
    }
}

/// The default `(d, n)` grid of the Zellner study.
pub const ZELLNER_GRID: [(usize, usize); 7] =
    [(2, 8), (4, 16), (4, 24), (8, 32), (10, 40), (12, 48), (14, 56)];

/// The default `(d, n)` grid of the flat-prior study.
pub const FLAT_GRID: [(usize, usize); 4] = [(10, 100), (10, 200), (10, 300), (10, 400)];

fn default_h_rules(experiment: ExperimentId) -> Vec<HRule> {
    match experiment {
        // Optimal scaling 2.38²/d, a fixed value, and the concentration-aware
        // 1/(dn).
        ExperimentId::Zellner => vec![
            HRule::OptScale { c: 5.6644 },
            HRule::Const { c: 0.6 },
            HRule::InvDn { c: 1.0 },
        ],
        ExperimentId::FlatLogistic => vec![
            HRule::InvN { c: 5.0 },
            HRule::InvN { c: 1.0 },
            HRule::InvN { c: 0.1 },
            HRule::Const { c: 0.1 },
        ],
        _ => Vec::new(),
    }
}

/// Fully-resolved config with every default applied.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub experiment: ExperimentId,
    pub seed: u64,
    pub replications: usize,
    pub mc_samples: usize,
    pub g: f64,
    pub h_rules: Vec<HRule>,
    pub grid: Vec<(usize, usize)>,
    pub mechanism: YMechanism,
    pub beta_true: Option<Vec<f64>>,
    pub chains: usize,
    pub horizon: usize,
}

impl ResolvedConfig {
    /// View as a user config whose every field is explicit; re-loading and
    /// re-resolving it reproduces this config exactly.
    pub fn as_config(&self) -> ExperimentConfig {
        ExperimentConfig {
            experiment: self.experiment,
            seed: self.seed,
            replications: Some(self.replications),
            mc_samples: Some(self.mc_samples),
            g: Some(self.g),
            h_rules: Some(self.h_rules.clone()),
            grid: Some(self.grid.iter().map(|&(d, n)| [d, n]).collect()),
            mechanism: Some(self.mechanism),
            beta_true: self.beta_true.clone(),
            chains: Some(self.chains),
            horizon: Some(self.horizon),
        }
    }
}

/// Applies per-experiment defaults and validates every field.
pub fn resolve(config: &ExperimentConfig) -> Result<ResolvedConfig> {
    let experiment = config.experiment;
    let replications = config.replications.unwrap_or(10);
    let default_samples = match experiment {
        ExperimentId::Examples => 10_000,
        _ => 1_000,
    };
    let mc_samples = config.mc_samples.unwrap_or(default_samples);
    let g = config.g.unwrap_or(10.0);
    let h_rules = config.h_rules.clone().unwrap_or_else(|| default_h_rules(experiment));
    let grid: Vec<(usize, usize)> = config
        .grid
        .clone()
        .map(|g| g.into_iter().map(|[d, n]| (d, n)).collect())
        .unwrap_or_else(|| match experiment {
            ExperimentId::Zellner => ZELLNER_GRID.to_vec(),
            ExperimentId::FlatLogistic => FLAT_GRID.to_vec(),
            _ => Vec::new(),
        });
    let mechanism = config.mechanism.unwrap_or(YMechanism::Logistic);
    let chains = config.chains.unwrap_or(500);
    let horizon = config.horizon.unwrap_or(30);

    if replications == 0 {
        return Err(ExperimentError::Config("replications must be at least 1".to_string()));
    }
    // The stream-id scheme reserves 1000 slots per replication.
    if replications > 1000 {
        return Err(ExperimentError::Config("replications must be at most 1000".to_string()));
    }
    if mc_samples < 2 {
        return Err(ExperimentError::Config("mc_samples must be at least 2".to_string()));
    }
    if !(g > 0.0) || !g.is_finite() {
        return Err(ExperimentError::Config(format!("g must be positive, got {g}")));
    }
    if chains == 0 || horizon == 0 {
        return Err(ExperimentError::Config("chains and horizon must be at least 1".to_string()));
    }
    for rule in &h_rules {
        rule.validate()?;
    }
    let needs_grid =
        matches!(experiment, ExperimentId::Zellner | ExperimentId::FlatLogistic);
    if needs_grid {
        if grid.is_empty() {
            return Err(ExperimentError::Config("grid must not be empty".to_string()));
        }
        if h_rules.is_empty() {
            return Err(ExperimentError::Config("h_rules must not be empty".to_string()));
        }
        for &(d, n) in &grid {
            if d == 0 || n <= d {
                return Err(ExperimentError::Config(format!(
                    "grid entries need n > d ≥ 1, got (d = {d}, n = {n})"
                )));
            }
            for rule in &h_rules {
                let h = rule.evaluate(d, n);
                if !(h > 0.0) || !h.is_finite() {
                    return Err(ExperimentError::Config(format!(
                        "h-rule {rule} evaluates to {h} at (d = {d}, n = {n})"
                    )));
                }
            }
        }
        if let Some(beta) = &config.beta_true {
            if grid.iter().any(|&(d, _)| d != beta.len()) {
                return Err(ExperimentError::Config(
                    "beta_true length must match every grid dimension".to_string(),
                ));
            }
        }
    }
    Ok(ResolvedConfig {
        experiment,
        seed: config.seed,
        replications,
        mc_samples,
        g,
        h_rules,
        grid,
        mechanism,
        beta_true: config.beta_true.clone(),
        chains,
        horizon,
    })
}

/// Reads and parses a JSON config file; unknown keys are errors.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// One estimated grid cell of a scaling study.
///
/// The CSV row carries the pinned columns; the optimizer iteration count,
/// wall time, the asymptotic Zellner bound, and the empirical `λ₀` are
/// in-memory diagnostics (wall time would break byte-determinism if
/// serialized).
#[derive(Clone, Debug)]
pub struct ExperimentRow {
    pub experiment: ExperimentId,
    pub replication: usize,
    pub d: usize,
    pub n: usize,
    pub h_rule: String,
    pub h: f64,
    pub accept_mean: f64,
    pub accept_se: f64,
    pub log_accept: f64,
    pub rate_lb: f64,
    pub closed_form_ub: f64,
    pub flag: String,
    pub asymptotic_ub: Option<f64>,
    pub lambda0_hat: Option<f64>,
    pub optimizer_iterations: usize,
    pub wall_time: std::time::Duration,
}

impl ExperimentRow {
    pub fn failed(&self) -> bool {
        self.flag.starts_with("optimizer_failed")
    }
}

/// Mean ± sd summary per `(grid point, h-rule)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub experiment: ExperimentId,
    pub d: usize,
    pub n: usize,
    pub h_rule: String,
    pub mean_rate_lb: f64,
    pub sd_rate_lb: f64,
    pub mean_log_accept: f64,
    pub sd_log_accept: f64,
}

pub const ROWS_CSV_HEADER: &str =
    "experiment,replication,d,n,h_rule,h,accept_mean,accept_se,log_accept,rate_lb,closed_form_ub,flag";

pub const SUMMARY_CSV_HEADER: &str =
    "experiment,d,n,h_rule,mean_rate_lb,sd_rate_lb,mean_log_accept,sd_log_accept";

/// Rows plus summaries of one scaling study.
#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub config: ResolvedConfig,
    pub rows: Vec<ExperimentRow>,
    pub summary: Vec<SummaryRow>,
}

impl ExperimentOutput {
    pub fn rows_csv(&self) -> String {
        let mut out = String::from(ROWS_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.experiment,
                r.replication,
                r.d,
                r.n,
                r.h_rule,
                r.h,
                r.accept_mean,
                r.accept_se,
                r.log_accept,
                r.rate_lb,
                r.closed_form_ub,
                r.flag
            ));
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from(SUMMARY_CSV_HEADER);
        out.push('\n');
        for s in &self.summary {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                s.experiment,
                s.d,
                s.n,
                s.h_rule,
                s.mean_rate_lb,
                s.sd_rate_lb,
                s.mean_log_accept,
                s.sd_log_accept
            ));
        }
        out
    }

    pub fn resolved_config_json(&self) -> String {
        serde_json::to_string_pretty(&self.config.as_config()).expect("config serializes")
    }
}

/// Per-(grid point, h-rule) means and sample standard deviations over
/// replications, in first-appearance order; optimizer-failure rows are
/// excluded.
pub fn summarize(rows: &[ExperimentRow]) -> Vec<SummaryRow> {
    let mut order: Vec<(usize, usize, String)> = Vec::new();
    for r in rows {
        let key = (r.d, r.n, r.h_rule.clone());
        if !order.contains(&key) {
            order.push(key);
        }
    }
    let mut out = Vec::with_capacity(order.len());
    for (d, n, h_rule) in order {
        let group: Vec<&ExperimentRow> = rows
            .iter()
            .filter(|r| r.d == d && r.n == n && r.h_rule == h_rule && !r.failed())
            .collect();
        if group.is_empty() {
            continue;
        }
        let count = group.len() as f64;
        let mean = |f: &dyn Fn(&ExperimentRow) -> f64| -> f64 {
            group.iter().map(|r| f(r)).sum::<f64>() / count
        };
        let sd = |f: &dyn Fn(&ExperimentRow) -> f64, m: f64| -> f64 {
            if group.len() < 2 {
                0.0
            } else {
                (group.iter().map(|r| (f(r) - m).powi(2)).sum::<f64>() / (count - 1.0)).sqrt()
            }
        };
        let rate = |r: &ExperimentRow| r.rate_lb;
        let log_a = |r: &ExperimentRow| r.log_accept;
        let mean_rate = mean(&rate);
        let mean_log = mean(&log_a);
        out.push(SummaryRow {
            experiment: group[0].experiment,
            d,
            n,
            h_rule,
            mean_rate_lb: mean_rate,
            sd_rate_lb: sd(&rate, mean_rate),
            mean_log_accept: mean_log,
            sd_log_accept: sd(&log_a, mean_log),
        });
    }
    out
}
