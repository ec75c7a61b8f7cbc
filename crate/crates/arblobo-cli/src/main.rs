//! Command-line front end: acceptance estimation, bound curves, the scaling
//! experiments, and the verification suites.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 when a verification suite
//! reports a violation. `ARBLOBO_THREADS` caps the worker pool.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use arblobo::bounds::{
    norm_equivalence_constant, tv_lower_curve, wasserstein_constant, wasserstein_lower_curve,
    BoundCurve, NormTag,
};
use arblobo::experiments::{
    generate_logistic_data, load_config, resolve, run_examples, run_flat_logistic,
    run_oracle_suite, run_zellner, ExperimentConfig, ExperimentId, YMechanism,
};
use arblobo::kernels::{AcceptanceRule, ArbKernel};
use arblobo::numerics::{DenseMatrix, RandomStream};
use arblobo::proposals::{
    make_crank_nicolson, make_mala, make_rw_gaussian, make_student_t_proposal, ProposalFamily,
};
use arblobo::targets::{
    make_gaussian, make_gaussian_mixture_2d, make_subexponential_2d, TargetDensity,
};

#[derive(Parser)]
#[command(
    name = "arblobo",
    version,
    about = "Convergence-rate lower bounds for accept-reject-based Markov chains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo estimate of the acceptance probability A(θ).
    EstimateAccept(EstimateArgs),
    /// Evaluate a convergence-rate lower-bound curve as CSV.
    BoundCurve(BoundArgs),
    /// Run a configured experiment (zellner, flat-logistic, oracle-suite,
    /// examples) and write CSV outputs.
    Experiment(ExperimentArgs),
    /// Run the finite-chain verification suite.
    Oracle(OracleArgs),
    /// Check the worked-example inequalities.
    Examples(ExamplesArgs),
    /// Generate synthetic logistic-regression data as CSV.
    GenerateData(GenerateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TargetKind {
    /// N(0, σ² I_d)
    Gaussian,
    /// 2-D Gaussian mixture with spread b
    Mixture,
    /// 2-D sub-exponential density
    Subexp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ProposalKindArg {
    /// Random walk N(θ, h I)
    Rw,
    /// Crank-Nicolson N(√(1-h)θ, h I)
    Cn,
    /// Langevin mean map N(θ + h∇log π/2, h I)
    Mala,
    /// Multivariate t with dof ν
    StudentT,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum RuleArg {
    Mh,
    Barker,
    Portkey,
    /// Non-reversible Crank-Nicolson rule (Gaussian target, CN proposal)
    NonReversibleCn,
}

#[derive(Args)]
struct EstimateArgs {
    /// Target density family.
    #[arg(long, value_enum, default_value_t = TargetKind::Gaussian)]
    target: TargetKind,
    /// Gaussian target variance σ².
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    /// Mixture spread b (> 1).
    #[arg(long, default_value_t = 2.0)]
    b: f64,
    /// Proposal family.
    #[arg(long, value_enum, default_value_t = ProposalKindArg::Rw)]
    proposal: ProposalKindArg,
    /// Proposal scale h.
    #[arg(long)]
    h: f64,
    /// Student-t degrees of freedom ν.
    #[arg(long, default_value_t = 5.0)]
    nu: f64,
    /// Acceptance rule.
    #[arg(long, value_enum, default_value_t = RuleArg::Mh)]
    rule: RuleArg,
    /// Portkey slack δ ≥ 0.
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Evaluation point, comma-separated (e.g. "0" or "0.5,-1").
    #[arg(long)]
    at: String,
    /// Monte Carlo sample count.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Random seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random stream id.
    #[arg(long, default_value_t = 0)]
    stream_id: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Tv,
    Wasserstein,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum NormArg {
    L1,
    L2,
    Linf,
}

#[derive(Args)]
struct BoundArgs {
    /// Distance the bound is stated in.
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Acceptance probability A ∈ [0, 1] (an upper bound on inf A).
    #[arg(long)]
    accept: f64,
    /// Iterations to evaluate (t = 1..=horizon).
    #[arg(long)]
    horizon: usize,
    /// State dimension (wasserstein).
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Target density supremum s (wasserstein).
    #[arg(long, default_value_t = 1.0)]
    sup_density: f64,
    /// Norm in the cost condition c ≥ C₀‖·‖₁ (wasserstein).
    #[arg(long, value_enum, default_value_t = NormArg::L1)]
    c0_norm: NormArg,
    /// Explicit leading constant; overrides dim/sup-density (wasserstein).
    #[arg(long)]
    constant: Option<f64>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Override the config's replication count.
    #[arg(long)]
    replications: Option<usize>,
    /// Override the config's Monte Carlo sample count.
    #[arg(long)]
    mc_samples: Option<usize>,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for CSV and resolved-config files.
    #[arg(long, default_value = ".")]
    output: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    /// Number of random chains for the TV lower-bound check.
    #[arg(long, default_value_t = 500)]
    chains: usize,
    /// Iteration horizon of the TV checks.
    #[arg(long, default_value_t = 30)]
    horizon: usize,
    /// Random seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ExamplesArgs {
    /// Monte Carlo sample count per check.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Random seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MechanismArg {
    Logistic,
    FairCoin,
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of observations (must exceed the dimension).
    #[arg(long)]
    n: usize,
    /// Covariate dimension.
    #[arg(long)]
    d: usize,
    /// Random seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random stream id.
    #[arg(long, default_value_t = 0)]
    stream_id: u64,
    /// Response mechanism.
    #[arg(long, value_enum, default_value_t = MechanismArg::Logistic)]
    mechanism: MechanismArg,
    /// True coefficients, comma-separated (logistic mechanism).
    #[arg(long)]
    beta_true: Option<String>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match worker_cap()? {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .context("building worker pool")?;
            pool.install(|| dispatch(cli))
        }
        None => dispatch(cli),
    }
}

fn worker_cap() -> Result<Option<usize>> {
    match std::env::var("ARBLOBO_THREADS") {
        Ok(raw) => {
            let threads: usize = raw
                .parse()
                .map_err(|_| anyhow!("ARBLOBO_THREADS must be a positive integer, got {raw:?}"))?;
            if threads == 0 {
                bail!("ARBLOBO_THREADS must be at least 1");
            }
            Ok(Some(threads))
        }
        Err(_) => Ok(None),
    }
}

fn dispatch(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::EstimateAccept(args) => estimate_accept(args),
        Command::BoundCurve(args) => bound_curve(args),
        Command::Experiment(args) => experiment(args),
        Command::Oracle(args) => oracle(args),
        Command::Examples(args) => examples(args),
        Command::GenerateData(args) => generate_data(args),
    }
}

fn parse_point(raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| anyhow!("invalid coordinate {s:?}")))
        .collect()
}

fn build_target(args: &EstimateArgs, dim: usize) -> Result<TargetDensity<f64>> {
    Ok(match args.target {
        TargetKind::Gaussian => make_gaussian(args.sigma2, dim)?,
        TargetKind::Mixture => {
            if dim != 2 {
                bail!("the mixture target is 2-D; --at must have 2 coordinates");
            }
            make_gaussian_mixture_2d(args.b)?
        }
        TargetKind::Subexp => {
            if dim != 2 {
                bail!("the sub-exponential target is 2-D; --at must have 2 coordinates");
            }
            make_subexponential_2d()
        }
    })
}

fn build_proposal(
    args: &EstimateArgs,
    target: &TargetDensity<f64>,
    dim: usize,
) -> Result<ProposalFamily<f64>> {
    Ok(match args.proposal {
        ProposalKindArg::Rw => make_rw_gaussian(args.h, &DenseMatrix::identity(dim))?,
        ProposalKindArg::Cn => make_crank_nicolson(args.h, dim)?,
        ProposalKindArg::Mala => make_mala(target, args.h)?,
        ProposalKindArg::StudentT => make_student_t_proposal(
            args.nu,
            |from: &[f64]| from.to_vec(),
            args.h,
            &DenseMatrix::identity(dim),
        )?,
    })
}

fn estimate_accept(args: EstimateArgs) -> Result<u8> {
    let at = parse_point(&args.at)?;
    let dim = at.len();
    let target = build_target(&args, dim)?;
    let proposal = build_proposal(&args, &target, dim)?;
    let rule = match args.rule {
        RuleArg::Mh => AcceptanceRule::MetropolisHastings,
        RuleArg::Barker => AcceptanceRule::Barker,
        RuleArg::Portkey => AcceptanceRule::PortkeyBarker { delta: args.delta },
        RuleArg::NonReversibleCn => {
            AcceptanceRule::NonReversibleCrankNicolson { sigma2: args.sigma2 }
        }
    };
    let kernel = ArbKernel::new(target, proposal, rule)?;
    let mut stream = RandomStream::new(args.seed, args.stream_id);
    let est = kernel.mc_acceptance(&at, args.n, &mut stream)?;
    println!("accept_mean,accept_se,samples");
    println!("{},{},{}", est.mean, est.std_err, est.samples);
    Ok(0)
}

fn print_curve(curve: &BoundCurve<f64>) {
    println!("t,value");
    for (idx, value) in curve.values.iter().enumerate() {
        println!("{},{}", idx + 1, value);
    }
}

fn bound_curve(args: BoundArgs) -> Result<u8> {
    let curve = match args.kind {
        KindArg::Tv => tv_lower_curve(args.accept, args.horizon)?,
        KindArg::Wasserstein => {
            let constant = match args.constant {
                Some(c) => c,
                None => {
                    let norm = match args.c0_norm {
                        NormArg::L1 => NormTag::L1,
                        NormArg::L2 => NormTag::L2,
                        NormArg::Linf => NormTag::LInf,
                    };
                    let c0 = norm_equivalence_constant(norm, args.dim)?;
                    wasserstein_constant(c0, args.dim, args.sup_density)?
                }
            };
            wasserstein_lower_curve(args.accept, args.horizon, args.dim, constant)?
        }
    };
    if let Some(constant) = curve.constant {
        println!("# constant,{constant}");
    }
    print_curve(&curve);
    Ok(0)
}

fn experiment(args: ExperimentArgs) -> Result<u8> {
    let mut config: ExperimentConfig =
        load_config(&args.config).with_context(|| format!("loading {:?}", args.config))?;
    if let Some(r) = args.replications {
        config.replications = Some(r);
    }
    if let Some(n) = args.mc_samples {
        config.mc_samples = Some(n);
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    let resolved = resolve(&config)?;
    std::fs::create_dir_all(&args.output)
        .with_context(|| format!("creating {:?}", args.output))?;
    let prefix = resolved.experiment.to_string();
    let path = |name: &str| args.output.join(format!("{prefix}_{name}"));

    match resolved.experiment {
        ExperimentId::Zellner | ExperimentId::FlatLogistic => {
            let output = match resolved.experiment {
                ExperimentId::Zellner => run_zellner(&resolved)?,
                _ => run_flat_logistic(&resolved)?,
            };
            std::fs::write(path("rows.csv"), output.rows_csv())?;
            std::fs::write(path("summary.csv"), output.summary_csv())?;
            std::fs::write(path("config.json"), output.resolved_config_json())?;
            println!(
                "wrote {} rows and {} summaries under {}",
                output.rows.len(),
                output.summary.len(),
                args.output.display()
            );
            Ok(0)
        }
        ExperimentId::OracleSuite => {
            let report = run_oracle_suite(&resolved)?;
            std::fs::write(path("report.csv"), report.to_csv())?;
            print!("{}", report.to_csv());
            Ok(if report.violations() == 0 { 0 } else { 2 })
        }
        ExperimentId::Examples => {
            let report = run_examples(&resolved)?;
            std::fs::write(path("report.csv"), report.to_csv())?;
            print!("{}", report.to_csv());
            Ok(if report.all_pass() { 0 } else { 2 })
        }
    }
}

fn oracle(args: OracleArgs) -> Result<u8> {
    let mut config = ExperimentConfig::new(ExperimentId::OracleSuite, args.seed);
    config.chains = Some(args.chains);
    config.horizon = Some(args.horizon);
    let report = run_oracle_suite(&resolve(&config)?)?;
    print!("{}", report.to_csv());
    Ok(if report.violations() == 0 { 0 } else { 2 })
}

fn examples(args: ExamplesArgs) -> Result<u8> {
    let mut config = ExperimentConfig::new(ExperimentId::Examples, args.seed);
    config.mc_samples = Some(args.samples);
    let report = run_examples(&resolve(&config)?)?;
    print!("{}", report.to_csv());
    Ok(if report.all_pass() { 0 } else { 2 })
}

fn generate_data(args: GenerateArgs) -> Result<u8> {
    let mechanism = match args.mechanism {
        MechanismArg::Logistic => YMechanism::Logistic,
        MechanismArg::FairCoin => YMechanism::FairCoin,
    };
    let beta = args.beta_true.as_deref().map(parse_point).transpose()?;
    let mut stream = RandomStream::new(args.seed, args.stream_id);
    let data = generate_logistic_data(&mut stream, args.n, args.d, mechanism, beta.as_deref())?;
    let mut csv = (1..=args.d).map(|j| format!("x{j}")).collect::<Vec<_>>().join(",");
    csv.push_str(",y\n");
    for i in 0..data.n() {
        let row = data.design().row(i).iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        csv.push_str(&format!("{row},{}\n", data.labels()[i]));
    }
    match args.output {
        Some(path) => std::fs::write(&path, csv).with_context(|| format!("writing {path:?}"))?,
        None => print!("{csv}"),
    }
    Ok(0)
}
