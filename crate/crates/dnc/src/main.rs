//! `dnc` — divide-and-choose solvers and experiments from the command line.
//!
//! Exit codes: 0 success, 2 input error, 3 capacity error, 4 solver failure.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use dnc::error::{Error, Result};
use dnc::experiments::{
    crossover_experiment, deviation_role_experiment, diversification_experiment,
    DiversificationConfig, ExperimentConfig, PriorFamily, RoleStudyConfig,
};
use dnc::extensions::{solve_multiple_offers, RiskProfile};
use dnc::io::{crossover_csv, diversification_csv, role_csv, sweep_csv, InstanceFile, ReportFile};
use dnc::priors::{flatten_to_joint, Prior, DEFAULT_FLATTEN_CAP};
use dnc::solver_discrete::{solve_discrete, DEFAULT_TYPE_CAP};
use dnc::solver_normal::{solve_normal, sweep_p, NormalSolveConfig};

#[derive(Parser)]
#[command(
    name = "dnc",
    version,
    about = "Optimal divisions for the Bayesian divide-and-choose game"
)]
struct Cli {
    /// Worker threads for parallel sweeps and experiments
    /// (default: machine parallelism; env: DNC_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance file for an optimal or near-optimal division.
    Solve(SolveArgs),
    /// Emit the probability-capped utility landscape as CSV.
    Sweep(SweepArgs),
    /// Crossover welfare experiment: per-good utilities of both roles.
    Welfare(WelfareArgs),
    /// Which role is better, sample by sample, sorted by value deviation.
    Role(RoleArgs),
    /// Optimal offer menus for a finite-type instance.
    Offers(OffersArgs),
    /// Risk-neutral vs risk-averse diversification comparison.
    Risk(RiskArgs),
    /// Run the verification suite and print one line per criterion.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Auto,
    Normal,
    Discrete,
    Oracle,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance JSON file.
    #[arg(long)]
    instance: PathBuf,
    /// Additive error bound for the sweep solver (default 0.01 * sum |g|).
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, value_enum, default_value_t = Method::Auto)]
    method: Method,
    /// Grid spacing for the oracle method.
    #[arg(long, default_value_t = 0.01)]
    resolution: f64,
    /// Output path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Number of probability grid points on (0, 1/2].
    #[arg(long, default_value_t = 500)]
    steps: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Uniform01,
    Normal,
}

#[derive(Args)]
struct WelfareArgs {
    #[arg(long, value_enum)]
    prior: FamilyArg,
    /// Good counts, e.g. --n 2 --n 30.
    #[arg(long, required = true)]
    n: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    trials: u32,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    mean: f64,
    #[arg(long, default_value_t = 0.2)]
    stdev: f64,
    /// Inner solver tolerance as a fraction of sum |g|.
    #[arg(long, default_value_t = 0.01)]
    gamma_frac: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RoleArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 13)]
    n: usize,
    #[arg(long, default_value_t = 200)]
    samples: u32,
    /// Ensemble of opponent divisions the chooser utility averages over.
    #[arg(long, default_value_t = 500)]
    ensemble: u32,
    #[arg(long, default_value_t = 1.0)]
    mean: f64,
    #[arg(long, default_value_t = 0.2)]
    stdev: f64,
    #[arg(long, default_value_t = 0.01)]
    gamma_frac: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OffersArgs {
    /// Instance JSON file with a discrete prior.
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProfileArg {
    Neutral,
    Sqrt,
    Power,
}

#[derive(Args)]
struct RiskArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    trials: u32,
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    mean: f64,
    #[arg(long, default_value_t = 0.2)]
    stdev: f64,
    #[arg(long, default_value_t = 0.1)]
    resolution: f64,
    #[arg(long, value_enum, default_value_t = ProfileArg::Sqrt)]
    profile: ProfileArg,
    /// Shift for the sqrt profile: f(v) = sqrt(v - shift).
    #[arg(long, default_value_t = 0.0)]
    shift: f64,
    /// Exponent for the power profile: f(v) = v^exponent.
    #[arg(long, default_value_t = 0.5)]
    exponent: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Run a single criterion (1-13) instead of the whole suite.
    #[arg(long)]
    criterion: Option<usize>,
}

fn write_out(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn solve(args: &SolveArgs) -> Result<()> {
    let file = InstanceFile::read(&args.instance)?;
    let instance = file.to_instance()?;
    let sum_abs: f64 = instance.divider_values().iter().map(|v| v.abs()).sum();
    let gamma = args.gamma.unwrap_or(0.01 * sum_abs);
    if !(gamma > 0.0) {
        return Err(Error::input(format!("gamma must be positive, got {gamma}")));
    }

    // Conservative routing: exact methods whenever they are in budget.
    let method = match (args.method, instance.prior()) {
        (Method::Auto, Prior::Normal(_)) => Method::Normal,
        (Method::Auto, Prior::JointDiscrete(j)) => {
            if j.len() <= DEFAULT_TYPE_CAP {
                Method::Discrete
            } else {
                Method::Oracle
            }
        }
        (Method::Auto, Prior::DiscretePerGood(goods)) => match flatten_to_joint(goods, DEFAULT_FLATTEN_CAP) {
            Ok(j) if j.len() <= DEFAULT_TYPE_CAP => Method::Discrete,
            _ => Method::Oracle,
        },
        (Method::Auto, Prior::Uniform01 { .. }) => Method::Oracle,
        (m, _) => m,
    };

    let started = Instant::now();
    let report = match method {
        Method::Normal => {
            let config = NormalSolveConfig::with_gamma(gamma);
            solve_normal(&instance, &config)?
        }
        Method::Discrete => {
            let joint = match instance.prior() {
                Prior::JointDiscrete(j) => j.clone(),
                Prior::DiscretePerGood(goods) => flatten_to_joint(goods, DEFAULT_FLATTEN_CAP)?,
                _ => return Err(Error::input("the discrete method needs a discrete prior")),
            };
            solve_discrete(instance.divider_values(), &joint)?
        }
        Method::Oracle => dnc::oracle::grid_best_response(&instance, args.resolution)?,
        Method::Auto => unreachable!(),
    };
    let config = json!({
        "method": match method {
            Method::Normal => "normal",
            Method::Discrete => "discrete",
            Method::Oracle => "oracle",
            Method::Auto => unreachable!(),
        },
        "gamma": gamma,
        "resolution": args.resolution,
        "instance": args.instance,
    });
    let out = ReportFile::new(config, started.elapsed().as_secs_f64(), report);
    write_out(&args.out, &out.to_json()?)
}

fn sweep(args: &SweepArgs) -> Result<()> {
    let instance = InstanceFile::read(&args.instance)?.to_instance()?;
    let curve = sweep_p(&instance, args.steps)?;
    write_out(&args.out, &sweep_csv(&curve))
}

fn welfare(args: &WelfareArgs) -> Result<()> {
    let family = match args.prior {
        FamilyArg::Uniform01 => PriorFamily::Uniform01,
        FamilyArg::Normal => PriorFamily::Normal {
            mean: args.mean,
            stdev: args.stdev,
        },
    };
    let mut config = ExperimentConfig::new(args.seed, args.trials, args.n.clone(), family);
    config.gamma_frac = args.gamma_frac;
    let rows = crossover_experiment(&config)?;
    write_out(&args.out, &crossover_csv(&rows))
}

fn role(args: &RoleArgs) -> Result<()> {
    let config = RoleStudyConfig {
        seed: args.seed,
        n: args.n,
        samples: args.samples,
        ensemble: args.ensemble,
        mean: args.mean,
        stdev: args.stdev,
        gamma_frac: args.gamma_frac,
    };
    let rows = deviation_role_experiment(&config)?;
    write_out(&args.out, &role_csv(&rows))
}

fn offers(args: &OffersArgs) -> Result<()> {
    let instance = InstanceFile::read(&args.instance)?.to_instance()?;
    let joint = match instance.prior() {
        Prior::JointDiscrete(j) => j.clone(),
        Prior::DiscretePerGood(goods) => flatten_to_joint(goods, DEFAULT_FLATTEN_CAP)?,
        _ => {
            return Err(Error::input(
                "offer menus need a discrete prior (joint_discrete or discrete_per_good)",
            ))
        }
    };
    let started = Instant::now();
    let (menu, report) = solve_multiple_offers(instance.divider_values(), &joint)?;
    let single = solve_discrete(instance.divider_values(), &joint)?;
    let out = json!({
        "tool_version": env!("CARGO_PKG_VERSION"),
        "wall_time_s": started.elapsed().as_secs_f64(),
        "menu": {
            "base_p": menu.base.p(),
            "alternatives": menu.alternatives,
        },
        "divider_utility": report.divider_utility,
        "chooser_utility": report.chooser_utility,
        "single_division_utility": single.divider_utility,
        "baseline_divider": report.baseline_divider,
    });
    write_out(
        &args.out,
        &format!("{}\n", serde_json::to_string_pretty(&out)?),
    )
}

fn risk(args: &RiskArgs) -> Result<()> {
    let profile = match args.profile {
        ProfileArg::Neutral => RiskProfile::Neutral,
        ProfileArg::Sqrt => RiskProfile::SqrtShifted { shift: args.shift },
        ProfileArg::Power => RiskProfile::Power {
            exponent: args.exponent,
        },
    };
    let config = DiversificationConfig {
        seed: args.seed,
        trials: args.trials,
        n: args.n,
        mean: args.mean,
        stdev: args.stdev,
        resolution: args.resolution,
        profile,
    };
    let rows = diversification_experiment(&config)?;
    write_out(&args.out, &diversification_csv(&rows))
}

fn verify(args: &VerifyArgs) -> Result<()> {
    let results = match args.criterion {
        Some(id) => vec![dnc::acceptance::run(id)
            .ok_or_else(|| Error::input(format!("no criterion {id} (valid: 1-13)")))?],
        None => dnc::acceptance::run_all(),
    };
    let mut all_passed = true;
    for r in &results {
        println!("{}", r.line());
        all_passed &= r.passed;
    }
    if !all_passed {
        return Err(Error::solver("verification suite has failures"));
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let threads = cli.threads.or_else(|| {
        std::env::var("DNC_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(k) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Error::input(format!("cannot configure {k} threads: {e}")))?;
    }
    match &cli.command {
        Command::Solve(args) => solve(args),
        Command::Sweep(args) => sweep(args),
        Command::Welfare(args) => welfare(args),
        Command::Role(args) => role(args),
        Command::Offers(args) => offers(args),
        Command::Risk(args) => risk(args),
        Command::Verify(args) => verify(args),
    }
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(err.exit_code());
        }
    }
}
