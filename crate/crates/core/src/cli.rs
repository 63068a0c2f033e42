//! Command-line entry point. Every subcommand reads a JSON config and
//! writes CSV and JSON results into the output directory.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{ApproxSection, Command, ExperimentConfig, SelfSimSection};
use crate::environments::{optimal_price, DemandModel, GroundTruth};
use crate::error::{Error, Result};
use crate::harness::output::{write_json, write_rounds_csv, write_rows};
use crate::harness::{
    beta_coverage, monte_carlo, rate_fit, Aggregate, CoverageReport, Diagnostics, ExperimentSpec,
    RateFit,
};
use crate::numerics::{check_poly_approx, verify_selfsim, Interval, SelfSimReport};
use crate::policies::holder_degree;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_ABORT: i32 = 2;

const DEFAULT_SELFSIM_M1: f64 = 2.0;
const DEFAULT_SELFSIM_M2: f64 = 1.0;
/// Shortest subinterval the approximation sweep draws.
const MIN_APPROX_WIDTH: f64 = 1e-3;

#[derive(Debug, Parser)]
#[command(
    name = "smoothprice",
    version,
    about = "Smoothness-adaptive dynamic pricing experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Monte Carlo episodes of one policy at one horizon.
    Simulate(RunArgs),
    /// Coverage of the smoothness estimate.
    Beta(RunArgs),
    /// Self-similarity report of a model over dyadic scales.
    Selfsim(RunArgs),
    /// Regret across horizons and its log-log slope.
    Rates(RunArgs),
    /// Polynomial approximation bound on random subintervals.
    ApproxCheck(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads for replications; results do not depend on it.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Overrides `base_seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
}

/// Exit status for an error: 2 when an episode or invariant broke, 1 for
/// everything the caller could fix in the input.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Abort(_) | Error::Consistency(_) | Error::Numerical(_) => EXIT_ABORT,
        _ => EXIT_INVALID,
    }
}

pub fn run_cli(argv: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(sub: Sub) -> Result<()> {
    let (command, args) = match sub {
        Sub::Simulate(a) => (Command::Simulate, a),
        Sub::Beta(a) => (Command::Beta, a),
        Sub::Selfsim(a) => (Command::Selfsim, a),
        Sub::Rates(a) => (Command::Rates, a),
        Sub::ApproxCheck(a) => (Command::ApproxCheck, a),
    };
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.base_seed = seed;
    }
    cfg.validate(command)?;
    let out_dir = args
        .out_dir
        .clone()
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir)?;
    let (model, model_echo) = cfg.model.build()?;
    let mut echo = cfg.clone();
    echo.model = model_echo;
    echo.out_dir = None;
    let ctx = Context {
        command,
        config: echo,
        model,
        out_dir,
        workers: args.workers.max(1),
    };
    match command {
        Command::Simulate => simulate(&ctx),
        Command::Beta => beta(&ctx),
        Command::Selfsim => selfsim(&ctx),
        Command::Rates => rates(&ctx),
        Command::ApproxCheck => approx_check(&ctx),
    }
}

struct Context {
    command: Command,
    config: ExperimentConfig,
    model: DemandModel,
    out_dir: PathBuf,
    workers: usize,
}

impl Context {
    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn truth(&self) -> Result<GroundTruth> {
        optimal_price(&self.model, self.config.grids.truth)
    }

    fn write_summary<T: Serialize>(&self, results: T) -> Result<()> {
        #[derive(Serialize)]
        struct Summary<'a, T> {
            command: Command,
            config: &'a ExperimentConfig,
            results: T,
        }
        write_json(
            &self.path("summary.json"),
            &Summary {
                command: self.command,
                config: &self.config,
                results,
            },
        )
    }
}

#[derive(Serialize)]
struct RepSummary {
    rep: usize,
    seed: u64,
    final_regret: f64,
    beta_hat: Option<f64>,
    diagnostics: Diagnostics,
}

#[derive(Serialize)]
struct SimulateResults {
    p_star: f64,
    r_star: f64,
    horizon: u64,
    reps: usize,
    mean_final: f64,
    stderr_final: f64,
    replications: Vec<RepSummary>,
}

fn run_monte_carlo(
    ctx: &Context,
    truth: &GroundTruth,
    horizon: u64,
) -> Result<(Vec<crate::harness::RunRecord>, Aggregate)> {
    let spec = ExperimentSpec {
        policy: ctx.config.policy.clone().expect("validated"),
        model: ctx.model.clone(),
        noise: ctx.config.noise,
        truth: *truth,
        horizon,
    };
    let out = monte_carlo(&spec, ctx.config.reps, ctx.config.base_seed, ctx.workers)?;
    Ok((out.records, out.aggregate))
}

fn simulate(ctx: &Context) -> Result<()> {
    let truth = ctx.truth()?;
    let horizon = ctx.config.horizons[0];
    let (records, agg) = run_monte_carlo(ctx, &truth, horizon)?;
    write_rounds_csv(&ctx.path("rounds.csv"), &records)?;
    let replications = records
        .iter()
        .enumerate()
        .map(|(rep, r)| RepSummary {
            rep,
            seed: r.seed,
            final_regret: r.final_regret(),
            beta_hat: r.beta_hat,
            diagnostics: r.diagnostics.clone(),
        })
        .collect();
    ctx.write_summary(SimulateResults {
        p_star: truth.p_star,
        r_star: truth.r_star,
        horizon,
        reps: agg.reps,
        mean_final: agg.mean_final,
        stderr_final: agg.stderr_final,
        replications,
    })
}

#[derive(Serialize)]
struct RateRow {
    horizon: u64,
    reps: usize,
    mean_final: f64,
    stderr_final: f64,
}

#[derive(Serialize)]
struct RatesResults {
    p_star: f64,
    r_star: f64,
    points: Vec<RateRow>,
    #[serde(flatten)]
    fit: RateFit,
}

fn rates(ctx: &Context) -> Result<()> {
    let truth = ctx.truth()?;
    let mut rows = Vec::new();
    for &horizon in &ctx.config.horizons {
        let (_, agg) = run_monte_carlo(ctx, &truth, horizon)?;
        rows.push(RateRow {
            horizon,
            reps: agg.reps,
            mean_final: agg.mean_final,
            stderr_final: agg.stderr_final,
        });
    }
    write_rows(&ctx.path("rates.csv"), &rows)?;
    let points: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.horizon as f64, r.mean_final))
        .collect();
    let fit = rate_fit(&points)?;
    ctx.write_summary(RatesResults {
        p_star: truth.p_star,
        r_star: truth.r_star,
        points: rows,
        fit,
    })
}

#[derive(Serialize)]
struct BetaRow {
    horizon: u64,
    rep: usize,
    seed: u64,
    beta_hat: f64,
    raw_sup_norm: f64,
    clamped: bool,
    in_interval: bool,
}

fn beta(ctx: &Context) -> Result<()> {
    let section = ctx.config.beta.expect("validated");
    let mut reports: Vec<CoverageReport> = Vec::new();
    let mut rows = Vec::new();
    for &horizon in &ctx.config.horizons {
        let rep = beta_coverage(
            &ctx.model,
            &ctx.config.noise,
            horizon,
            (section.beta_min, section.beta_max),
            ctx.config.reps,
            ctx.config.base_seed,
            ctx.workers,
        )?;
        for (i, e) in rep.estimates.iter().enumerate() {
            rows.push(BetaRow {
                horizon,
                rep: i,
                seed: ctx.config.base_seed.wrapping_add(i as u64),
                beta_hat: e.value,
                raw_sup_norm: e.raw_sup_norm,
                clamped: e.clamped,
                in_interval: e.value >= rep.interval.0 && e.value <= rep.interval.1,
            });
        }
        reports.push(rep);
    }
    write_rows(&ctx.path("beta.csv"), &rows)?;
    ctx.write_summary(reports)
}

#[derive(Serialize)]
struct SelfSimResults {
    beta: f64,
    degree: usize,
    m1: f64,
    m2: f64,
    c_max: u32,
    anchor: f64,
    all_passed: bool,
    reports: Vec<SelfSimReport>,
}

fn selfsim(ctx: &Context) -> Result<()> {
    let section: SelfSimSection = ctx.config.selfsim.unwrap_or_default();
    let fitted = ctx.model.selfsim();
    let beta = ctx.model.beta();
    let degree = match section.degree.or(fitted.map(|s| s.degree)) {
        Some(d) => d,
        None => holder_degree(beta)?,
    };
    let m1 = section
        .m1
        .or(fitted.map(|s| s.m1))
        .unwrap_or(DEFAULT_SELFSIM_M1);
    let m2 = section
        .m2
        .or(fitted.map(|s| s.m2))
        .unwrap_or(DEFAULT_SELFSIM_M2);
    let anchor = ctx.model.p_min();
    let model = &ctx.model;
    let reports = verify_selfsim(
        |p| model.demand(p),
        beta,
        degree,
        m1,
        m2,
        section.c_max,
        anchor,
    )?;
    write_rows(&ctx.path("selfsim.csv"), &reports)?;
    ctx.write_summary(SelfSimResults {
        beta,
        degree,
        m1,
        m2,
        c_max: section.c_max,
        anchor,
        all_passed: reports.iter().all(|r| r.passed),
        reports,
    })
}

#[derive(Serialize)]
struct ApproxRow {
    a: f64,
    b: f64,
    beta_hat: f64,
    sup_error: f64,
    bound: f64,
    ok: bool,
}

#[derive(Serialize)]
struct ApproxResults {
    checks: usize,
    passed: usize,
    /// Largest `sup_error / bound`.
    worst_ratio: f64,
}

/// Draws `intervals` subintervals of `[p_min, 1]` from the base seed and
/// checks each smoothness guess on every one of them.
fn approx_check(ctx: &Context) -> Result<()> {
    let section: ApproxSection = ctx.config.approx.clone().unwrap_or_default();
    let beta = ctx.model.beta();
    let guesses = section
        .beta_hats
        .clone()
        .unwrap_or_else(|| vec![beta, beta / 2.0]);
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.config.base_seed);
    let domain = ctx.model.domain();
    let mut rows = Vec::new();
    for _ in 0..section.intervals {
        let iv = random_subinterval(&domain, &mut rng)?;
        for &beta_hat in &guesses {
            let c = check_poly_approx(&ctx.model, &iv, beta_hat)?;
            rows.push(ApproxRow {
                a: iv.a(),
                b: iv.b(),
                beta_hat,
                sup_error: c.sup_error,
                bound: c.bound,
                ok: c.ok,
            });
        }
    }
    write_rows(&ctx.path("approx.csv"), &rows)?;
    ctx.write_summary(ApproxResults {
        checks: rows.len(),
        passed: rows.iter().filter(|r| r.ok).count(),
        worst_ratio: rows
            .iter()
            .map(|r| r.sup_error / r.bound)
            .fold(0.0, f64::max),
    })
}

/// Uniform endpoints, redrawn until the interval is at least
/// [`MIN_APPROX_WIDTH`] wide.
pub fn random_subinterval<R: Rng>(domain: &Interval, rng: &mut R) -> Result<Interval> {
    loop {
        let x = rng.random_range(domain.a()..=domain.b());
        let y = rng.random_range(domain.a()..=domain.b());
        let (a, b) = if x <= y { (x, y) } else { (y, x) };
        if b - a >= MIN_APPROX_WIDTH {
            return Interval::new(a, b);
        }
    }
}
