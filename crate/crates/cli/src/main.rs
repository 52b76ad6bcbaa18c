mod config;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use levelset_core::estimators::{estimate, EstimatorKind, SearchConfig, SetClass, TieRule};
use levelset_core::experiments::{
    limit_distribution, run_equivalence, run_limit_comparison, run_rates, write_limit_csv,
    EstimatorChoice, ExperimentConfig,
};
use levelset_core::geometry::{hausdorff_distance, sym_diff_volume};
use levelset_core::limit::WienerGrid;
use levelset_core::models::builtin_model;
use levelset_core::selftest::{run_selftest, SelftestOptions};
use levelset_core::stats::{mean, quantile_sorted};
use levelset_core::Error;

use config::{pick, FileConfig};

#[derive(Parser, Debug)]
#[command(
    name = "levelset",
    version,
    about = "Density level-set estimation and cube-root asymptotics"
)]
struct Cli {
    /// Worker threads; results do not depend on this value.
    #[arg(long, global = true, env = "LEVELSET_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample from a model, estimate its level set and compare with the truth.
    Estimate(EstimateArgs),
    /// Monte Carlo rate experiment.
    Rates(RatesArgs),
    /// Discrepancy between the min-volume and max-prob estimators.
    Equivalence(RatesArgs),
    /// Draws from the limiting argmax distribution.
    Limit(LimitArgs),
    /// Finite-n versus limit-law Kolmogorov-Smirnov comparison.
    Compare(CompareArgs),
    /// Fast invariant checks.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Config file with keys mirroring the long flag names.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    /// intervals, balls or ellipsoids.
    #[arg(long)]
    class: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overwrite existing outputs.
    #[arg(long)]
    force: bool,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n: Option<usize>,
    /// excess-mass, min-volume, max-prob or max-prob-equal-vol.
    #[arg(long)]
    estimator: Option<String>,
    /// Relaxation constant; the slack is `delta n^(-2/3)`.
    #[arg(long)]
    delta: Option<f64>,
    /// Search restarts for planar classes.
    #[arg(long)]
    restarts: Option<usize>,
}

#[derive(Args, Debug)]
struct RatesArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated estimator names.
    #[arg(long, value_delimiter = ',')]
    estimators: Option<Vec<String>>,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<usize>>,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long)]
    experiment_id: Option<String>,
}

#[derive(Args, Debug)]
struct LimitArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    draws: Option<usize>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    c_max: Option<f64>,
    /// Restrict to sets with equal outer and inner mass.
    #[arg(long)]
    constrained: bool,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    rates: RatesArgs,
    #[arg(long)]
    draws: Option<usize>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    c_max: Option<f64>,
}

#[derive(Args, Debug)]
struct SelftestArgs {
    #[arg(long, hide = true)]
    inject_tie_fault: bool,
}

enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Core(e) if e.is_validation() => 2,
            Failure::Core(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> CliResult<T> {
    s.parse().map_err(Failure::Core)
}

fn to_json(value: &impl Serialize) -> CliResult<String> {
    serde_json::to_string_pretty(value).map_err(|e| Failure::Core(e.into()))
}

fn emit(value: &impl Serialize, out: Option<&Path>, force: bool) -> CliResult<()> {
    let text = to_json(value)?;
    match out {
        Some(path) => {
            if path.exists() && !force {
                return Err(Error::OutputExists(path.display().to_string()).into());
            }
            fs::write(path, text + "\n").map_err(|e| Failure::Core(e.into()))
        }
        None => print_line(&text),
    }
}

/// Writes a line to stdout; a closed pipe is not an error.
fn print_line(text: &str) -> CliResult<()> {
    let mut stdout = std::io::stdout().lock();
    match writeln!(stdout, "{text}").and_then(|_| stdout.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::Core(e.into())),
        _ => Ok(()),
    }
}

fn run_estimate(args: EstimateArgs) -> CliResult<()> {
    let file = FileConfig::load(args.common.config.as_deref()).map_err(Failure::Usage)?;
    let c = &args.common;
    let model_name = pick(c.model.clone(), file.model, "triangular1d".into());
    let lambda = pick(c.lambda, file.lambda, 0.5);
    let n = pick(args.n, file.n, 1000);
    let seed = pick(c.seed, file.seed, 1);
    let model = builtin_model(&model_name, lambda)?;
    let default_class = if model.dimension() == 1 {
        "intervals"
    } else {
        "balls"
    };
    let class: SetClass = parse(&pick(c.class.clone(), file.class, default_class.into()))?;
    let choice: EstimatorChoice = parse(&pick(
        args.estimator.clone(),
        file.estimator,
        "excess-mass".into(),
    ))?;
    let mut kind = choice.kind(&model);
    if let Some(delta_n) = args.delta.or(file.delta) {
        kind = EstimatorKind::Relaxed {
            inner: Box::new(kind),
            delta_n,
        };
    }
    if n == 0 {
        return Err(Failure::Usage("--n must be at least 1".into()));
    }
    let search = SearchConfig {
        restarts: pick(
            args.restarts,
            file.restarts,
            SearchConfig::default().restarts,
        ),
        seed,
        ..SearchConfig::default()
    };
    let sample = model.sample(n, seed);
    let result = estimate(&sample, &kind, class, &search)?;
    let truth = &model.oracle.body;
    let report = json!({
        "model": model.name(),
        "lambda": lambda,
        "n": n,
        "seed": seed,
        "class": class,
        "estimator": kind,
        "set": result.set,
        "objective": result.objective,
        "empirical_mass": result.empirical_mass(),
        "diagnostics": result.diagnostics,
        "oracle": {
            "level_set": truth,
            "p_lambda": model.oracle.p_lambda,
            "v_lambda": model.oracle.v_lambda,
            "e_lambda": model.oracle.e_lambda,
            "mu_symdiff": sym_diff_volume(&result.set, truth)?,
            "p_symdiff": model.p_sym_diff(&result.set)?,
            "hausdorff": hausdorff_distance(&result.set, truth)?,
        },
    });
    let out = c.out.clone().or(file.out);
    emit(
        &report,
        out.as_deref(),
        c.force || file.force.unwrap_or(false),
    )
}

fn experiment_config(args: &RatesArgs, file: &FileConfig) -> CliResult<ExperimentConfig> {
    let d = ExperimentConfig::default();
    let c = &args.common;
    let estimators = match args.estimators.clone().or(file.estimators.clone()) {
        Some(names) => names.iter().map(|s| parse(s)).collect::<CliResult<_>>()?,
        None => d.estimators.clone(),
    };
    let model = pick(c.model.clone(), file.model.clone(), d.model.clone());
    let class = match c.class.clone().or(file.class.clone()) {
        Some(s) => parse(&s)?,
        None if model.ends_with("2d") => SetClass::Balls,
        None => d.class,
    };
    Ok(ExperimentConfig {
        experiment_id: pick(
            args.experiment_id.clone(),
            file.experiment_id.clone(),
            d.experiment_id.clone(),
        ),
        model,
        lambda: pick(c.lambda, file.lambda, d.lambda),
        estimators,
        class,
        n_grid: pick(args.n_grid.clone(), file.n_grid.clone(), d.n_grid.clone()),
        replications: pick(args.replications, file.replications, d.replications),
        seed: pick(c.seed, file.seed, d.seed),
        output_dir: c.out.clone().or(file.out.clone()),
        force: c.force || file.force.unwrap_or(false),
        ..d
    })
}

fn apply_limit(
    cfg: &mut ExperimentConfig,
    draws: Option<usize>,
    step: Option<f64>,
    c_max: Option<f64>,
    file: &FileConfig,
) {
    let d = WienerGrid::default();
    cfg.limit.draws = pick(draws, file.draws, cfg.limit.draws);
    cfg.limit.grid = WienerGrid {
        step: pick(step, file.step, d.step),
        c_max: pick(c_max, file.c_max, d.c_max),
    };
}

fn run_rates_cmd(args: RatesArgs) -> CliResult<()> {
    let file = FileConfig::load(args.common.config.as_deref()).map_err(Failure::Usage)?;
    let cfg = experiment_config(&args, &file)?;
    let out = run_rates(&cfg)?;
    emit(&out.summary, None, false)
}

fn run_equivalence_cmd(args: RatesArgs) -> CliResult<()> {
    let file = FileConfig::load(args.common.config.as_deref()).map_err(Failure::Usage)?;
    let cfg = experiment_config(&args, &file)?;
    let summary = run_equivalence(&cfg)?;
    emit(&summary, None, false)
}

fn run_limit_cmd(args: LimitArgs) -> CliResult<()> {
    let file = FileConfig::load(args.common.config.as_deref()).map_err(Failure::Usage)?;
    let out = args.common.out.clone().or(file.out.clone());
    let force = args.common.force || file.force.unwrap_or(false);
    let rates = RatesArgs {
        common: args.common,
        estimators: None,
        n_grid: None,
        replications: None,
        experiment_id: None,
    };
    let mut cfg = experiment_config(&rates, &file)?;
    apply_limit(&mut cfg, args.draws, args.step, args.c_max, &file);
    let constrained = args.constrained || file.constrained.unwrap_or(false);
    let model = cfg.validate()?;
    if let Some(path) = &out {
        if path.exists() && !force {
            return Err(Error::OutputExists(path.display().to_string()).into());
        }
    }
    let z = limit_distribution(&cfg, &model, constrained)?;
    if let Some(path) = &out {
        write_limit_csv(path, &z, force)?;
    }
    let summary = json!({
        "model": model.name(),
        "lambda": model.lambda(),
        "constrained": constrained,
        "draws": z.draws.len(),
        "seed": cfg.seed,
        "m_total": {
            "mean": mean(&z.m_total),
            "median": quantile_sorted(&z.m_total, 0.5),
            "q90": quantile_sorted(&z.m_total, 0.9),
        },
        "objective_median": quantile_sorted(&z.objective, 0.5),
        "tie_fraction": z.tie_fraction(),
    });
    emit(&summary, None, false)
}

fn run_compare_cmd(args: CompareArgs) -> CliResult<()> {
    let file = FileConfig::load(args.rates.common.config.as_deref()).map_err(Failure::Usage)?;
    let mut cfg = experiment_config(&args.rates, &file)?;
    apply_limit(&mut cfg, args.draws, args.step, args.c_max, &file);
    let out = cfg.output_dir.take();
    let force = cfg.force;
    if let Some(path) = &out {
        if path.exists() && !force {
            return Err(Error::OutputExists(path.display().to_string()).into());
        }
    }
    let cmp = run_limit_comparison(&cfg)?;
    let rows: Vec<_> = cmp
        .comparisons
        .iter()
        .map(|c| {
            json!({
                "estimator": c.estimator,
                "constrained_limit": c.constrained_limit,
                "ks_statistic": c.ks_statistic,
                "finite_median": quantile_sorted(&c.finite, 0.5),
                "limit_median": quantile_sorted(&c.limit, 0.5),
            })
        })
        .collect();
    if let Some(path) = &out {
        emit(&cmp, Some(path), force)?;
    }
    emit(&json!({ "n": cmp.n, "comparisons": rows }), None, false)
}

fn run_selftest_cmd(args: SelftestArgs) -> ExitCode {
    let opts = SelftestOptions {
        oracle_tie_rule: if args.inject_tie_fault {
            TieRule::Last
        } else {
            TieRule::Lexicographic
        },
    };
    let results = run_selftest(&opts);
    for r in &results {
        let _ = print_line(&r.line());
    }
    if results.iter().all(|r| r.pass) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(workers) = cli.workers {
        if workers == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
        {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(3);
        }
    }
    let result = match cli.command {
        Command::Estimate(a) => run_estimate(a),
        Command::Rates(a) => run_rates_cmd(a),
        Command::Equivalence(a) => run_equivalence_cmd(a),
        Command::Limit(a) => run_limit_cmd(a),
        Command::Compare(a) => run_compare_cmd(a),
        Command::Selftest(a) => return run_selftest_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
