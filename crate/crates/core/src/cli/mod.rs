//! Batch front end: `beta`, `solve`, `simulate`, `paths`, `sensitivity`.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 ill-posed
//! problem (`β <= 0`), 3 statistical alarm.

pub mod config;
mod svg;

use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub use config::{Format, ModeName, RunConfig};

use crate::control::{
    eval_value_full, fd_policy_iteration_oracle, hjb_residual_restricted,
    hjb_residual_unrestricted, root_constants, sensitivity_scan, strictly_decreasing, Derivatives,
    OracleGrid, Solution,
};
use crate::error::Error;
use crate::levy::{beta, BetaValue};
use crate::montecarlo::{
    export_discounted_fx_paths, simulate_value, MCEstimate, SimConfig, StrategySpec,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_ILL_POSED: u8 = 2;
pub const EXIT_ALARM: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::IllPosed(_)) => EXIT_ILL_POSED,
            _ => EXIT_USAGE,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "divfx",
    version,
    about = "Optimal dividend barriers under exchange-rate risk"
)]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH", conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Bundled configuration instead of --config.
    #[arg(long, global = true, value_name = "NAME", value_parser = ["bsp1", "bsp2"])]
    pub preset: Option<String>,
    /// Output directory (overrides output.directory).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Overrides sim.seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output formats (overrides output.formats); CSV tables are always written.
    #[arg(long, global = true, value_enum, value_delimiter = ',')]
    pub format: Vec<Format>,
    /// Overrides problem.delta.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    /// Overrides problem.mode.
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeName>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Effective preference rate and well-posedness.
    Beta,
    /// Closed-form value function, barrier and finite-difference cross-check.
    Solve(SolveArgs),
    /// Monte Carlo value of the optimal strategy and optional alternatives.
    Simulate(SimulateArgs),
    /// Sample paths of L_t + δt.
    Paths(PathsArgs),
    /// Optimal barriers over a grid of effective rates.
    Sensitivity(SensitivityArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Grid points for the table and the finite-difference solver.
    #[arg(long, default_value_t = 2000)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Initial surplus.
    #[arg(long, default_value_t = 1.0)]
    pub x0: f64,
    /// Initial log exchange rate.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub l0: f64,
    /// Barrier of an additional strategy.
    #[arg(long)]
    pub barrier: Option<f64>,
    /// Payout rate of an additional threshold strategy.
    #[arg(long)]
    pub rate: Option<f64>,
    /// Largest tolerated |z| of the optimal strategy against its closed form.
    #[arg(long, default_value_t = 4.0)]
    pub alarm: f64,
    /// Overrides sim.n_paths.
    #[arg(long)]
    pub n_paths: Option<usize>,
    /// Overrides sim.dt.
    #[arg(long)]
    pub dt: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PathsArgs {
    #[arg(long, default_value_t = 100.0)]
    pub horizon: f64,
    /// Number of paths.
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
}

#[derive(Debug, Args)]
pub struct SensitivityArgs {
    /// `start:step:stop` or a comma-separated list; sorted before use.
    #[arg(long, default_value = "0.1:0.1:1.0", allow_hyphen_values = true)]
    pub betas: String,
    /// Overrides problem.xi.
    #[arg(long)]
    pub xi: Option<f64>,
}

/// Parses the process arguments, runs the command and maps the outcome to
/// an exit code.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match (&cli.config, &cli.preset) {
        (Some(path), _) => RunConfig::from_path(path)?,
        (None, Some(name)) => {
            let text = config::preset(name)
                .ok_or_else(|| CliError::Usage(format!("unknown preset `{name}`")))?;
            RunConfig::parse(text)?
        }
        (None, None) => {
            return Err(CliError::Usage(
                "one of --config or --preset is required".into(),
            ))
        }
    };
    if let Some(seed) = cli.seed {
        cfg.sim.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.directory = out.clone();
    }
    if !cli.format.is_empty() {
        cfg.formats = cli.format.clone();
    }
    if let Some(delta) = cli.delta {
        if !delta.is_finite() {
            return Err(CliError::Usage("--delta must be finite".into()));
        }
        cfg.problem.delta = delta;
    }
    if let Some(mode) = cli.mode {
        cfg.problem.mode = mode;
    }
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<u8, CliError> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Beta => cmd_beta(&cfg),
        Command::Solve(a) => cmd_solve(&cfg, a),
        Command::Simulate(a) => cmd_simulate(&cfg, a),
        Command::Paths(a) => cmd_paths(&cfg, a),
        Command::Sensitivity(a) => cmd_sensitivity(&cfg, a),
    }
}

/// Fixed-point rendering with trailing zeros removed.
fn num(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let s = format!("{v:.12}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn out_file(cfg: &RunConfig, name: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(&cfg.directory).map_err(io_err(&cfg.directory))?;
    Ok(cfg.directory.join(name))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(io_err(path))
}

/// Shortest round-trip rendering, exponent form for very small or large values.
fn cell(v: f64) -> String {
    format!("{v:?}")
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn cmd_beta(cfg: &RunConfig) -> Result<u8, CliError> {
    let b = beta(&cfg.fx, cfg.problem.delta)?;
    let shown = match b.value {
        BetaValue::Finite(v) => num(v),
        BetaValue::MinusInfinity => "-inf".into(),
    };
    println!("delta = {}", num(cfg.problem.delta));
    println!("beta = {shown}");
    println!("integrable = {}", b.integrable);
    println!("well_posed = {}", b.is_well_posed());
    if b.is_well_posed() {
        Ok(EXIT_OK)
    } else {
        eprintln!("ill-posed: beta = {shown} is not positive, so the value function is infinite");
        Ok(EXIT_ILL_POSED)
    }
}

fn cmd_solve(cfg: &RunConfig, args: &SolveArgs) -> Result<u8, CliError> {
    let spec = cfg.problem_spec()?;
    let rc = root_constants(&spec)?;
    let sol = Solution::solve(&spec)?;
    let vf = sol.as_value_function();
    let case = match &sol {
        Solution::Restricted(s) => s.case.name(),
        Solution::Unrestricted(_) => "reflection",
    };
    let barrier = vf.barrier();
    let x_max = 3.0 * barrier + 5.0;
    let n = args.points;
    if n < 200 {
        return Err(CliError::Usage(format!(
            "--points must be at least 200, got {n}"
        )));
    }

    println!("mode = {}", spec.mode.name());
    println!("beta = {}", num(spec.beta));
    println!("theta = {}", num(rc.theta));
    println!("zeta = {}", num(rc.zeta));
    match rc.eta {
        Some(eta) => println!("eta = {}", num(eta)),
        None => println!("eta = n/a"),
    }
    println!("case = {case}");
    println!("barrier = {}", num(barrier));

    let mut rows = Vec::with_capacity(n);
    let mut max_residual = 0f64;
    let (mut xs, mut vs) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for i in 0..n {
        let x = x_max * i as f64 / (n - 1) as f64;
        let residual = match &sol {
            Solution::Restricted(s) => hjb_residual_restricted(s, x, Derivatives::ClosedForm),
            Solution::Unrestricted(s) => {
                hjb_residual_unrestricted(s, x, Derivatives::ClosedForm).max()
            }
        };
        max_residual = max_residual.max(residual.abs());
        let v = vf.value(x)?;
        rows.push(vec![
            cell(x),
            cell(v),
            cell(vf.first_derivative(x)?),
            cell(residual),
        ]);
        xs.push(x);
        vs.push(v);
    }
    println!("max_abs_residual = {max_residual:e}");

    let oracle = fd_policy_iteration_oracle(&spec, OracleGrid { x_max, n_points: n })?;
    println!("oracle_sup_gap = {:e}", oracle.sup_gap(vf));
    println!("oracle_barrier = {}", num(oracle.barrier()));
    println!(
        "oracle_barrier_cells = {:.2}",
        oracle.barrier_cells_from(barrier)
    );
    println!("oracle_iterations = {}", oracle.iterations);

    let path = out_file(cfg, "value_function.csv")?;
    write_file(
        &path,
        &csv_bytes(&["x", "F_or_G", "Fprime", "residual"], &rows),
    )?;
    println!("wrote {}", path.display());
    if cfg.wants(Format::Svg) {
        let path = out_file(cfg, "value_function.svg")?;
        let title = format!(
            "{} value function, barrier {}",
            spec.mode.name(),
            num(barrier)
        );
        write_file(
            &path,
            svg::line_plot(&title, "x", "value", &xs, &[vs]).as_bytes(),
        )?;
        println!("wrote {}", path.display());
    }
    Ok(EXIT_OK)
}

fn estimate_row(s: &StrategySpec, e: &MCEstimate, sim: &SimConfig) -> Vec<String> {
    let opt = |v: Option<f64>| v.map(cell).unwrap_or_default();
    vec![
        s.name().to_owned(),
        opt(s.barrier()),
        opt(s.rate()),
        cell(e.mean),
        cell(e.stderr),
        cell(e.truncation_bound),
        e.n.to_string(),
        cell(sim.dt),
        sim.seed.to_string(),
    ]
}

fn describe(s: &StrategySpec) -> String {
    match *s {
        StrategySpec::ThresholdRate { barrier, rate } => {
            format!("threshold(b = {}, r = {})", num(barrier), num(rate))
        }
        StrategySpec::ReflectionBarrier { barrier } => format!("reflection(b = {})", num(barrier)),
        StrategySpec::ConstantRate { rate } => format!("constant(r = {})", num(rate)),
    }
}

fn cmd_simulate(cfg: &RunConfig, args: &SimulateArgs) -> Result<u8, CliError> {
    let mut sim = cfg.sim;
    if let Some(n) = args.n_paths {
        sim.n_paths = n;
    }
    if let Some(dt) = args.dt {
        sim.dt = dt;
    }
    sim.validate()?;
    if !(args.alarm.is_finite() && args.alarm > 0.0) {
        return Err(CliError::Usage(format!(
            "--alarm must be positive, got {}",
            args.alarm
        )));
    }
    let spec = cfg.problem_spec()?;
    let sol = Solution::solve(&spec)?;
    let optimal = match &sol {
        Solution::Restricted(s) => StrategySpec::ThresholdRate {
            barrier: s.x_r,
            rate: s.xi(),
        },
        Solution::Unrestricted(s) => StrategySpec::ReflectionBarrier { barrier: s.x_u },
    };
    let alternative = if args.barrier.is_none() && args.rate.is_none() {
        None
    } else {
        let b = args.barrier.unwrap_or(sol.as_value_function().barrier());
        Some(match (&sol, args.rate) {
            (Solution::Restricted(s), r) => StrategySpec::ThresholdRate {
                barrier: b,
                rate: r.unwrap_or(s.xi()),
            },
            (Solution::Unrestricted(_), Some(r)) => StrategySpec::ThresholdRate {
                barrier: b,
                rate: r,
            },
            (Solution::Unrestricted(_), None) => StrategySpec::ReflectionBarrier { barrier: b },
        })
    };
    if let Some(alt) = &alternative {
        alt.validate(spec.xi())?;
    }

    let analytic = eval_value_full(args.l0, args.x0, sol.as_value_function())?;
    println!("mode = {}", spec.mode.name());
    println!("beta = {}", num(spec.beta));
    println!("x0 = {}, l0 = {}", num(args.x0), num(args.l0));
    println!("analytic_optimum = {}", num(analytic));

    let est = simulate_value(&spec, &cfg.fx, &optimal, &sim, args.x0, args.l0)?;
    let z = est.z_score(analytic);
    println!(
        "optimal {}: mean = {} stderr = {} truncation_bound = {:e} n = {} z = {:.3}",
        describe(&optimal),
        num(est.mean),
        num(est.stderr),
        est.truncation_bound,
        est.n,
        z
    );
    let mut rows = vec![estimate_row(&optimal, &est, &sim)];

    if let Some(alt) = alternative {
        let e = simulate_value(&spec, &cfg.fx, &alt, &sim, args.x0, args.l0)?;
        let ok = e.mean <= analytic + 3.0 * e.stderr;
        println!(
            "alternative {}: mean = {} stderr = {} truncation_bound = {:e} n = {} dominated = {}",
            describe(&alt),
            num(e.mean),
            num(e.stderr),
            e.truncation_bound,
            e.n,
            ok
        );
        rows.push(estimate_row(&alt, &e, &sim));
    }

    let path = out_file(cfg, "estimates.csv")?;
    append_estimates(&path, &rows)?;
    println!("wrote {}", path.display());

    if z.abs() > args.alarm {
        eprintln!("alarm: |z| = {:.3} exceeds {}", z.abs(), args.alarm);
        return Ok(EXIT_ALARM);
    }
    Ok(EXIT_OK)
}

const ESTIMATE_HEADER: [&str; 9] = [
    "strategy",
    "b",
    "r",
    "mean",
    "stderr",
    "truncation_bound",
    "n",
    "dt",
    "seed",
];

fn append_estimates(path: &Path, rows: &[Vec<String>]) -> Result<(), CliError> {
    let fresh = std::fs::metadata(path)
        .map(|m| m.len() == 0)
        .unwrap_or(true);
    let mut bytes = csv_bytes(&ESTIMATE_HEADER, rows);
    if !fresh {
        let header_end = bytes.iter().position(|&b| b == b'\n').map_or(0, |i| i + 1);
        bytes.drain(..header_end);
    }
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io_err(path))?;
    f.write_all(&bytes).map_err(io_err(path))
}

fn cmd_paths(cfg: &RunConfig, args: &PathsArgs) -> Result<u8, CliError> {
    let delta = cfg.problem.delta;
    let paths =
        export_discounted_fx_paths(&cfg.fx, delta, args.horizon, args.dt, args.n, cfg.sim.seed)?;
    let path = out_file(cfg, "paths.csv")?;
    let mut bytes = Vec::new();
    paths.write_csv(&mut bytes).map_err(io_err(&path))?;
    write_file(&path, &bytes)?;
    println!("wrote {}", path.display());

    let expected = cfg.fx.mean() + delta;
    println!("expected_drift = {}", num(expected));
    if args.n >= 2 {
        let (slope, se) = paths.terminal_slope();
        println!("empirical_drift = {} (stderr {})", num(slope), num(se));
    }
    if cfg.wants(Format::Svg) {
        let path = out_file(cfg, "paths.svg")?;
        let title = format!("{} realisations of L_t + {}t", args.n, num(delta));
        write_file(
            &path,
            svg::line_plot(&title, "t", "L_t + delta t", &paths.times, &paths.values).as_bytes(),
        )?;
        println!("wrote {}", path.display());
    }
    Ok(EXIT_OK)
}

/// `start:step:stop` (inclusive) or `a,b,c`, returned sorted.
pub fn parse_beta_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = |why: &str| CliError::Usage(format!("--betas `{text}`: {why}"));
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let mut grid = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:step:stop"));
        }
        let (start, step, stop) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
        if !(step.is_finite()
            && step > 0.0
            && start.is_finite()
            && stop.is_finite()
            && stop >= start)
        {
            return Err(bad("need step > 0 and stop >= start"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if count > 1_000_000 {
            return Err(bad("too many points"));
        }
        (0..count)
            .map(|k| {
                let y = start + k as f64 * step;
                format!("{y:.12}").parse::<f64>().unwrap()
            })
            .collect()
    } else {
        text.split(',').map(parse).collect::<Result<Vec<_>, _>>()?
    };
    if grid.is_empty() {
        return Err(bad("empty grid"));
    }
    if let Some(y) = grid.iter().find(|y| !(y.is_finite() && **y > 0.0)) {
        return Err(bad(&format!("rates must be positive, got {y}")));
    }
    grid.sort_by(f64::total_cmp);
    if grid.windows(2).any(|w| w[0] == w[1]) {
        return Err(bad("duplicate rates"));
    }
    Ok(grid)
}

fn cmd_sensitivity(cfg: &RunConfig, args: &SensitivityArgs) -> Result<u8, CliError> {
    let grid = parse_beta_grid(&args.betas)?;
    let (mu, sigma) = cfg.mu_sigma()?;
    let xi = args.xi.or(cfg.problem.xi).ok_or_else(|| {
        CliError::Config("problem.xi: required for sensitivity (or pass --xi)".into())
    })?;
    let rows = sensitivity_scan(mu, sigma, xi, &grid)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![cell(r.beta), cell(r.x_r), cell(r.x_u)])
        .collect();
    for r in &rows {
        println!(
            "beta = {:<6} x_r = {:<16} x_u = {:<16} {}",
            num(r.beta),
            num(r.x_r),
            num(r.x_u),
            r.restricted_case.name()
        );
    }
    let path = out_file(cfg, "sensitivity.csv")?;
    write_file(&path, &csv_bytes(&["beta", "x_r", "x_u"], &table))?;
    println!("wrote {}", path.display());
    println!(
        "strictly decreasing: {}",
        if strictly_decreasing(&rows) {
            "PASS"
        } else {
            "FAIL"
        }
    );
    Ok(EXIT_OK)
}
