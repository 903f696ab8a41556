//! Command-line front end.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical or runtime failure.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use meterlink_core::grid::{grid, Scale};
use meterlink_core::{
    constrained_optimum, draw_erasures, exact_rmsd, reconstruct, success_probability, Constraints,
    Error, FarField, LinkParams, Network, SimConfig, SolverOptions, SweepAxis,
};
use serde::Serialize;
use serde_json::Value;

use crate::manifest::{manifest_path, RunManifest};
use crate::output::{write_exact, write_histogram, write_json, write_rmsd_sweep, write_sweep};
use crate::parallel::{self, THREADS_ENV};
use crate::series_io::{load_series, LoadError, LoadOptions, TimeColumn};

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "meterlink", version, about = "Outage-constrained smart-meter links over a shared cellular uplink")]
pub struct Cli {
    /// Worker threads for Monte Carlo runs and sweeps (0 = all cores).
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Throughput-optimal threshold and power under the power and outage caps (JSON).
    Optimize(OptimizeArgs),
    /// Constrained optimum along a grid of one parameter (CSV).
    Sweep(SweepArgs),
    /// Monte Carlo success probability over a Poisson field of interferers (JSON).
    Simulate(SimulateArgs),
    /// Erasure and reconstruction statistics for a demand series (JSON or CSV).
    Reconstruct(ReconstructArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolverArgs {
    /// Bisection tolerance on beta.
    #[arg(long, default_value_t = meterlink_core::optimizer::DEFAULT_TOL)]
    pub tol: f64,
    /// Upper end of the root bracket search.
    #[arg(long, default_value_t = meterlink_core::optimizer::DEFAULT_BRACKET_HI)]
    pub bracket_hi: f64,
}

impl SolverArgs {
    fn options(&self) -> Result<SolverOptions, CliError> {
        let opts = SolverOptions {
            tol: self.tol,
            bracket_hi: self.bracket_hi,
        };
        opts.validate()?;
        Ok(opts)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OptimizeArgs {
    /// Density of primary interferers per unit area.
    #[arg(long)]
    pub lambda: f64,
    /// Path-loss exponent, in (2, 6].
    #[arg(long)]
    pub alpha: f64,
    /// Secondary link distance.
    #[arg(long)]
    pub d: f64,
    /// Primary transmit power.
    #[arg(long)]
    pub wp: f64,
    /// Secondary power cap.
    #[arg(long)]
    pub wmax: f64,
    /// Outage cap, in (0, 0.25].
    #[arg(long)]
    pub epsilon: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisArg {
    Lambda,
    Wmax,
    Epsilon,
}

impl From<AxisArg> for SweepAxis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::Lambda => SweepAxis::Lambda,
            AxisArg::Wmax => SweepAxis::WMax,
            AxisArg::Epsilon => SweepAxis::Epsilon,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleArg {
    Linear,
    Log,
}

impl From<ScaleArg> for Scale {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::Linear => Scale::Linear,
            ScaleArg::Log => Scale::Log,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub axis: AxisArg,
    #[arg(long)]
    pub from: f64,
    #[arg(long)]
    pub to: f64,
    #[arg(long)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = ScaleArg::Linear)]
    pub scale: ScaleArg,
    #[arg(long, default_value_t = 0.25)]
    pub lambda: f64,
    #[arg(long, default_value_t = 4.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub d: f64,
    #[arg(long, default_value_t = 1.0)]
    pub wp: f64,
    #[arg(long, default_value_t = 1.0)]
    pub wmax: f64,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FarFieldArg {
    /// Add the mean interference from beyond the window.
    MeanField,
    /// Ignore everything beyond the window.
    Truncated,
}

impl From<FarFieldArg> for FarField {
    fn from(f: FarFieldArg) -> Self {
        match f {
            FarFieldArg::MeanField => FarField::MeanField,
            FarFieldArg::Truncated => FarField::Truncated,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 0.25)]
    pub lambda: f64,
    #[arg(long, default_value_t = 4.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub d: f64,
    #[arg(long, default_value_t = 1.0)]
    pub wp: f64,
    #[arg(long, default_value_t = 1.0)]
    pub ws: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    /// Simulation window radius; defaults to max(40 d, 40 d beta^(1/alpha)).
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, value_enum, default_value_t = FarFieldArg::MeanField)]
    pub far_field: FarFieldArg,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReconstructArgs {
    /// Two-column CSV: time (ISO-8601 or index) and watts.
    #[arg(long)]
    pub input: PathBuf,
    /// Per-sample erasure probability.
    #[arg(long, required_unless_present = "sweep")]
    pub epsilon: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub realizations: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Erasure grid: `FROM..TO` (with --points) or a comma-separated list.
    #[arg(long, conflicts_with = "histogram")]
    pub sweep: Option<String>,
    /// Grid size for a `FROM..TO` sweep.
    #[arg(long, default_value_t = 25)]
    pub points: usize,
    /// Emit the per-realization RMSD histogram as CSV.
    #[arg(long)]
    pub histogram: bool,
    /// Enumerate every erasure pattern instead of sampling (N <= 20).
    #[arg(long, conflicts_with = "histogram")]
    pub exact: bool,
    #[arg(long, value_enum, default_value_t = TimeColumn::Auto)]
    pub time: TimeColumn,
    /// Sampling interval in hours for index-based input.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Average the input into bins of this many hours.
    #[arg(long)]
    pub resample: Option<f64>,
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Write here instead of the recorded output path.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. } | Error::LengthMismatch { .. } | Error::TooManySamples { .. } => {
                CliError::Validation(e.to_string())
            }
            Error::NoRoot { .. } | Error::AllErased(_) => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        CliError::Validation(e.to_string())
    }
}

/// Bytes produced by a command, plus the status to exit with after writing them.
struct Emitted {
    bytes: Vec<u8>,
    status: Result<(), CliError>,
}

impl Emitted {
    fn ok(bytes: Vec<u8>) -> Self {
        Self { bytes, status: Ok(()) }
    }
}

fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut buf = Vec::new();
    write_json(&mut buf, value).expect("writing to memory");
    buf
}

#[derive(Serialize)]
struct OptimizeReport {
    lambda: f64,
    alpha: f64,
    d: f64,
    wp: f64,
    wmax: f64,
    epsilon: f64,
    beta_star: f64,
    ws_star: f64,
    psuc: f64,
    throughput: f64,
    branch: &'static str,
    t_approx: Option<f64>,
    beta_unconstrained: Option<f64>,
    outage_unconstrained: Option<f64>,
}

fn optimize(a: &OptimizeArgs) -> Result<Emitted, CliError> {
    let net = Network::new(a.lambda, a.alpha, a.d, a.wp)?;
    let c = Constraints::new(a.wmax, a.epsilon)?;
    let s = constrained_optimum(&net, &c, &a.solver.options()?)?;
    Ok(Emitted::ok(json(&OptimizeReport {
        lambda: a.lambda,
        alpha: a.alpha,
        d: a.d,
        wp: a.wp,
        wmax: a.wmax,
        epsilon: a.epsilon,
        beta_star: s.point.beta,
        ws_star: s.point.w_s,
        psuc: s.point.p_suc,
        throughput: s.point.throughput,
        branch: s.branch.as_str(),
        t_approx: s.t_approx,
        beta_unconstrained: s.unconstrained.map(|u| u.beta_un),
        outage_unconstrained: s.unconstrained.map(|u| u.outage_at_beta_un),
    })))
}

fn sweep(a: &SweepArgs) -> Result<Emitted, CliError> {
    let net = Network::new(a.lambda, a.alpha, a.d, a.wp)?;
    let c = Constraints::new(a.wmax, a.epsilon)?;
    let opts = a.solver.options()?;
    let values = grid(a.from, a.to, a.points, a.scale.into())?;
    let points = parallel::sweep(&net, &c, a.axis.into(), &values, &opts);

    let mut bytes = Vec::new();
    write_sweep(&mut bytes, &points).map_err(|e| CliError::Runtime(e.to_string()))?;
    // every row failed: exit with the class of the first failure
    let status = match points.iter().find_map(|p| p.outcome.as_ref().err()) {
        Some(first) if points.iter().all(|p| p.outcome.is_err()) => {
            Err(match CliError::from(first.clone()) {
                CliError::Validation(m) => CliError::Validation(format!("no grid point succeeded: {m}")),
                CliError::Runtime(m) => CliError::Runtime(format!("no grid point succeeded: {m}")),
            })
        }
        _ => Ok(()),
    };
    Ok(Emitted { bytes, status })
}

#[derive(Serialize)]
struct SimulateReport {
    lambda: f64,
    alpha: f64,
    d: f64,
    wp: f64,
    ws: f64,
    beta: f64,
    radius: f64,
    far_field: &'static str,
    samples: u64,
    seed: u64,
    analytic: f64,
    estimate: f64,
    stderr: f64,
    successes: u64,
    /// `sqrt(p (1 - p) / M)` at the analytic `p`.
    sigma_analytic: f64,
    /// `None` when `sigma_analytic` is zero and the estimate differs.
    z: Option<f64>,
}

fn simulate(a: &SimulateArgs) -> Result<Emitted, CliError> {
    let p = LinkParams::new(a.lambda, a.alpha, a.d, a.wp, a.ws)?;
    if !(a.beta > 0.0 && a.beta.is_finite()) {
        return Err(CliError::Validation(format!("beta = {} is invalid: expected a finite threshold > 0", a.beta)));
    }
    let radius = a.radius.unwrap_or_else(|| SimConfig::default_radius(&p, a.beta));
    let cfg = SimConfig::new(radius, a.samples, a.seed).with_far_field(a.far_field.into());
    let e = parallel::empirical_psuc(&p, a.beta, &cfg)?;
    let analytic = success_probability(&p, a.beta);
    let sigma = (analytic * (1.0 - analytic) / a.samples as f64).sqrt();
    let diff = e.estimate - analytic;
    let z = if sigma > 0.0 {
        Some(diff / sigma)
    } else if diff == 0.0 {
        Some(0.0)
    } else {
        None
    };
    Ok(Emitted::ok(json(&SimulateReport {
        lambda: a.lambda,
        alpha: a.alpha,
        d: a.d,
        wp: a.wp,
        ws: a.ws,
        beta: a.beta,
        radius,
        far_field: cfg.far_field.as_str(),
        samples: a.samples,
        seed: a.seed,
        analytic,
        estimate: e.estimate,
        stderr: e.stderr,
        successes: e.successes,
        sigma_analytic: sigma,
        z,
    })))
}

/// `FROM..TO` spread over `points` linear steps, or a comma-separated list.
pub fn parse_epsilon_grid(text: &str, points: usize) -> Result<Vec<f64>, CliError> {
    let number = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| CliError::Validation(format!("--sweep: cannot parse {s:?} as a number")))
    };
    if let Some((from, to)) = text.split_once("..") {
        Ok(grid(number(from)?, number(to)?, points, Scale::Linear)?)
    } else {
        text.split(',').map(number).collect()
    }
}

#[derive(Serialize)]
struct Realization {
    original: Vec<f64>,
    pattern: Vec<bool>,
    reconstructed: Vec<f64>,
    rmsd: f64,
    erased_count: usize,
}

#[derive(Serialize)]
struct ReconstructReport {
    input: String,
    label: String,
    samples: usize,
    tau: f64,
    epsilon: f64,
    realizations: usize,
    seed: u64,
    mean_rmsd: f64,
    stderr: f64,
    discarded: u64,
    /// First Monte Carlo realization.
    example: Realization,
}

fn reconstruct_cmd(a: &ReconstructArgs) -> Result<Emitted, CliError> {
    let series = load_series(
        &a.input,
        &LoadOptions {
            time: a.time,
            tau_hours: a.tau,
            resample_hours: a.resample,
            label: a.label.clone(),
        },
    )?;
    let io = |e: std::io::Error| CliError::Runtime(e.to_string());
    let mut bytes = Vec::new();

    let grid = match &a.sweep {
        Some(text) => Some(parse_epsilon_grid(text, a.points)?),
        None => None,
    };

    if a.exact {
        let eps = grid.unwrap_or_else(|| a.epsilon.into_iter().collect());
        let rows = eps
            .iter()
            .map(|&e| exact_rmsd(&series, e))
            .collect::<Result<Vec<_>, _>>()?;
        write_exact(&mut bytes, &rows).map_err(io)?;
        return Ok(Emitted::ok(bytes));
    }
    if let Some(eps) = grid {
        let rows = parallel::rmsd_sweep(&series, &eps, a.realizations, a.seed)?;
        write_rmsd_sweep(&mut bytes, &rows).map_err(io)?;
        return Ok(Emitted::ok(bytes));
    }

    let epsilon = a.epsilon.expect("clap requires --epsilon without --sweep");
    let stats = parallel::rmsd_statistics(&series, epsilon, a.realizations, a.seed)?;
    if a.histogram {
        write_histogram(&mut bytes, &stats.histogram()).map_err(io)?;
        return Ok(Emitted::ok(bytes));
    }

    // the first realization of chunk 0, redrawn past all-erased patterns as the run does
    let mut rng = meterlink_core::field::chunk_rng(a.seed, 0);
    let report = loop {
        let pattern = draw_erasures(series.len(), epsilon, &mut rng)?;
        match reconstruct(&series, &pattern) {
            Ok(r) => break (pattern, r),
            Err(Error::AllErased(_)) => continue,
            Err(e) => return Err(e.into()),
        }
    };
    let (pattern, r) = report;
    write_json(
        &mut bytes,
        &ReconstructReport {
            input: a.input.display().to_string(),
            label: series.label().to_string(),
            samples: series.len(),
            tau: series.tau(),
            epsilon,
            realizations: stats.realizations(),
            seed: a.seed,
            mean_rmsd: stats.mean_rmsd,
            stderr: stats.stderr,
            discarded: stats.discarded,
            example: Realization {
                original: series.samples().to_vec(),
                pattern: pattern.received().to_vec(),
                reconstructed: r.reconstructed,
                rmsd: r.rmsd,
                erased_count: r.erased_count,
            },
        },
    )
    .map_err(io)?;
    Ok(Emitted::ok(bytes))
}

fn parameters<T: Serialize>(args: &T) -> BTreeMap<String, Value> {
    match serde_json::to_value(args) {
        Ok(Value::Object(map)) => map.into_iter().collect(),
        _ => BTreeMap::new(),
    }
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    let result = match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes).and_then(|_| out.flush()).map_err(|e| e.to_string())
        }
    };
    result.map_err(CliError::Runtime)
}

/// Runs `cli`; `args` is the command line after the program name, kept for manifests.
pub fn run(cli: &Cli, args: &[String]) -> Result<(), CliError> {
    let (name, output, seed, params, emitted) = match &cli.command {
        Command::Optimize(a) => ("optimize", &a.output, None, parameters(a), optimize(a)),
        Command::Sweep(a) => ("sweep", &a.output, None, parameters(a), sweep(a)),
        Command::Simulate(a) => ("simulate", &a.output, Some(a.seed), parameters(a), simulate(a)),
        Command::Reconstruct(a) => {
            ("reconstruct", &a.output, Some(a.seed), parameters(a), reconstruct_cmd(a))
        }
        Command::Replay(a) => return replay(a, cli.threads),
    };
    let emitted = emitted?;
    write_output(output.as_deref(), &emitted.bytes)?;
    if let Some(path) = output {
        RunManifest::new(name, params, args.to_vec(), seed)
            .write(&manifest_path(path))
            .map_err(|e| CliError::Runtime(format!("{}: {e}", manifest_path(path).display())))?;
    }
    emitted.status
}

fn replay(a: &ReplayArgs, threads: Option<usize>) -> Result<(), CliError> {
    let m = RunManifest::read(&a.manifest)
        .map_err(|e| CliError::Validation(format!("{}: {e}", a.manifest.display())))?;
    let mut cli = Cli::try_parse_from(std::iter::once("meterlink".to_string()).chain(m.args.iter().cloned()))
        .map_err(|e| CliError::Validation(format!("{}: recorded arguments do not parse: {e}", a.manifest.display())))?;
    if threads.is_some() {
        cli.threads = threads;
    }
    let slot = match &mut cli.command {
        Command::Optimize(x) => &mut x.output,
        Command::Sweep(x) => &mut x.output,
        Command::Simulate(x) => &mut x.output,
        Command::Reconstruct(x) => &mut x.output,
        Command::Replay(_) => {
            return Err(CliError::Validation(format!("{}: a manifest cannot record a replay", a.manifest.display())))
        }
    };
    let mut args = m.args.clone();
    if let Some(out) = &a.output {
        *slot = Some(out.clone());
        args.extend(["--output".to_string(), out.display().to_string()]);
    }
    dispatch(&cli, &args)
}

/// Runs `cli` on its thread pool.
pub fn dispatch(cli: &Cli, args: &[String]) -> Result<(), CliError> {
    let pool = parallel::pool(cli.threads).map_err(|e| CliError::Runtime(e.to_string()))?;
    pool.install(|| run(cli, args))
}

/// Process entry point; returns the exit code.
pub fn main() -> i32 {
    let args: Vec<String> = std::env::args_os()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(&cli, &args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
