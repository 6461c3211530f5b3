//! Command-line front end for the amplified entanglement-distribution simulator.
//!
//! Exit codes: 0 on success, 2 for invalid configuration, 3 for numerical
//! failures (truncation overflow, degenerate herald, no crossover).

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand};

use nla_core::analysis::{
    distance_from_eta, find_crossover, monte_carlo_oracle, resolve_gain, run_sweep, tune_gain_for_fidelity,
    CrossoverSearch, SweepSpec, SweepVariable,
};
use nla_core::protocols::{run_protocol, Scheme};

use config::{parse_grid, resolve, Format, ParamArgs};
use output::{json_row, write_csv, TableRow};

pub const THREADS_ENV: &str = "NLA_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] nla_core::Error),
    #[error("degenerate herald: success probability {0:e}")]
    Degenerate(f64),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) if e.is_config_error() => 2,
            _ => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "nla-sim", version, about = "Heralded amplification for single-photon entanglement distribution")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one configuration.
    #[command(allow_negative_numbers = true)]
    Run(RunArgs),
    /// Evaluate a grid of transmissivities or distances.
    #[command(allow_negative_numbers = true)]
    Sweep(SweepArgs),
    /// Maximize the output fidelity over the ancilla setting.
    #[command(allow_negative_numbers = true)]
    Tune(TuneArgs),
    /// Find where the midpoint amplifier overtakes direct transmission.
    #[command(allow_negative_numbers = true)]
    Crossover(CrossoverArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Also run the trajectory sampler with this many shots.
    #[arg(long)]
    pub mc_shots: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum)]
    pub variable: Option<VariableArg>,
    /// `lo:hi:step` or a comma-separated list.
    #[arg(long)]
    pub grid: Option<String>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum VariableArg {
    Eta,
    #[value(name = "distance_km")]
    DistanceKm,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Args)]
pub struct CrossoverArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 0.0)]
    pub lo_km: f64,
    #[arg(long, default_value_t = 500.0)]
    pub hi_km: f64,
    #[arg(long, default_value_t = 5.0)]
    pub step_km: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol_km: f64,
}

/// Parses arguments, runs the command and writes its artifact.
///
/// Results go to `stdout` unless an output path is configured; diagnostics
/// go to `stderr`. Returns the process exit code.
pub fn execute<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<(), CliError> {
    let (text, out) = match command {
        Command::Run(a) => cmd_run(&a)?,
        Command::Sweep(a) => cmd_sweep(&a)?,
        Command::Tune(a) => cmd_tune(&a)?,
        Command::Crossover(a) => cmd_crossover(&a)?,
    };
    match out {
        Some(path) => std::fs::write(&path, text)?,
        None => stdout.write_all(&text)?,
    }
    Ok(())
}

type Artifact = (Vec<u8>, Option<String>);

fn render(rows: &[TableRow], format: Format, single: bool) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => write_csv(&mut buf, rows)?,
        Format::Json => {
            let value = if single {
                json_row(&rows[0])
            } else {
                serde_json::Value::Array(rows.iter().map(json_row).collect())
            };
            serde_json::to_writer_pretty(&mut buf, &value).map_err(|e| CliError::Config(e.to_string()))?;
            buf.push(b'\n');
        }
    }
    Ok(buf)
}

fn cmd_run(a: &RunArgs) -> Result<Artifact, CliError> {
    let cfg = resolve(&a.params, &[Scheme::Middle])?;
    if cfg.templates.len() != 1 {
        return Err(CliError::Config("scheme: run takes a single scheme".into()));
    }
    let template = &cfg.templates[0];
    let config = template.with_t(resolve_gain(template, cfg.gain_mode)?);
    let result = run_protocol(&config)?;
    if result.degenerate {
        return Err(CliError::Degenerate(result.p));
    }
    let row = TableRow::new(&config, distance_from_eta(config.eta, cfg.loss_db_per_km)?, Some(&result));
    let mut text = render(std::slice::from_ref(&row), cfg.format, true)?;
    if let Some(shots) = a.mc_shots {
        let mc = monte_carlo_oracle(&config, shots, a.seed)?;
        match cfg.format {
            Format::Json => {
                let mut v = json_row(&row);
                v["monte_carlo"] = serde_json::to_value(&mc).map_err(|e| CliError::Config(e.to_string()))?;
                text = serde_json::to_vec_pretty(&v).map_err(|e| CliError::Config(e.to_string()))?;
                text.push(b'\n');
            }
            Format::Csv => log::warn!("monte-carlo estimates are only emitted with --format json"),
        }
    }
    Ok((text, cfg.out))
}

fn configure_threads(requested: Option<usize>) -> Result<Option<rayon::ThreadPool>, CliError> {
    let n = match requested {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(s) => Some(
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Config(format!("{THREADS_ENV}: not a thread count: `{s}`")))?,
            ),
            Err(_) => None,
        },
    };
    match n {
        None => Ok(None),
        Some(0) => Err(CliError::Config("threads: must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(Some)
            .map_err(|e| CliError::Config(format!("threads: {e}"))),
    }
}

fn cmd_sweep(a: &SweepArgs) -> Result<Artifact, CliError> {
    let cfg = resolve(&a.params, &[Scheme::End, Scheme::Middle])?;
    let variable = match a.variable {
        Some(VariableArg::Eta) => SweepVariable::Eta,
        Some(VariableArg::DistanceKm) => SweepVariable::DistanceKm,
        None => cfg.variable.unwrap_or(SweepVariable::Eta),
    };
    let grid = match &a.grid {
        Some(s) => parse_grid(s)?,
        None => cfg
            .grid
            .clone()
            .ok_or_else(|| CliError::Config("grid: a sweep needs --grid or a grid in the config".into()))?,
    };
    let mut spec = SweepSpec::new(variable, grid, cfg.templates.clone(), cfg.gain_mode);
    spec.loss_db_per_km = cfg.loss_db_per_km;

    let rows = match configure_threads(cfg.threads)? {
        Some(pool) => pool.install(|| run_sweep(&spec))?,
        None => run_sweep(&spec)?,
    };
    for r in &rows {
        match &r.outcome {
            Err(e) => log::warn!("row {} eta={} failed: {e}", r.config.scheme, r.config.eta),
            Ok(res) if res.degenerate => log::warn!("row {} eta={} degenerate herald", r.config.scheme, r.config.eta),
            Ok(_) => {}
        }
    }
    let table: Vec<TableRow> = rows.iter().map(TableRow::from_sweep).collect();
    Ok((render(&table, cfg.format, false)?, cfg.out))
}

#[derive(serde::Serialize)]
struct TuneJson {
    t_star: f64,
    #[serde(rename = "F_star")]
    f_star: f64,
    iterations: usize,
}

fn cmd_tune(a: &TuneArgs) -> Result<Artifact, CliError> {
    let cfg = resolve(&a.params, &[Scheme::Middle])?;
    if cfg.templates.len() != 1 {
        return Err(CliError::Config("scheme: tune takes a single scheme".into()));
    }
    let template = &cfg.templates[0];
    let r = tune_gain_for_fidelity(template, template.scheme)?;
    let json = TuneJson {
        t_star: output::round12(r.t_star),
        f_star: output::round12(r.f_star),
        iterations: r.iterations,
    };
    let mut text = serde_json::to_vec_pretty(&json).map_err(|e| CliError::Config(e.to_string()))?;
    text.push(b'\n');
    Ok((text, cfg.out))
}

fn cmd_crossover(a: &CrossoverArgs) -> Result<Artifact, CliError> {
    let mut params = a.params.clone();
    params.scheme = vec!["middle".into(), "direct".into()];
    let cfg = resolve(&params, &[])?;
    let middle = cfg.template(Scheme::Middle).expect("middle template resolved");
    let direct = cfg.template(Scheme::Direct).expect("direct template resolved");
    let search = CrossoverSearch {
        lo_km: a.lo_km,
        hi_km: a.hi_km,
        step_km: a.step_km,
        tol_km: a.tol_km,
        loss_db_per_km: cfg.loss_db_per_km,
    };
    let report = find_crossover(middle, direct, cfg.gain_mode, &search)?;
    let mut text = serde_json::to_vec_pretty(&report).map_err(|e| CliError::Config(e.to_string()))?;
    text.push(b'\n');
    Ok((text, cfg.out))
}
