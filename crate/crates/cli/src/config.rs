//! Config file and flag resolution.
//!
//! Precedence: preset defaults, then the JSON config file, then flags.

use std::path::Path;
use std::str::FromStr;

use clap::Args;
use serde::Deserialize;

use nla_core::analysis::{GainMode, SweepVariable, FIBRE_LOSS_DB_PER_KM};
use nla_core::devices::{DetectorModel, HeraldPolicy, SourceModel};
use nla_core::protocols::{ProtocolConfig, Scheme, TargetState};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    #[default]
    Ideal,
    /// Fitted experimental source and detector efficiencies.
    Fitted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum TMode {
    Optimal,
    Tuned,
    Fixed,
}

/// Everything a config file may contain. Every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub preset: Option<Preset>,
    pub scheme: Option<SchemeList>,
    pub tau: Option<f64>,
    pub t: Option<f64>,
    pub eta: Option<f64>,
    pub eps1: Option<f64>,
    pub eps2: Option<f64>,
    pub delta1: Option<f64>,
    pub delta2: Option<f64>,
    pub dark_prob: Option<f64>,
    pub pnr: Option<bool>,
    pub herald_policy: Option<HeraldPolicy>,
    pub cutoff: Option<usize>,
    pub target: Option<TargetState>,
    pub direct_fidelity: Option<f64>,
    pub visibility: Option<f64>,
    pub channel_segments: Option<u32>,
    pub count_output_detection: Option<bool>,
    pub variable: Option<SweepVariable>,
    pub grid: Option<Vec<f64>>,
    pub t_mode: Option<TMode>,
    pub loss_db_per_km: Option<f64>,
    pub format: Option<Format>,
    pub out: Option<String>,
    pub threads: Option<usize>,
}

/// One scheme or several, as `"middle"` or `["end", "middle"]`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SchemeList {
    One(Scheme),
    Many(Vec<Scheme>),
}

impl SchemeList {
    fn into_vec(self) -> Vec<Scheme> {
        match self {
            SchemeList::One(s) => vec![s],
            SchemeList::Many(v) => v,
        }
    }
}

/// Parameter flags shared by all subcommands.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// JSON config file.
    #[arg(long)]
    pub config: Option<String>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Scheme name; comma-separated or repeated for sweeps.
    #[arg(long, value_delimiter = ',')]
    pub scheme: Vec<String>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub eps1: Option<f64>,
    #[arg(long)]
    pub eps2: Option<f64>,
    #[arg(long)]
    pub delta1: Option<f64>,
    #[arg(long)]
    pub delta2: Option<f64>,
    #[arg(long)]
    pub dark_prob: Option<f64>,
    #[arg(long)]
    pub pnr: Option<bool>,
    #[arg(long)]
    pub herald_policy: Option<String>,
    #[arg(long)]
    pub cutoff: Option<usize>,
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub direct_fidelity: Option<f64>,
    #[arg(long)]
    pub visibility: Option<f64>,
    #[arg(long)]
    pub channel_segments: Option<u32>,
    #[arg(long)]
    pub count_output_detection: Option<bool>,
    #[arg(long, value_enum)]
    pub t_mode: Option<TMode>,
    #[arg(long)]
    pub loss_db_per_km: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<String>,
    /// Worker threads for sweeps (overrides NLA_THREADS).
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Fully resolved settings.
#[derive(Debug, Clone)]
pub struct CliConfig {
    pub schemes: Vec<Scheme>,
    pub templates: Vec<ProtocolConfig>,
    pub gain_mode: GainMode,
    pub variable: Option<SweepVariable>,
    pub grid: Option<Vec<f64>>,
    pub loss_db_per_km: f64,
    pub format: Format,
    pub out: Option<String>,
    pub threads: Option<usize>,
}

impl CliConfig {
    pub fn template(&self, scheme: Scheme) -> Option<&ProtocolConfig> {
        self.templates.iter().find(|c| c.scheme == scheme)
    }
}

pub fn read_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("config: cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("config: {e}")))
}

fn parse_named<T: FromStr<Err = String>>(key: &str, s: &str) -> Result<T, CliError> {
    s.parse().map_err(|e| CliError::Config(format!("{key}: {e}")))
}

fn parse_target(s: &str) -> Result<TargetState, CliError> {
    match s {
        "input" => Ok(TargetState::Input),
        "maximally_entangled" | "D" => Ok(TargetState::MaximallyEntangled),
        other => Err(CliError::Config(format!(
            "target: unknown target `{other}` (expected input or maximally_entangled)"
        ))),
    }
}

/// Merges preset, file and flags. `default_schemes` applies when neither
/// the file nor the flags name a scheme.
pub fn resolve(args: &ParamArgs, default_schemes: &[Scheme]) -> Result<CliConfig, CliError> {
    let file = match &args.config {
        Some(p) => read_file(Path::new(p))?,
        None => FileConfig::default(),
    };

    let mut schemes = Vec::new();
    for s in &args.scheme {
        schemes.push(parse_named::<Scheme>("scheme", s)?);
    }
    if schemes.is_empty() {
        schemes = file.scheme.clone().map(SchemeList::into_vec).unwrap_or_default();
    }
    if schemes.is_empty() {
        schemes = default_schemes.to_vec();
    }

    let preset = args.preset.or(file.preset).unwrap_or_default();
    let tau = args.tau.or(file.tau).unwrap_or(0.5);
    let t = args.t.or(file.t);
    let eta = args.eta.or(file.eta).unwrap_or(1.0);
    let herald_policy = match &args.herald_policy {
        Some(s) => parse_named::<HeraldPolicy>("herald_policy", s)?,
        None => file.herald_policy.unwrap_or_default(),
    };
    let target = match &args.target {
        Some(s) => parse_target(s)?,
        None => file.target.unwrap_or_default(),
    };

    let mut templates = Vec::with_capacity(schemes.len());
    for &scheme in &schemes {
        let mut c = match preset {
            Preset::Ideal => ProtocolConfig::ideal(scheme, tau, t.unwrap_or(0.5), eta),
            Preset::Fitted => ProtocolConfig::fitted(scheme, tau, t.unwrap_or(0.5), eta),
        };
        if let Some(e) = args.eps1.or(file.eps1) {
            c.source_alice = SourceModel { efficiency: e };
        }
        if let Some(e) = args.eps2.or(file.eps2) {
            c.source_bob = SourceModel { efficiency: e };
        }
        let pnr = args.pnr.or(file.pnr).unwrap_or(c.herald_detectors[0].pnr);
        let delta1 = args.delta1.or(file.delta1).unwrap_or(c.herald_detectors[0].efficiency);
        let dark = args.dark_prob.or(file.dark_prob).unwrap_or(c.herald_detectors[0].dark_click_prob);
        c.herald_detectors = [DetectorModel {
            efficiency: delta1,
            dark_click_prob: dark,
            pnr,
        }; 2];
        if let Some(d2) = args.delta2.or(file.delta2) {
            for d in c.char_detectors.iter_mut() {
                d.efficiency = d2;
            }
        }
        c.herald_policy = herald_policy;
        c.target = target;
        if let Some(v) = args.cutoff.or(file.cutoff) {
            c.cutoff = v;
        }
        if let Some(v) = args.direct_fidelity.or(file.direct_fidelity) {
            c.direct_fidelity = v;
        }
        if let Some(v) = args.visibility.or(file.visibility) {
            c.visibility = v;
        }
        if let Some(v) = args.channel_segments.or(file.channel_segments) {
            c.channel_segments = v;
        }
        if let Some(v) = args.count_output_detection.or(file.count_output_detection) {
            c.count_output_detection = v;
        }
        c.validate().map_err(CliError::Core)?;
        templates.push(c);
    }

    let t_mode = args.t_mode.or(file.t_mode).unwrap_or(if t.is_some() {
        TMode::Fixed
    } else {
        TMode::Optimal
    });
    let gain_mode = match t_mode {
        TMode::Optimal => GainMode::Optimal,
        TMode::Tuned => GainMode::Tuned,
        TMode::Fixed => GainMode::Fixed(t.ok_or_else(|| CliError::Config("t: t_mode fixed needs a value for t".into()))?),
    };

    Ok(CliConfig {
        schemes,
        templates,
        gain_mode,
        variable: file.variable,
        grid: file.grid,
        loss_db_per_km: args.loss_db_per_km.or(file.loss_db_per_km).unwrap_or(FIBRE_LOSS_DB_PER_KM),
        format: args.format.or(file.format).unwrap_or_default(),
        out: args.out.clone().or(file.out),
        threads: args.threads.or(file.threads),
    })
}

/// Parses `lo:hi:step` (inclusive of `hi` when it lands on the grid) or a
/// comma-separated list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |msg: &str| CliError::Config(format!("grid: {msg} in `{spec}`"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected lo:hi:step"));
        }
        let (lo, hi, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if step.is_nan() || step <= 0.0 || hi < lo {
            return Err(bad("need step > 0 and hi >= lo"));
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        // lo + k*step rather than accumulation keeps the values exact-ish
        Ok((0..=n).map(|k| lo + k as f64 * step).collect())
    } else {
        spec.split(',').map(num).collect()
    }
}
