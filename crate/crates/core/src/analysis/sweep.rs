use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::distance::{distance_from_eta, eta_from_distance, FIBRE_LOSS_DB_PER_KM};
use super::gain::{optimal_gain_setting, tune_gain_for_fidelity};
use crate::error::{Error, Result};
use crate::protocols::{run_protocol, ProtocolConfig, RunResult, Scheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    Eta,
    DistanceKm,
}

/// How the ancilla setting is chosen at each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainMode {
    Optimal,
    Tuned,
    Fixed(f64),
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    /// One template per scheme to evaluate; the template's `scheme` is used.
    pub templates: Vec<ProtocolConfig>,
    pub gain_mode: GainMode,
    pub loss_db_per_km: f64,
}

impl SweepSpec {
    pub fn new(variable: SweepVariable, grid: Vec<f64>, templates: Vec<ProtocolConfig>, gain_mode: GainMode) -> Self {
        Self {
            variable,
            grid,
            templates,
            gain_mode,
            loss_db_per_km: FIBRE_LOSS_DB_PER_KM,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::InvalidGrid("grid is empty".into()));
        }
        if self.templates.is_empty() {
            return Err(Error::InvalidGrid("no scheme to evaluate".into()));
        }
        if self.grid.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
            return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
        }
        for &g in &self.grid {
            self.eta_at(g)?;
        }
        Ok(())
    }

    fn eta_at(&self, value: f64) -> Result<f64> {
        match self.variable {
            SweepVariable::Eta => {
                if !(value > 0.0 && value <= 1.0) {
                    return Err(Error::InvalidParameter {
                        key: "eta",
                        value,
                        reason: "grid values must lie in (0, 1]",
                    });
                }
                Ok(value)
            }
            SweepVariable::DistanceKm => eta_from_distance(value, self.loss_db_per_km),
        }
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub config: ProtocolConfig,
    pub distance_km: f64,
    pub outcome: std::result::Result<RunResult, Error>,
}

impl SweepRow {
    pub fn result(&self) -> Option<&RunResult> {
        self.outcome.as_ref().ok()
    }
}

/// Chooses `t` for one configuration according to the gain mode.
pub fn resolve_gain(config: &ProtocolConfig, mode: GainMode) -> Result<f64> {
    if config.scheme == Scheme::Direct {
        return Ok(config.t);
    }
    match mode {
        GainMode::Fixed(t) => Ok(t),
        GainMode::Optimal => optimal_gain_setting(config.scheme, config.tau, config.eta),
        GainMode::Tuned => Ok(tune_gain_for_fidelity(config, config.scheme)?.t_star),
    }
}

pub fn evaluate_point(config: &ProtocolConfig, mode: GainMode) -> Result<RunResult> {
    let t = resolve_gain(config, mode)?;
    run_protocol(&config.with_t(t))
}

/// Evaluates every grid point for every template, in parallel.
///
/// Rows come back ordered by template, then grid value; each row depends
/// only on its own configuration so the output is independent of scheduling.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let mut jobs = Vec::with_capacity(spec.grid.len() * spec.templates.len());
    for template in &spec.templates {
        for &g in &spec.grid {
            let eta = spec.eta_at(g)?;
            let distance_km = match spec.variable {
                SweepVariable::DistanceKm => g,
                SweepVariable::Eta => distance_from_eta(eta, spec.loss_db_per_km)?,
            };
            jobs.push((template.with_eta(eta), distance_km));
        }
    }
    let rows = jobs
        .into_par_iter()
        .map(|(config, distance_km)| {
            let outcome = evaluate_point(&config, spec.gain_mode);
            let config = match &outcome {
                Ok(r) => r.t_used.map_or(config.clone(), |t| config.with_t(t)),
                Err(_) => config,
            };
            SweepRow {
                config,
                distance_km,
                outcome,
            }
        })
        .collect();
    Ok(rows)
}
