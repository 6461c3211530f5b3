use serde::Serialize;

use super::distance::eta_from_distance;
use super::sweep::{evaluate_point, GainMode};
use crate::error::{Error, Result};
use crate::protocols::{ProtocolConfig, Scheme};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossoverSearch {
    pub lo_km: f64,
    pub hi_km: f64,
    /// Coarse scan step used to bracket the first sign change.
    pub step_km: f64,
    pub tol_km: f64,
    pub loss_db_per_km: f64,
}

impl Default for CrossoverSearch {
    fn default() -> Self {
        Self {
            lo_km: 0.0,
            hi_km: 500.0,
            step_km: 5.0,
            tol_km: 1e-6,
            loss_db_per_km: super::distance::FIBRE_LOSS_DB_PER_KM,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossoverReport {
    pub distance_km: f64,
    pub eta: f64,
    pub p_middle: f64,
    pub p_direct: f64,
    /// Bracket from the coarse scan: direct wins at the lower end, the
    /// midpoint amplifier at the upper end.
    pub bracket_km: (f64, f64),
    pub p_middle_at_bracket: (f64, f64),
    pub p_direct_at_bracket: (f64, f64),
    pub bisection_steps: usize,
}

/// Finds the first distance where the midpoint amplifier's herald
/// probability exceeds the direct-transmission probability.
pub fn find_crossover(
    middle: &ProtocolConfig,
    direct: &ProtocolConfig,
    gain_mode: GainMode,
    search: &CrossoverSearch,
) -> Result<CrossoverReport> {
    if middle.scheme != Scheme::Middle || direct.scheme != Scheme::Direct {
        return Err(Error::InvalidGrid("crossover compares a middle and a direct configuration".into()));
    }
    if !(search.step_km > 0.0 && search.hi_km > search.lo_km && search.lo_km >= 0.0) {
        return Err(Error::InvalidGrid("crossover search range is empty".into()));
    }
    let probs = |km: f64| -> Result<(f64, f64)> {
        let eta = eta_from_distance(km, search.loss_db_per_km)?;
        let pm = evaluate_point(&middle.with_eta(eta), gain_mode)?.p;
        let pd = evaluate_point(&direct.with_eta(eta), gain_mode)?.p;
        Ok((pm, pd))
    };

    let mut lo = search.lo_km;
    let mut at_lo = probs(lo)?;
    if at_lo.0 > at_lo.1 {
        // midpoint already ahead at the start of the range
        return Err(Error::NoCrossover {
            lo: search.lo_km,
            hi: search.hi_km,
        });
    }
    let mut bracket = None;
    while lo < search.hi_km {
        let hi = (lo + search.step_km).min(search.hi_km);
        let at_hi = probs(hi)?;
        if at_hi.0 > at_hi.1 {
            bracket = Some((lo, hi, at_lo, at_hi));
            break;
        }
        lo = hi;
        at_lo = at_hi;
    }
    let (b_lo, b_hi, p_lo, p_hi) = bracket.ok_or(Error::NoCrossover {
        lo: search.lo_km,
        hi: search.hi_km,
    })?;

    let (mut a, mut b) = (b_lo, b_hi);
    let mut steps = 0;
    while b - a > search.tol_km {
        let mid = 0.5 * (a + b);
        let (pm, pd) = probs(mid)?;
        if pm > pd {
            b = mid;
        } else {
            a = mid;
        }
        steps += 1;
    }
    let distance_km = b;
    let (pm, pd) = probs(distance_km)?;
    Ok(CrossoverReport {
        distance_km,
        eta: eta_from_distance(distance_km, search.loss_db_per_km)?,
        p_middle: pm,
        p_direct: pd,
        bracket_km: (b_lo, b_hi),
        p_middle_at_bracket: (p_lo.0, p_hi.0),
        p_direct_at_bracket: (p_lo.1, p_hi.1),
        bisection_steps: steps,
    })
}
