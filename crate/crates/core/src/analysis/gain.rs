use serde::Serialize;

use crate::error::{check_open_unit, Error, Result};
use crate::protocols::{run_protocol, ProtocolConfig, Scheme};

/// Search interval for the tuner.
pub const TUNE_BRACKET: (f64, f64) = (0.001, 0.999);
/// Absolute tolerance on `t` for the golden-section search.
pub const TUNE_TOL: f64 = 1e-4;

const FALLBACK_GRID: usize = 200;
const BRACKET_PROBES: usize = 9;

/// Ancilla transmissivity that restores Alice's amplitude ratio.
///
/// End: `tau / (eta + tau - tau eta)`; middle: `tau`.
pub fn optimal_gain_setting(scheme: Scheme, tau: f64, eta: f64) -> Result<f64> {
    check_open_unit("tau", tau)?;
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidParameter {
            key: "eta",
            value: eta,
            reason: "must lie in (0, 1]",
        });
    }
    match scheme {
        Scheme::End => Ok(tau / (eta + tau - tau * eta)),
        Scheme::Middle => Ok(tau),
        Scheme::Direct => Err(Error::NoGainSetting),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TuneResult {
    pub t_star: f64,
    #[serde(rename = "F_star")]
    pub f_star: f64,
    /// Number of fidelity evaluations.
    pub iterations: usize,
    /// Set when the bracket test failed and the grid scan was used.
    pub fallback: bool,
}

/// Maximizes the one-photon-sector fidelity over `t` with every other
/// parameter of `template` held fixed.
pub fn tune_gain_for_fidelity(template: &ProtocolConfig, scheme: Scheme) -> Result<TuneResult> {
    if scheme == Scheme::Direct {
        return Err(Error::NoGainSetting);
    }
    let base = template.with_scheme(scheme);
    base.with_t(0.5).validate()?;
    let mut evals = 0usize;
    let mut objective = |t: f64| -> Result<f64> {
        evals += 1;
        let r = run_protocol(&base.with_t(t))?;
        Ok(if r.degenerate { 0.0 } else { r.fidelity })
    };

    let (lo, hi) = TUNE_BRACKET;
    let f_lo = objective(lo)?;
    let f_hi = objective(hi)?;
    let mut best_probe = f64::NEG_INFINITY;
    for k in 1..=BRACKET_PROBES {
        let t = lo + (hi - lo) * k as f64 / (BRACKET_PROBES + 1) as f64;
        best_probe = best_probe.max(objective(t)?);
    }

    let (mut t_star, mut f_star, fallback) = if f_lo > best_probe || f_hi > best_probe {
        log::warn!("fidelity is not unimodal on the tuning bracket; falling back to a grid scan");
        let mut best = (lo, f_lo);
        for k in 1..FALLBACK_GRID {
            let t = lo + (hi - lo) * k as f64 / FALLBACK_GRID as f64;
            let f = objective(t)?;
            if f > best.1 {
                best = (t, f);
            }
        }
        let step = (hi - lo) / FALLBACK_GRID as f64;
        let a = (best.0 - step).max(lo);
        let b = (best.0 + step).min(hi);
        let (t, f) = golden_section_max(&mut objective, a, b, TUNE_TOL)?;
        if f >= best.1 {
            (t, f, true)
        } else {
            (best.0, best.1, true)
        }
    } else {
        let (t, f) = golden_section_max(&mut objective, lo, hi, TUNE_TOL)?;
        (t, f, false)
    };

    // keep the analytic setting when the search lands on a worse point
    if let Ok(t_opt) = optimal_gain_setting(scheme, base.tau, base.eta) {
        if (lo..=hi).contains(&t_opt) {
            let f_opt = objective(t_opt)?;
            if f_opt > f_star {
                t_star = t_opt;
                f_star = f_opt;
            }
        }
    }
    Ok(TuneResult {
        t_star,
        f_star,
        iterations: evals,
        fallback,
    })
}

/// Golden-section search for the maximum of `f` on `[a, b]`.
pub fn golden_section_max<F>(f: &mut F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while (b - a).abs() > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}
