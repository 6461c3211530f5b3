use serde::Serialize;

use crate::error::{Error, Result};

pub const MIN_FIT_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitReport {
    /// Slope of `log p` against `log eta`.
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub range: (f64, f64),
    pub points: usize,
}

/// Least-squares power-law fit `p ~ eta^k` over `eta` in `[lo, hi]`.
pub fn fit_scaling_exponent(points: &[(f64, f64)], lo: f64, hi: f64) -> Result<FitReport> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(eta, p) in points.iter().filter(|(eta, _)| *eta >= lo && *eta <= hi) {
        if eta.is_nan() || eta <= 0.0 {
            return Err(Error::NonPositive(eta));
        }
        if p.is_nan() || p <= 0.0 {
            return Err(Error::NonPositive(p));
        }
        xs.push(eta.ln());
        ys.push(p.ln());
    }
    if xs.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientPoints {
            needed: MIN_FIT_POINTS,
            found: xs.len(),
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientPoints {
            needed: 2,
            found: 1,
        });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    Ok(FitReport {
        exponent: slope,
        intercept,
        r_squared,
        range: (lo, hi),
        points: xs.len(),
    })
}

/// `n` logarithmically spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
        .collect()
}
