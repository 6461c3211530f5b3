use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::basis::{FockBasis, MAX_MODES};
use super::channel::{beam_splitter_unitary, phase_unitary, KrausChannel};
use super::povm::PovmElement;
use super::state::{DensityOperator, PSD_TOL, TRUNCATION_TOL};
use crate::error::{Error, Result};

/// `a (x) b` re-truncated to the shared total-photon cutoff.
///
/// Fails when more than [`TRUNCATION_TOL`] of the trace is dropped.
pub fn tensor_product(a: &DensityOperator, b: &DensityOperator) -> Result<DensityOperator> {
    tensor_product_with_tolerance(a, b, TRUNCATION_TOL).map(|(rho, _)| rho)
}

/// As [`tensor_product`], also returning the discarded trace mass.
pub fn tensor_product_with_tolerance(
    a: &DensityOperator,
    b: &DensityOperator,
    tolerance: f64,
) -> Result<(DensityOperator, f64)> {
    let (ba, bb) = (a.basis(), b.basis());
    if ba.cutoff() != bb.cutoff() {
        return Err(Error::BasisMismatch(format!(
            "photon cutoffs differ ({} vs {})",
            ba.cutoff(),
            bb.cutoff()
        )));
    }
    let modes = ba.num_modes() + bb.num_modes();
    if modes > MAX_MODES {
        return Err(Error::TooManyModes(modes));
    }
    let basis = Arc::new(FockBasis::new(modes, ba.cutoff())?);
    let d = basis.dim();

    // Map each (index in a, index in b) to the combined index, when retained.
    let combined: Vec<Vec<Option<usize>>> = (0..ba.dim())
        .map(|x| {
            (0..bb.dim())
                .map(|y| {
                    let mut occ = ba.occupation(x).to_vec();
                    occ.extend_from_slice(bb.occupation(y));
                    basis.index_of(&occ)
                })
                .collect()
        })
        .collect();

    let mut m = DMatrix::<Complex64>::zeros(d, d);
    let (ma, mb) = (a.matrix(), b.matrix());
    for xa in 0..ba.dim() {
        for ya in 0..ba.dim() {
            let va = ma[(xa, ya)];
            if va == Complex64::new(0.0, 0.0) {
                continue;
            }
            for xb in 0..bb.dim() {
                let Some(row) = combined[xa][xb] else { continue };
                for yb in 0..bb.dim() {
                    if let Some(col) = combined[ya][yb] {
                        m[(row, col)] = va * mb[(xb, yb)];
                    }
                }
            }
        }
    }
    let rho = DensityOperator::from_matrix_unchecked(basis, m);
    let discarded = (a.trace() * b.trace() - rho.trace()).max(0.0);
    if discarded > tolerance {
        return Err(Error::TruncationOverflow {
            discarded,
            tolerance,
        });
    }
    if discarded > 0.0 {
        log::debug!("tensor product truncated {discarded:e} of the trace");
    }
    Ok((rho, discarded))
}

pub fn apply_beam_splitter(rho: &DensityOperator, modes: (usize, usize), t: f64) -> Result<DensityOperator> {
    let u = beam_splitter_unitary(rho.basis(), modes.0, modes.1, t)?;
    Ok(rho.conjugate_by(&u))
}

pub fn apply_loss(rho: &DensityOperator, mode: usize, eta: f64) -> Result<DensityOperator> {
    KrausChannel::loss(rho.basis_arc().clone(), mode, eta)?.apply(rho)
}

/// Phase shift `exp(i phi n)` on one mode; `phi = pi` is the feed-forward flip.
pub fn apply_phase(rho: &DensityOperator, mode: usize, phi: f64) -> Result<DensityOperator> {
    let u = phase_unitary(rho.basis(), mode, phi)?;
    Ok(rho.conjugate_by(&u))
}

/// Measures `mode` with one POVM element and traces the mode out.
///
/// The returned state is unnormalized; its trace equals the probability.
pub fn measure_povm(
    rho: &DensityOperator,
    mode: usize,
    element: &PovmElement,
) -> Result<(f64, DensityOperator)> {
    let basis = rho.basis();
    basis.check_mode(mode)?;
    if element.local_dim() != basis.cutoff() + 1 {
        return Err(Error::BasisMismatch(format!(
            "POVM element has local dimension {}, mode needs {}",
            element.local_dim(),
            basis.cutoff() + 1
        )));
    }
    let pi = &element.matrix;
    // Tr_i[(Pi (x) I) rho]_{r,s} = sum Pi[n_y, n_x] rho[x, y]
    let out = reduce(rho, &[mode], |xo, yo| pi[(yo[0] as usize, xo[0] as usize)])?;
    let p = out.trace();
    if p < -PSD_TOL {
        return Err(Error::NegativeProbability(p));
    }
    Ok((p.max(0.0), out))
}

/// Measures several modes jointly with an element diagonal in photon number
/// whose weight depends only on the total count across those modes.
///
/// `weights[n]` is the weight for `n` photons in total; missing entries are zero.
pub fn measure_total_count(
    rho: &DensityOperator,
    modes: &[usize],
    weights: &[f64],
) -> Result<(f64, DensityOperator)> {
    for &m in modes {
        rho.basis().check_mode(m)?;
    }
    let out = reduce(rho, modes, |xo, yo| {
        if xo != yo {
            return Complex64::new(0.0, 0.0);
        }
        let n: usize = xo.iter().map(|&k| k as usize).sum();
        Complex64::new(weights.get(n).copied().unwrap_or(0.0), 0.0)
    })?;
    let p = out.trace();
    if p < -PSD_TOL {
        return Err(Error::NegativeProbability(p));
    }
    Ok((p.max(0.0), out))
}

pub fn partial_trace(rho: &DensityOperator, modes_to_remove: &[usize]) -> Result<DensityOperator> {
    if modes_to_remove.is_empty() {
        return Ok(rho.clone());
    }
    for &m in modes_to_remove {
        rho.basis().check_mode(m)?;
    }
    reduce(rho, modes_to_remove, |xo, yo| {
        if xo == yo {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Generic reduction: sums `weight(removed_x, removed_y) * rho[x, y]` into
/// the entry indexed by the kept occupations of `x` and `y`.
fn reduce<F>(rho: &DensityOperator, removed: &[usize], weight: F) -> Result<DensityOperator>
where
    F: Fn(&[u8], &[u8]) -> Complex64,
{
    let basis = rho.basis();
    let mut removed: Vec<usize> = removed.to_vec();
    removed.sort_unstable();
    removed.dedup();
    let kept: Vec<usize> = (0..basis.num_modes()).filter(|m| !removed.contains(m)).collect();
    if kept.is_empty() {
        return Err(Error::NoModesLeft);
    }
    let reduced = Arc::new(FockBasis::new(kept.len(), basis.cutoff())?);

    let split: Vec<(usize, Vec<u8>)> = (0..basis.dim())
        .map(|x| {
            let occ = basis.occupation(x);
            let k: Vec<u8> = kept.iter().map(|&m| occ[m]).collect();
            let r: Vec<u8> = removed.iter().map(|&m| occ[m]).collect();
            (reduced.index_of(&k).expect("kept occupations respect the cutoff"), r)
        })
        .collect();

    let d = reduced.dim();
    let mut out = DMatrix::<Complex64>::zeros(d, d);
    let m = rho.matrix();
    for (x, (kx, rx)) in split.iter().enumerate() {
        for (y, (ky, ry)) in split.iter().enumerate() {
            let v = m[(x, y)];
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            let w = weight(rx, ry);
            if w != Complex64::new(0.0, 0.0) {
                out[(*kx, *ky)] += w * v;
            }
        }
    }
    Ok(DensityOperator::from_matrix_unchecked(reduced, out))
}

/// Reorders modes; `order[k]` names the old mode that becomes mode `k`.
pub fn permute_modes(rho: &DensityOperator, order: &[usize]) -> Result<DensityOperator> {
    let basis = rho.basis();
    let n = basis.num_modes();
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(Error::BasisMismatch("permutation length differs from mode count".into()));
    }
    for &o in order {
        basis.check_mode(o)?;
        if std::mem::replace(&mut seen[o], true) {
            return Err(Error::BasisMismatch("permutation repeats a mode".into()));
        }
    }
    let target = Arc::new(FockBasis::new(n, basis.cutoff())?);
    let map: Vec<usize> = (0..basis.dim())
        .map(|x| {
            let occ = basis.occupation(x);
            let new: Vec<u8> = order.iter().map(|&o| occ[o]).collect();
            target.index_of(&new).expect("permutation preserves totals")
        })
        .collect();
    let d = basis.dim();
    let mut out = DMatrix::<Complex64>::zeros(d, d);
    for x in 0..d {
        for y in 0..d {
            out[(map[x], map[y])] = rho.matrix()[(x, y)];
        }
    }
    Ok(DensityOperator::from_matrix_unchecked(target, out))
}
