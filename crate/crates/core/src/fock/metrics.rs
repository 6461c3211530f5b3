use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::state::{DensityOperator, PSD_TOL};
use crate::error::{Error, Result};

const NORMALIZATION_TOL: f64 = 1e-9;
const PURE_TOL: f64 = 1e-13;

/// Populations of the lowest total-photon-number sectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubspacePopulations {
    pub vacuum: f64,
    pub one: f64,
    pub two: f64,
}

pub fn subspace_populations(rho: &DensityOperator) -> SubspacePopulations {
    let basis = rho.basis();
    let mut pops = [0.0; 3];
    for x in 0..basis.dim() {
        let n = basis.total_photons(x);
        if n < 3 {
            pops[n] += rho.matrix()[(x, x)].re;
        }
    }
    SubspacePopulations {
        vacuum: pops[0],
        one: pops[1],
        two: pops[2],
    }
}

/// Uhlmann fidelity `[Tr sqrt(sqrt(rho) sigma sqrt(rho))]^2`.
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if !rho.basis().same_space(sigma.basis()) {
        return Err(Error::BasisMismatch("fidelity needs operators on one basis".into()));
    }
    for s in [rho, sigma] {
        let tr = s.trace();
        if (tr - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Unnormalized(tr));
        }
    }
    // a pure argument reduces the fidelity to an expectation value, which
    // avoids square roots of near-zero eigenvalues
    for (pure, other) in [(sigma, rho), (rho, sigma)] {
        if let Some(psi) = pure_vector(pure) {
            let f = (psi.adjoint() * other.matrix() * &psi)[(0, 0)].re;
            return Ok(f.clamp(0.0, 1.0));
        }
    }
    let root = psd_sqrt(rho.matrix());
    let inner = &root * sigma.matrix() * &root;
    let herm = (&inner + inner.adjoint()).map(|z| z * 0.5);
    let s: f64 = herm
        .symmetric_eigenvalues()
        .iter()
        .map(|&ev| clamp_eigenvalue(ev).sqrt())
        .sum();
    Ok((s * s).clamp(0.0, 1.0))
}

fn clamp_eigenvalue(ev: f64) -> f64 {
    if ev < 0.0 {
        if ev < -PSD_TOL {
            log::warn!("eigenvalue {ev:e} below PSD tolerance clamped to zero");
        }
        0.0
    } else {
        ev
    }
}

/// The state vector of a rank-one density operator, if it is one.
fn pure_vector(rho: &DensityOperator) -> Option<DMatrix<Complex64>> {
    if (rho.purity() - 1.0).abs() > PURE_TOL {
        return None;
    }
    let herm = (rho.matrix() + rho.matrix().adjoint()).map(|z| z * 0.5);
    let eig = herm.symmetric_eigen();
    let k = eig.eigenvalues.imax();
    Some(eig.eigenvectors.columns(k, 1).into_owned())
}

/// Principal square root of a Hermitian PSD matrix.
pub(crate) fn psd_sqrt(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let herm = (m + m.adjoint()).map(|z| z * 0.5);
    let eig = herm.symmetric_eigen();
    let roots = eig.eigenvalues.map(|ev| Complex64::new(clamp_eigenvalue(ev).sqrt(), 0.0));
    let v = &eig.eigenvectors;
    v * DMatrix::from_diagonal(&roots) * v.adjoint()
}

/// Projects onto the sector with exactly `photons` photons in total.
pub fn project_sector(rho: &DensityOperator, photons: usize) -> DensityOperator {
    let basis = rho.basis();
    let mut m = rho.matrix().clone();
    for x in 0..basis.dim() {
        for y in 0..basis.dim() {
            if basis.total_photons(x) != photons || basis.total_photons(y) != photons {
                m[(x, y)] = Complex64::new(0.0, 0.0);
            }
        }
    }
    DensityOperator::from_matrix_unchecked(rho.basis_arc().clone(), m)
}

/// The purity expected for `P0 |00><00| + P1 |psi1><psi1|` with `X = P1/P0`.
pub fn purity_from_ratio(x: f64) -> f64 {
    if x.is_infinite() {
        return 1.0;
    }
    (1.0 + x * x) / ((1.0 + x) * (1.0 + x))
}
