use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::basis::FockBasis;
use super::state::DensityOperator;
use crate::error::{check_unit, Error, Result};

/// Completely positive map given by its Kraus operators.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    basis: Arc<FockBasis>,
    operators: Vec<DMatrix<Complex64>>,
}

impl KrausChannel {
    pub fn new(basis: Arc<FockBasis>, operators: Vec<DMatrix<Complex64>>) -> Result<Self> {
        let d = basis.dim();
        if operators.is_empty() {
            return Err(Error::BasisMismatch("a channel needs at least one Kraus operator".into()));
        }
        if operators.iter().any(|k| k.nrows() != d || k.ncols() != d) {
            return Err(Error::BasisMismatch("Kraus operator shape differs from basis".into()));
        }
        Ok(Self { basis, operators })
    }

    pub fn operators(&self) -> &[DMatrix<Complex64>] {
        &self.operators
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    /// Frobenius norm of `sum K^dagger K - I`.
    pub fn completeness_defect(&self) -> f64 {
        let d = self.basis.dim();
        let mut acc = DMatrix::<Complex64>::zeros(d, d);
        for k in &self.operators {
            acc += k.adjoint() * k;
        }
        (acc - DMatrix::identity(d, d)).norm()
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if !rho.basis().same_space(&self.basis) {
            return Err(Error::BasisMismatch("channel and state live on different bases".into()));
        }
        let d = self.basis.dim();
        let mut out = DMatrix::<Complex64>::zeros(d, d);
        for k in &self.operators {
            out += k * rho.matrix() * k.adjoint();
        }
        Ok(DensityOperator::from_matrix_unchecked(rho.basis_arc().clone(), out))
    }

    /// Single-operator channel for a unitary.
    pub fn unitary(basis: Arc<FockBasis>, u: DMatrix<Complex64>) -> Result<Self> {
        Self::new(basis, vec![u])
    }

    /// Pure-loss (amplitude damping) channel on `mode` with transmissivity `eta`.
    ///
    /// `K_k |n> = sqrt(C(n,k) eta^(n-k) (1-eta)^k) |n-k>` on the lossy mode.
    pub fn loss(basis: Arc<FockBasis>, mode: usize, eta: f64) -> Result<Self> {
        check_unit("eta", eta)?;
        basis.check_mode(mode)?;
        let d = basis.dim();
        let mut ops = Vec::with_capacity(basis.cutoff() + 1);
        for k in 0..=basis.cutoff() {
            let mut op = DMatrix::<Complex64>::zeros(d, d);
            for x in 0..d {
                let occ = basis.occupation(x);
                let n = occ[mode] as usize;
                if n < k {
                    continue;
                }
                let mut target = occ.to_vec();
                target[mode] = (n - k) as u8;
                let y = basis.index_of(&target).expect("photon removal stays in basis");
                let amp = (binomial(n, k) * eta.powi((n - k) as i32) * (1.0 - eta).powi(k as i32)).sqrt();
                op[(y, x)] = Complex64::new(amp, 0.0);
            }
            ops.push(op);
        }
        Self::new(basis, ops)
    }
}

/// Two-mode beam-splitter unitary with transmissivity `t`.
///
/// Convention: `a_i^dag -> sqrt(t) a_i^dag + sqrt(1-t) a_j^dag` and
/// `a_j^dag -> sqrt(t) a_j^dag - sqrt(1-t) a_i^dag`. The map is block
/// diagonal in total photon number, so it is exact on the truncated basis.
pub fn beam_splitter_unitary(basis: &FockBasis, i: usize, j: usize, t: f64) -> Result<DMatrix<Complex64>> {
    check_unit("t", t)?;
    basis.check_mode(i)?;
    basis.check_mode(j)?;
    if i == j {
        return Err(Error::InvalidMode {
            mode: j,
            num_modes: basis.num_modes(),
        });
    }
    let st = t.sqrt();
    let r = (1.0 - t).sqrt();
    let d = basis.dim();
    let mut u = DMatrix::<Complex64>::zeros(d, d);
    for x in 0..d {
        let occ = basis.occupation(x);
        let (ni, nj) = (occ[i] as usize, occ[j] as usize);
        let norm_in = (factorial(ni) * factorial(nj)).sqrt();
        for k in 0..=ni {
            for l in 0..=nj {
                // (st a_i + r a_j)^ni expanded picks a_i^k a_j^(ni-k);
                // (st a_j - r a_i)^nj picks a_j^l a_i^(nj-l).
                let sign = if (nj - l) % 2 == 1 { -1.0 } else { 1.0 };
                let coeff = binomial(ni, k)
                    * binomial(nj, l)
                    * st.powi((k + l) as i32)
                    * r.powi((ni - k + nj - l) as i32)
                    * sign;
                if coeff == 0.0 {
                    continue;
                }
                let mi = k + nj - l;
                let mj = ni - k + l;
                let mut target = occ.to_vec();
                target[i] = mi as u8;
                target[j] = mj as u8;
                let y = basis.index_of(&target).expect("photon number is conserved");
                let amp = coeff * (factorial(mi) * factorial(mj)).sqrt() / norm_in;
                u[(y, x)] += Complex64::new(amp, 0.0);
            }
        }
    }
    Ok(u)
}

/// Diagonal phase `exp(i phi n)` on one mode.
pub fn phase_unitary(basis: &FockBasis, mode: usize, phi: f64) -> Result<DMatrix<Complex64>> {
    basis.check_mode(mode)?;
    let d = basis.dim();
    let mut u = DMatrix::<Complex64>::zeros(d, d);
    for x in 0..d {
        let n = basis.occupation(x)[mode] as f64;
        u[(x, x)] = Complex64::from_polar(1.0, phi * n);
    }
    Ok(u)
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for m in 0..k {
        acc = acc * (n - m) as f64 / (m + 1) as f64;
    }
    acc
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|m| m as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beam_splitter_is_unitary() {
        let basis = FockBasis::new(3, 3).unwrap();
        for &t in &[0.0, 0.2, 0.5, 0.93, 1.0] {
            let u = beam_splitter_unitary(&basis, 0, 2, t).unwrap();
            let defect = (u.adjoint() * &u - DMatrix::identity(basis.dim(), basis.dim())).norm();
            assert!(defect < 1e-12, "t={t} defect={defect}");
        }
    }

    #[test]
    fn loss_kraus_is_complete() {
        let basis = Arc::new(FockBasis::new(4, 3).unwrap());
        for &eta in &[0.0, 0.1, 0.5, 1.0] {
            let ch = KrausChannel::loss(basis.clone(), 1, eta).unwrap();
            assert!(ch.completeness_defect() < 1e-12);
        }
    }

    #[test]
    fn rejects_out_of_range() {
        let basis = FockBasis::new(2, 2).unwrap();
        assert!(beam_splitter_unitary(&basis, 0, 1, 1.5).is_err());
        assert!(beam_splitter_unitary(&basis, 0, 0, 0.5).is_err());
        assert!(beam_splitter_unitary(&basis, 0, 2, 0.5).is_err());
        let arc = Arc::new(basis);
        assert!(KrausChannel::loss(arc, 0, -0.1).is_err());
    }

    #[test]
    fn small_combinatorics() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(2, 3), 0.0);
        assert_eq!(factorial(4), 24.0);
    }
}
