use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::basis::FockBasis;
use crate::error::{Error, Result};

pub(crate) const HERMITIAN_TOL: f64 = 1e-12;
pub(crate) const PSD_TOL: f64 = 1e-10;

/// Default tolerance on trace mass dropped when re-truncating a product.
pub const TRUNCATION_TOL: f64 = 1e-12;

/// Possibly unnormalized density operator on a truncated Fock basis.
///
/// Conditional states keep their event probability as the trace, so
/// sequential heralds multiply probabilities without bookkeeping.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    basis: Arc<FockBasis>,
    matrix: DMatrix<Complex64>,
}

impl DensityOperator {
    /// Wraps a matrix, checking shape and Hermiticity.
    pub fn from_matrix(basis: Arc<FockBasis>, matrix: DMatrix<Complex64>) -> Result<Self> {
        let d = basis.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::BasisMismatch(format!(
                "matrix is {}x{}, basis has dimension {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let rho = Self { basis, matrix };
        let dev = rho.hermiticity_defect();
        if dev > HERMITIAN_TOL * rho.matrix.norm().max(1.0) {
            return Err(Error::BasisMismatch(format!(
                "matrix is not Hermitian (defect {dev:e})"
            )));
        }
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(basis: Arc<FockBasis>, matrix: DMatrix<Complex64>) -> Self {
        debug_assert_eq!(matrix.nrows(), basis.dim());
        Self { basis, matrix }
    }

    /// `|psi><psi|` for an amplitude vector in `basis` order.
    pub fn from_pure(basis: Arc<FockBasis>, amplitudes: &[Complex64]) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::BasisMismatch(format!(
                "{} amplitudes for a basis of dimension {}",
                amplitudes.len(),
                basis.dim()
            )));
        }
        let v = DVector::from_column_slice(amplitudes);
        let matrix = &v * v.adjoint();
        Ok(Self { basis, matrix })
    }

    /// Pure state from `(occupation, amplitude)` pairs.
    pub fn from_superposition(basis: Arc<FockBasis>, terms: &[(&[u8], Complex64)]) -> Result<Self> {
        let mut amps = vec![Complex64::new(0.0, 0.0); basis.dim()];
        for (occ, amp) in terms {
            let i = basis
                .index_of(occ)
                .ok_or_else(|| Error::BasisMismatch(format!("occupation {occ:?} not in basis")))?;
            amps[i] += amp;
        }
        Self::from_pure(basis, &amps)
    }

    /// `|n><n|` for a single occupation vector.
    pub fn fock(basis: Arc<FockBasis>, occupation: &[u8]) -> Result<Self> {
        Self::from_superposition(basis, &[(occupation, Complex64::new(1.0, 0.0))])
    }

    pub fn vacuum(basis: Arc<FockBasis>) -> Self {
        let d = basis.dim();
        let mut matrix = DMatrix::zeros(d, d);
        matrix[(0, 0)] = Complex64::new(1.0, 0.0);
        Self { basis, matrix }
    }

    /// Diagonal state with the given weights on occupation vectors.
    pub fn mixture_of_fock(basis: Arc<FockBasis>, weights: &[(&[u8], f64)]) -> Result<Self> {
        let d = basis.dim();
        let mut matrix = DMatrix::zeros(d, d);
        for (occ, w) in weights {
            let i = basis
                .index_of(occ)
                .ok_or_else(|| Error::BasisMismatch(format!("occupation {occ:?} not in basis")))?;
            matrix[(i, i)] += Complex64::new(*w, 0.0);
        }
        Ok(Self { basis, matrix })
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn basis_arc(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn num_modes(&self) -> usize {
        self.basis.num_modes()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    /// Matrix element `<row| rho |col>` by occupation.
    pub fn element(&self, row: &[u8], col: &[u8]) -> Complex64 {
        match (self.basis.index_of(row), self.basis.index_of(col)) {
            (Some(i), Some(j)) => self.matrix[(i, j)],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            basis: self.basis.clone(),
            matrix: self.matrix.map(|z| z * factor),
        }
    }

    /// Adds two operators on the same basis.
    pub fn add(&self, other: &DensityOperator) -> Result<Self> {
        if !self.basis.same_space(&other.basis) {
            return Err(Error::BasisMismatch("cannot add operators on different bases".into()));
        }
        Ok(Self {
            basis: self.basis.clone(),
            matrix: &self.matrix + &other.matrix,
        })
    }

    /// Returns the state rescaled to unit trace, or `None` when the trace vanishes.
    pub fn normalized(&self) -> Option<Self> {
        let tr = self.trace();
        if tr <= f64::MIN_POSITIVE {
            return None;
        }
        Some(self.scaled(1.0 / tr))
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).norm()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.matrix + self.matrix.adjoint()).map(|z| z * 0.5);
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    /// Checks Hermiticity, positivity and the trace bound.
    pub fn validate(&self) -> Result<()> {
        let dev = self.hermiticity_defect();
        if dev > HERMITIAN_TOL * self.matrix.norm().max(1.0) {
            return Err(Error::BasisMismatch(format!("not Hermitian (defect {dev:e})")));
        }
        let min = self.eigenvalues().first().copied().unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(Error::NegativeProbability(min));
        }
        let tr = self.trace();
        if !(-PSD_TOL..=1.0 + HERMITIAN_TOL).contains(&tr) {
            return Err(Error::Unnormalized(tr));
        }
        Ok(())
    }

    /// `Tr(rho^2)` of the state as stored (not renormalized).
    pub fn purity(&self) -> f64 {
        // Tr(rho rho) = sum_ij |rho_ij|^2 for Hermitian rho
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `U rho U^dagger` for a unitary on the same basis.
    pub fn conjugate_by(&self, unitary: &DMatrix<Complex64>) -> Self {
        let matrix = unitary * &self.matrix * unitary.adjoint();
        Self {
            basis: self.basis.clone(),
            matrix,
        }
    }
}
