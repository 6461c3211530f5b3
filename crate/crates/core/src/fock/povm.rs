use nalgebra::DMatrix;
use num_complex::Complex64;

use super::state::PSD_TOL;

/// One element of a single-mode POVM, expressed on the local Fock space
/// `{|0>, ..., |cutoff>}`.
#[derive(Debug, Clone)]
pub struct PovmElement {
    pub matrix: DMatrix<Complex64>,
    pub label: String,
}

impl PovmElement {
    pub fn new(matrix: DMatrix<Complex64>, label: impl Into<String>) -> Self {
        Self {
            matrix,
            label: label.into(),
        }
    }

    /// Element diagonal in the photon-number basis, `weights[n] = <n|Pi|n>`.
    pub fn diagonal(weights: &[f64], label: impl Into<String>) -> Self {
        let d = weights.len();
        let mut m = DMatrix::zeros(d, d);
        for (n, &w) in weights.iter().enumerate() {
            m[(n, n)] = Complex64::new(w, 0.0);
        }
        Self::new(m, label)
    }

    pub fn identity(local_dim: usize) -> Self {
        Self::diagonal(&vec![1.0; local_dim], "identity")
    }

    pub fn local_dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Photon-number weights, if the element is diagonal.
    pub fn diagonal_weights(&self) -> Option<Vec<f64>> {
        let d = self.local_dim();
        for r in 0..d {
            for c in 0..d {
                if r != c && self.matrix[(r, c)].norm() > 0.0 {
                    return None;
                }
            }
        }
        Some((0..d).map(|n| self.matrix[(n, n)].re).collect())
    }

    pub fn is_psd(&self) -> bool {
        let herm = (&self.matrix + self.matrix.adjoint()).map(|z| z * 0.5);
        herm.symmetric_eigenvalues().iter().all(|&ev| ev >= -PSD_TOL)
    }
}

/// Frobenius distance of `sum_k Pi_k` from the identity.
pub fn completeness_defect(elements: &[PovmElement]) -> f64 {
    let Some(first) = elements.first() else {
        return f64::INFINITY;
    };
    let d = first.local_dim();
    let mut acc = DMatrix::<Complex64>::zeros(d, d);
    for e in elements {
        if e.local_dim() != d {
            return f64::INFINITY;
        }
        acc += &e.matrix;
    }
    (acc - DMatrix::identity(d, d)).norm()
}
