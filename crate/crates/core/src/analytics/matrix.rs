//! Dense symmetric covariance matrices.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use serde::Serialize;

use crate::error::{domain, Error, Result};

/// Which builder produced a [`CovMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    /// Plant started at the origin.
    Transient,
    /// Stationary plant.
    Steady,
    /// Inverse of a stationary covariance.
    Precision,
    /// Two independent stationary segments split after `tau`.
    ResetBlock { tau: usize },
    /// Stationary segment followed by a segment restarted from the origin.
    OriginReset { tau: usize },
    /// Sample covariance of simulated trajectories.
    Empirical,
    /// Caller-supplied matrix.
    Supplied,
}

/// Symmetric positive-semidefinite `n × n` matrix, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    matrix: DMatrix<f64>,
    provenance: Provenance,
}

const SYMMETRY_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-9;

impl CovMatrix {
    /// Validates symmetry and positive semidefiniteness.
    pub fn new(matrix: DMatrix<f64>, provenance: Provenance) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(domain(format!(
                "covariance must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(domain("covariance has non-finite entries"));
        }
        let scale = matrix.amax().max(1.0);
        let n = matrix.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                if (matrix[(i, j)] - matrix[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(domain(format!("covariance not symmetric at ({i}, {j})")));
                }
            }
        }
        let eig = SymmetricEigen::new(matrix.clone()).eigenvalues;
        let radius = eig.amax();
        let smallest = eig.min();
        if smallest < -PSD_TOL * radius {
            return Err(domain(format!(
                "covariance not positive semidefinite: smallest eigenvalue {smallest:.3e}"
            )));
        }
        Ok(Self { matrix, provenance })
    }

    /// Wraps a matrix produced by a closed-form builder that is symmetric
    /// by construction.
    pub(crate) fn from_builder(matrix: DMatrix<f64>, provenance: Provenance) -> Self {
        debug_assert!(Self::new(matrix.clone(), provenance).is_ok());
        Self { matrix, provenance }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.matrix
    }

    /// Rows as nested vectors, for serialisation.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.matrix
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }

    /// Ratio of extreme eigenvalue magnitudes.
    pub fn condition_number(&self) -> f64 {
        let eig = SymmetricEigen::new(self.matrix.clone()).eigenvalues;
        let max = eig.amax();
        let min = eig.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    /// Cholesky factor; fails with a conditioning diagnostic when singular.
    pub fn cholesky(&self) -> Result<Cholesky<f64, Dyn>> {
        Cholesky::new(self.matrix.clone()).ok_or_else(|| Error::Numeric {
            message: "covariance is singular or not positive definite".into(),
            condition: self.condition_number(),
        })
    }

    /// `ln |Σ|` via Cholesky.
    pub fn log_det(&self) -> Result<f64> {
        Ok(log_det_from_cholesky(&self.cholesky()?))
    }

    /// `xᵀ Σ⁻¹ x`.
    pub fn quadratic_form_inverse(&self, x: &DVector<f64>) -> Result<f64> {
        let chol = self.cholesky()?;
        Ok(x.dot(&chol.solve(x)))
    }
}

pub(crate) fn log_det_from_cholesky(chol: &Cholesky<f64, Dyn>) -> f64 {
    2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_asymmetric_and_indefinite() {
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(CovMatrix::new(asym, Provenance::Supplied).is_err());
        let indefinite = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(CovMatrix::new(indefinite, Provenance::Supplied).is_err());
        let rect = DMatrix::<f64>::zeros(2, 3);
        assert!(CovMatrix::new(rect, Provenance::Supplied).is_err());
    }

    #[test]
    fn singular_matrix_reports_condition() {
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let c = CovMatrix::new(singular, Provenance::Supplied).unwrap();
        match c.cholesky() {
            Err(Error::Numeric { condition, .. }) => assert!(condition > 1e12),
            other => panic!("expected numeric error, got {other:?}"),
        }
    }

    #[test]
    fn log_det_of_diagonal() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0, 0.5]));
        let c = CovMatrix::new(m, Provenance::Supplied).unwrap();
        assert!((c.log_det().unwrap() - 3.0_f64.ln()).abs() < 1e-14);
    }
}
