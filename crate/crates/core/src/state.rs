use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Tolerance used when validating user-supplied states.
pub const STATE_TOLERANCE: f64 = 1e-10;

/// A d×d Hermitian, positive-semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let herm = m.max_abs_diff(&m.adjoint());
        if herm > STATE_TOLERANCE {
            return Err(Error::InvalidState(format!("not Hermitian (residual {herm:e})")));
        }
        let tr = m.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > STATE_TOLERANCE {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min = m.min_hermitian_eigenvalue();
        if min < -STATE_TOLERANCE {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self(m))
    }

    /// Wraps a matrix that is a density matrix by construction.
    pub(crate) fn from_matrix_unchecked(m: ComplexMatrix) -> Self {
        Self(m)
    }

    /// `|k⟩⟨k|` in a d-dimensional space.
    pub fn projector(dim: usize, index: usize) -> Self {
        assert!(index < dim);
        let mut diag = vec![0.0; dim];
        diag[index] = 1.0;
        Self(ComplexMatrix::from_diagonal(&diag))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(ComplexMatrix::from_diagonal(&vec![1.0 / dim as f64; dim]))
    }

    /// `v·ρ + (1 − v)·I/d`.
    pub fn with_white_noise(&self, visibility: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&visibility) {
            return Err(Error::InvalidVisibility(visibility));
        }
        let d = self.dim();
        let noise = ComplexMatrix::identity(d).scale((1.0 - visibility) / d as f64);
        Ok(Self(self.0.scale(visibility).add(&noise)))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// Populations in the J_z basis.
    pub fn populations(&self) -> Vec<f64> {
        self.0.diagonal_re()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.0.min_hermitian_eigenvalue()
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: self.dim(),
            });
        }
        Ok(())
    }
}
