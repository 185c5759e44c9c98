//! Spin-j operators and the precession unitaries of the three-time protocol.
//!
//! Basis ordering is fixed everywhere: index `k` ↔ `m = k − j`, so index 0 is
//! `m = −j` and index `d − 1` is `m = +j`.
//!
//! Evolution under `H = Ω J_x` enters only through the angles `Ωt ∈ {π/2, π}`.
//! `exp(−iθ J_x)` is built from the eigen-decomposition of the real symmetric
//! tridiagonal `J_x`, whose spectrum must come out as `{−j, …, +j}`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{tridiagonal_eigen, ComplexMatrix};
use crate::state::DensityMatrix;

pub const DEFAULT_J_MAX: f64 = 500.0;

const HERMITIAN_TOLERANCE: f64 = 1e-12;
const UNITARITY_TOLERANCE: f64 = 1e-10;
const SPECTRUM_TOLERANCE: f64 = 1e-10;

/// Spin quantum number `j`, stored as the integer `2j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "f64", try_from = "f64")]
pub struct SpinQuantumNumber {
    twice_j: u32,
}

impl SpinQuantumNumber {
    pub const fn from_twice(twice_j: u32) -> Self {
        Self { twice_j }
    }

    pub const fn integer(j: u32) -> Self {
        Self { twice_j: 2 * j }
    }

    pub fn new(j: f64) -> Result<Self> {
        let twice = 2.0 * j;
        if !j.is_finite() || j < 0.0 || (twice - twice.round()).abs() > 1e-9 || twice > u32::MAX as f64 {
            return Err(Error::InvalidSpin(j.to_string()));
        }
        Ok(Self {
            twice_j: twice.round() as u32,
        })
    }

    pub fn j(self) -> f64 {
        self.twice_j as f64 / 2.0
    }

    pub fn twice_j(self) -> u32 {
        self.twice_j
    }

    pub fn dim(self) -> usize {
        self.twice_j as usize + 1
    }

    /// `floor(j)`, the largest admissible grouping parameter.
    pub fn floor(self) -> usize {
        (self.twice_j / 2) as usize
    }

    pub fn is_integer(self) -> bool {
        self.twice_j.is_multiple_of(2)
    }

    /// Eigenvalues of J_z in basis order.
    pub fn m_values(self) -> Vec<f64> {
        let j = self.j();
        (0..self.dim()).map(|k| k as f64 - j).collect()
    }

    /// Basis index of eigenvalue `m`.
    pub fn index_of(self, m: f64) -> Result<usize> {
        let j = self.j();
        let k = m + j;
        if !(k.is_finite() && (k - k.round()).abs() < 1e-9 && k.round() >= 0.0 && k.round() <= 2.0 * j) {
            return Err(Error::OutOfRange { m, j });
        }
        Ok(k.round() as usize)
    }
}

impl From<SpinQuantumNumber> for f64 {
    fn from(s: SpinQuantumNumber) -> f64 {
        s.j()
    }
}

impl TryFrom<f64> for SpinQuantumNumber {
    type Error = Error;
    fn try_from(j: f64) -> Result<Self> {
        Self::new(j)
    }
}

impl fmt::Display for SpinQuantumNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice_j / 2)
        } else {
            write!(f, "{}/2", self.twice_j)
        }
    }
}

/// Accepts `3`, `1.5` or `3/2`.
impl FromStr for SpinQuantumNumber {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidSpin(s.to_string());
        if let Some((num, den)) = s.split_once('/') {
            let num: u32 = num.trim().parse().map_err(|_| bad())?;
            return match den.trim() {
                "1" => Ok(Self::integer(num)),
                "2" => Ok(Self::from_twice(num)),
                _ => Err(bad()),
            };
        }
        let j: f64 = s.parse().map_err(|_| bad())?;
        Self::new(j)
    }
}

/// Evolution interval of the protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Step {
    /// Ωt = π, from preparation to the first measurement.
    Pi,
    /// Ωt = π/2, between consecutive measurements.
    HalfPi,
}

impl Step {
    pub fn angle(self) -> f64 {
        match self {
            Step::Pi => PI,
            Step::HalfPi => FRAC_PI_2,
        }
    }
}

/// Immutable per-j operator cache.
#[derive(Debug, Clone)]
pub struct SpinContext {
    spin: SpinQuantumNumber,
    m_values: Vec<f64>,
    jx: ComplexMatrix,
    jx_eigenvalues: Vec<f64>,
    jx_eigenvectors: DMatrix<f64>,
    u_pi: ComplexMatrix,
    u_half_pi: ComplexMatrix,
}

/// Super-diagonal of J_x: `⟨m+1|J_x|m⟩ = ½√(j(j+1) − m(m+1))`.
pub fn jx_off_diagonal(spin: SpinQuantumNumber) -> Vec<f64> {
    let j = spin.j();
    spin.m_values()
        .iter()
        .take(spin.dim() - 1)
        .map(|&m| 0.5 * (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt())
        .collect()
}

impl SpinContext {
    pub fn new(spin: SpinQuantumNumber) -> Result<Self> {
        Self::with_j_max(spin, DEFAULT_J_MAX)
    }

    pub fn with_j_max(spin: SpinQuantumNumber, j_max: f64) -> Result<Self> {
        let max_dim = (2.0 * j_max).floor() as usize + 1;
        if spin.dim() > max_dim {
            return Err(Error::DimensionOverflow {
                dim: spin.dim(),
                max: max_dim,
                j_max,
            });
        }

        let d = spin.dim();
        let off = jx_off_diagonal(spin);
        let mut jx_real = DMatrix::zeros(d, d);
        for (k, &o) in off.iter().enumerate() {
            jx_real[(k + 1, k)] = o;
            jx_real[(k, k + 1)] = o;
        }
        let jx = ComplexMatrix::from_real(jx_real);

        let eig = tridiagonal_eigen(&vec![0.0; d], &off)?;
        let j = spin.j();
        let spectrum_err = eig
            .values
            .iter()
            .enumerate()
            .map(|(k, &w)| (w - (k as f64 - j)).abs())
            .fold(0.0, f64::max);
        if spectrum_err > SPECTRUM_TOLERANCE {
            return Err(Error::NumericalDegeneracy {
                what: "J_x spectrum",
                residual: spectrum_err,
                tolerance: SPECTRUM_TOLERANCE,
            });
        }

        let mut ctx = Self {
            spin,
            m_values: spin.m_values(),
            jx,
            jx_eigenvalues: eig.values,
            jx_eigenvectors: eig.vectors,
            u_pi: ComplexMatrix::zeros(d),
            u_half_pi: ComplexMatrix::zeros(d),
        };
        ctx.u_pi = ctx.evolution(PI);
        ctx.u_half_pi = ctx.evolution(FRAC_PI_2);
        for u in [&ctx.u_pi, &ctx.u_half_pi] {
            let residual = unitarity_residual(u);
            if residual > UNITARITY_TOLERANCE {
                return Err(Error::NumericalDegeneracy {
                    what: "unitarity",
                    residual,
                    tolerance: UNITARITY_TOLERANCE,
                });
            }
        }
        debug_assert!(ctx.jx.max_abs_diff(&ctx.jx.adjoint()) < HERMITIAN_TOLERANCE);
        Ok(ctx)
    }

    pub fn spin(&self) -> SpinQuantumNumber {
        self.spin
    }

    pub fn dim(&self) -> usize {
        self.spin.dim()
    }

    pub fn m_values(&self) -> &[f64] {
        &self.m_values
    }

    pub fn jx(&self) -> &ComplexMatrix {
        &self.jx
    }

    /// J_x eigenvalues as produced by the eigensolver (ascending).
    pub fn jx_spectrum(&self) -> &[f64] {
        &self.jx_eigenvalues
    }

    pub fn u_pi(&self) -> &ComplexMatrix {
        &self.u_pi
    }

    pub fn u_half_pi(&self) -> &ComplexMatrix {
        &self.u_half_pi
    }

    pub fn unitary(&self, step: Step) -> &ComplexMatrix {
        match step {
            Step::Pi => &self.u_pi,
            Step::HalfPi => &self.u_half_pi,
        }
    }

    /// `exp(−iθ J_x) = V · diag(e^{−iθw}) · Vᵀ` for an arbitrary angle.
    pub fn evolution(&self, theta: f64) -> ComplexMatrix {
        let v = &self.jx_eigenvectors;
        let (sin, cos): (Vec<f64>, Vec<f64>) = self
            .jx_eigenvalues
            .iter()
            .map(|&w| (theta * w).sin_cos())
            .unzip();
        let vt = v.transpose();
        let re = v * DMatrix::from_diagonal(&DVector::from_vec(cos)) * &vt;
        let im = -(v * DMatrix::from_diagonal(&DVector::from_vec(sin)) * &vt);
        ComplexMatrix::from_parts(re, im)
    }

    /// `|m; j⟩⟨m; j|`.
    pub fn basis_state(&self, m: f64) -> Result<DensityMatrix> {
        let k = self.spin.index_of(m)?;
        Ok(DensityMatrix::projector(self.dim(), k))
    }

    /// `U ρ U†` for one protocol interval.
    pub fn evolve(&self, rho: &DensityMatrix, step: Step) -> Result<DensityMatrix> {
        rho.check_dim(self.dim())?;
        Ok(DensityMatrix::from_matrix_unchecked(
            self.unitary(step).conjugate(rho.matrix()),
        ))
    }
}

/// `‖U†U − I‖_max`.
pub fn unitarity_residual(u: &ComplexMatrix) -> f64 {
    u.adjoint()
        .matmul(u)
        .max_abs_diff(&ComplexMatrix::identity(u.dim()))
}
