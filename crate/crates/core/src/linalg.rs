//! Dense complex matrices stored as separate real and imaginary parts, plus
//! the symmetric tridiagonal eigensolver used to build evolution operators.
//!
//! Keeping the two parts as `DMatrix<f64>` lets every product go through the
//! blocked real GEMM kernel; a complex product costs four real ones.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    re: DMatrix<f64>,
    im: DMatrix<f64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            re: DMatrix::zeros(dim, dim),
            im: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            re: DMatrix::identity(dim, dim),
            im: DMatrix::zeros(dim, dim),
        }
    }

    pub fn from_real(re: DMatrix<f64>) -> Self {
        assert!(re.is_square(), "matrix must be square");
        let n = re.nrows();
        Self {
            re,
            im: DMatrix::zeros(n, n),
        }
    }

    pub fn from_parts(re: DMatrix<f64>, im: DMatrix<f64>) -> Self {
        assert!(re.is_square(), "matrix must be square");
        assert_eq!(re.shape(), im.shape(), "real and imaginary parts differ in shape");
        Self { re, im }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self::from_real(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut out = Self::zeros(dim);
        for c in 0..dim {
            for r in 0..dim {
                let z = f(r, c);
                out.re[(r, c)] = z.re;
                out.im[(r, c)] = z.im;
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.re.nrows()
    }

    pub fn re(&self) -> &DMatrix<f64> {
        &self.re
    }

    pub fn im(&self) -> &DMatrix<f64> {
        &self.im
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        Complex64::new(self.re[(row, col)], self.im[(row, col)])
    }

    pub fn set(&mut self, row: usize, col: usize, z: Complex64) {
        self.re[(row, col)] = z.re;
        self.im[(row, col)] = z.im;
    }

    pub fn adjoint(&self) -> Self {
        Self {
            re: self.re.transpose(),
            im: -self.im.transpose(),
        }
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in matmul");
        let re = &self.re * &rhs.re - &self.im * &rhs.im;
        let im = &self.re * &rhs.im + &self.im * &rhs.re;
        Self { re, im }
    }

    /// `U · X · U†`.
    pub fn conjugate(&self, x: &Self) -> Self {
        self.matmul(x).matmul(&self.adjoint())
    }

    /// Real part of the diagonal of `U · X · U†` without forming the product.
    pub fn conjugate_diagonal(&self, x: &Self) -> Vec<f64> {
        let t = self.matmul(x);
        let n = self.dim();
        (0..n)
            .map(|a| {
                (0..n)
                    .map(|c| t.re[(a, c)] * self.re[(a, c)] + t.im[(a, c)] * self.im[(a, c)])
                    .sum()
            })
            .collect()
    }

    pub fn trace(&self) -> Complex64 {
        Complex64::new(self.re.trace(), self.im.trace())
    }

    /// `Tr(A · B)` in O(d²).
    pub fn trace_product(&self, rhs: &Self) -> Complex64 {
        let n = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                acc += self.get(i, k) * rhs.get(k, i);
            }
        }
        acc
    }

    pub fn diagonal_re(&self) -> Vec<f64> {
        self.re.diagonal().iter().copied().collect()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            re: &self.re * s,
            im: &self.im * s,
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }

    /// Elementwise (Hadamard) product with a real matrix.
    pub fn hadamard_real(&self, mask: &DMatrix<f64>) -> Self {
        Self {
            re: self.re.component_mul(mask),
            im: self.im.component_mul(mask),
        }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.re
            .iter()
            .zip(self.im.iter())
            .map(|(r, i)| r.hypot(*i))
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        self.sub(rhs).max_abs()
    }

    /// Smallest eigenvalue of a Hermitian matrix, via the real symmetric
    /// embedding `[[Re, -Im], [Im, Re]]` whose spectrum doubles that of `self`.
    pub fn min_hermitian_eigenvalue(&self) -> f64 {
        let n = self.dim();
        let mut big = DMatrix::zeros(2 * n, 2 * n);
        big.view_mut((0, 0), (n, n)).copy_from(&self.re);
        big.view_mut((n, n), (n, n)).copy_from(&self.re);
        big.view_mut((0, n), (n, n)).copy_from(&(-&self.im));
        big.view_mut((n, 0), (n, n)).copy_from(&self.im);
        big = (&big + big.transpose()) * 0.5;
        big.symmetric_eigenvalues().min()
    }
}

/// Eigen-decomposition of a real symmetric tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct TridiagonalEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: DMatrix<f64>,
}

/// Implicit-shift QL iteration on a symmetric tridiagonal matrix with
/// diagonal `diag` and super-diagonal `off` (`off.len() == diag.len() - 1`).
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Result<TridiagonalEigen> {
    let n = diag.len();
    assert!(n >= 1, "empty matrix");
    assert_eq!(off.len() + 1, n, "off-diagonal length must be n - 1");

    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    let mut v = DMatrix::<f64>::identity(n, n);

    let eps = f64::EPSILON;
    let max_iter = 30 * n.max(1);
    let mut f = 0.0f64;
    let mut tst1 = 0.0f64;

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }

        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > max_iter {
                    return Err(Error::NumericalDegeneracy {
                        what: "tridiagonal QL convergence",
                        residual: e[l].abs(),
                        tolerance: eps * tst1,
                    });
                }

                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    // Columns i and i+1 are contiguous in column-major storage.
                    for k in 0..n {
                        let h = v[(k, i + 1)];
                        v[(k, i + 1)] = s * v[(k, i)] + c * h;
                        v[(k, i)] = c * v[(k, i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(TridiagonalEigen { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_of_small_tridiagonal() {
        // [[2,1,0],[1,2,1],[0,1,2]] has eigenvalues 2-√2, 2, 2+√2.
        let eig = tridiagonal_eigen(&[2.0, 2.0, 2.0], &[1.0, 1.0]).unwrap();
        let s = std::f64::consts::SQRT_2;
        for (got, want) in eig.values.iter().zip([2.0 - s, 2.0, 2.0 + s]) {
            assert!((got - want).abs() < 1e-14, "{got} vs {want}");
        }
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0]);
        let lam = DMatrix::from_diagonal(&DVector::from_vec(eig.values.clone()));
        let recon = &eig.vectors * lam * eig.vectors.transpose();
        assert!((recon - a).amax() < 1e-13);
    }

    #[test]
    fn one_by_one() {
        let eig = tridiagonal_eigen(&[3.5], &[]).unwrap();
        assert_eq!(eig.values, vec![3.5]);
        assert_eq!(eig.vectors[(0, 0)], 1.0);
    }

    #[test]
    fn matches_dense_solver_on_random_tridiagonal() {
        let diag: Vec<f64> = (0..40).map(|i| ((i * 7919) % 13) as f64 * 0.3 - 1.0).collect();
        let off: Vec<f64> = (0..39).map(|i| ((i * 104729) % 11) as f64 * 0.2 + 0.05).collect();
        let eig = tridiagonal_eigen(&diag, &off).unwrap();
        let dense = DMatrix::from_fn(40, 40, |r, c| {
            if r == c {
                diag[r]
            } else if r + 1 == c {
                off[r]
            } else if c + 1 == r {
                off[c]
            } else {
                0.0
            }
        });
        let mut reference: Vec<f64> = dense.symmetric_eigenvalues().iter().copied().collect();
        reference.sort_by(f64::total_cmp);
        for (a, b) in eig.values.iter().zip(&reference) {
            assert!((a - b).abs() < 1e-12);
        }
        let vtv = eig.vectors.transpose() * &eig.vectors;
        assert!((vtv - DMatrix::<f64>::identity(40, 40)).amax() < 1e-13);
    }

    #[test]
    fn complex_product_and_adjoint() {
        let a = ComplexMatrix::from_fn(2, |r, c| Complex64::new(r as f64 + 1.0, c as f64 - 0.5));
        let b = ComplexMatrix::from_fn(2, |r, c| Complex64::new((r * c) as f64, 1.0));
        let ab = a.matmul(&b);
        for r in 0..2 {
            for c in 0..2 {
                let want: Complex64 = (0..2).map(|k| a.get(r, k) * b.get(k, c)).sum();
                assert!((ab.get(r, c) - want).norm() < 1e-15);
            }
        }
        assert_eq!(a.adjoint().get(0, 1), a.get(1, 0).conj());
        let diag = a.conjugate_diagonal(&b);
        let full = a.conjugate(&b);
        for (i, d) in diag.iter().enumerate() {
            assert!((full.get(i, i).re - d).abs() < 1e-14);
        }
        assert!((a.trace_product(&b) - ab.trace()).norm() < 1e-14);
    }

    #[test]
    fn min_eigenvalue_of_hermitian() {
        // [[1, i], [-i, 1]] has eigenvalues 0 and 2.
        let mut m = ComplexMatrix::identity(2);
        m.set(0, 1, Complex64::new(0.0, 1.0));
        m.set(1, 0, Complex64::new(0.0, -1.0));
        assert!(m.min_hermitian_eigenvalue().abs() < 1e-14);
    }
}
