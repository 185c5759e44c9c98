mod common;

use common::{expm_series, jx_dense, max_diff, spin, to_dense};
use spinmr::linalg::ComplexMatrix;
use spinmr::spin::unitarity_residual;
use spinmr::{DensityMatrix, SpinContext, Step};

#[test]
fn unitaries_stay_unitary_up_to_spin_200() {
    for twice_j in [1, 2, 7, 40, 101, 200, 255, 400] {
        let ctx = SpinContext::new(spin(twice_j)).unwrap();
        for step in [Step::Pi, Step::HalfPi] {
            let r = unitarity_residual(ctx.unitary(step));
            assert!(r < 1e-10, "2j = {twice_j}, {step:?}: {r:e}");
        }
    }
}

#[test]
fn jx_spectrum_is_minus_j_to_j() {
    for twice_j in [0, 1, 2, 5, 20, 99, 200] {
        let ctx = SpinContext::new(spin(twice_j)).unwrap();
        let expected = spin(twice_j).m_values();
        for (got, want) in ctx.jx_spectrum().iter().zip(&expected) {
            assert!((got - want).abs() < 1e-10, "2j = {twice_j}: {got} vs {want}");
        }
    }
}

#[test]
fn jx_is_hermitian_and_matches_ladder_construction() {
    for twice_j in [1, 4, 13] {
        let j = spin(twice_j);
        let ctx = SpinContext::new(j).unwrap();
        let jx = ctx.jx();
        assert!(jx.max_abs_diff(&jx.adjoint()) < 1e-12);
        assert!(max_diff(&to_dense(jx), &jx_dense(j)) < 1e-14);
    }
}

#[test]
fn half_pi_squared_is_pi() {
    for twice_j in [3, 20, 60] {
        let ctx = SpinContext::new(spin(twice_j)).unwrap();
        let sq = ctx.u_half_pi().matmul(ctx.u_half_pi());
        assert!(sq.max_abs_diff(ctx.u_pi()) < 1e-10);
    }
}

#[test]
fn four_pi_rotations_return_the_state() {
    for twice_j in [1, 2, 9, 30] {
        let j = spin(twice_j);
        let ctx = SpinContext::new(j).unwrap();
        let d = j.dim();
        // A generic state with complex coherences.
        let psi: Vec<_> = (0..d)
            .map(|k| num_complex::Complex64::new(1.0 + k as f64, (k as f64 * 0.7).sin()))
            .collect();
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        let m = ComplexMatrix::from_fn(d, |r, c| psi[r] * psi[c].conj() / norm);
        let rho = DensityMatrix::new(m).unwrap();
        let mut out = rho.clone();
        for _ in 0..4 {
            out = ctx.evolve(&out, Step::Pi).unwrap();
        }
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-9);
    }
}

#[test]
fn eigen_unitaries_match_series_exponential() {
    for twice_j in 0..=40 {
        let j = spin(twice_j);
        let ctx = SpinContext::new(j).unwrap();
        let h = jx_dense(j);
        let half = expm_series(&h, std::f64::consts::FRAC_PI_2);
        let full = expm_series(&h, std::f64::consts::PI);
        assert!(max_diff(&to_dense(ctx.u_half_pi()), &half) < 1e-10, "2j = {twice_j}");
        assert!(max_diff(&to_dense(ctx.u_pi()), &full) < 1e-10, "2j = {twice_j}");
        let theta = 0.37;
        assert!(max_diff(&to_dense(&ctx.evolution(theta)), &expm_series(&h, theta)) < 1e-10);
    }
}
