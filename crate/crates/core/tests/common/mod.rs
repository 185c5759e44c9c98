//! Reference implementations used only by tests. None of them share code
//! with the library beyond the public parameter types.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive};

use spinmr::linalg::ComplexMatrix;
use spinmr::{Quantity, SpinQuantumNumber};

pub type CMat = DMatrix<Complex64>;

/// J_x assembled from J₊ in the ascending-m basis.
pub fn jx_dense(j: SpinQuantumNumber) -> CMat {
    let d = j.dim();
    let jj = j.j();
    let mut jp = CMat::zeros(d, d);
    for k in 0..d - 1 {
        let m = k as f64 - jj;
        jp[(k + 1, k)] = Complex64::new((jj * (jj + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    (&jp + jp.adjoint()).scale(0.5)
}

/// `exp(−iθ H)` by scaling and squaring with a Taylor series.
pub fn expm_series(h: &CMat, theta: f64) -> CMat {
    let d = h.nrows();
    let a = h.map(|z| z * Complex64::new(0.0, -theta));
    let norm: f64 = (0..d)
        .map(|r| (0..d).map(|c| a[(r, c)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = a.scale(1.0 / 2f64.powi(squarings as i32));
    let mut term = CMat::identity(d, d);
    let mut sum = CMat::identity(d, d);
    for k in 1..40 {
        term = &term * &scaled / Complex64::new(k as f64, 0.0);
        sum += &term;
        if term.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

pub fn to_dense(m: &ComplexMatrix) -> CMat {
    CMat::from_fn(m.dim(), m.dim(), |r, c| m.get(r, c))
}

pub fn max_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// C(4j, 2j) / 16^j in exact integer arithmetic, rounded once to f64.
pub fn ratio_r_exact(j: SpinQuantumNumber) -> f64 {
    let n = 2 * j.twice_j() as u64;
    let k = n / 2;
    let mut c = BigUint::one();
    for i in 0..k {
        c = c * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    // 16^j = 2^(4j) = 2^n.
    let shift = n;
    let bits = c.bits();
    if bits <= 1000 && shift <= 1000 {
        return c.to_f64().unwrap() / 2f64.powi(shift as i32);
    }
    let drop = bits.saturating_sub(60);
    let top = (c >> drop).to_f64().unwrap();
    top * 2f64.powf(drop as f64 - shift as f64)
}

/// Brute-force protocol: dense complex matrices, explicit √F_k for every
/// level, every branch summed separately.
pub struct BruteForce {
    d: usize,
    lambda: f64,
    x: usize,
    rho0: CMat,
    u_pi: CMat,
    u_half: CMat,
}

impl BruteForce {
    pub fn new(j: SpinQuantumNumber, lambda: f64, v: f64, x: usize) -> Self {
        let d = j.dim();
        let h = jx_dense(j);
        let mut rho0 = CMat::identity(d, d).scale((1.0 - v) / d as f64);
        rho0[(0, 0)] += Complex64::new(v, 0.0);
        Self {
            d,
            lambda,
            x,
            rho0,
            u_pi: expm_series(&h, std::f64::consts::PI),
            u_half: expm_series(&h, std::f64::consts::FRAC_PI_2),
        }
    }

    fn effect(&self, k: usize) -> CMat {
        let mut f = CMat::identity(self.d, self.d).scale((1.0 - self.lambda) / self.d as f64);
        f[(k, k)] += Complex64::new(self.lambda, 0.0);
        f
    }

    fn sqrt_effect(&self, k: usize) -> CMat {
        self.effect(k).map(|z| Complex64::new(z.re.sqrt(), 0.0))
    }

    fn levels(&self, q: i32) -> Vec<usize> {
        (0..self.d).filter(|&k| if q < 0 { k <= self.x } else { k > self.x }).collect()
    }

    fn evolve(&self, rho: &CMat, steps: &[bool]) -> CMat {
        let mut out = rho.clone();
        for &full in steps {
            let u = if full { &self.u_pi } else { &self.u_half };
            out = u * out * u.adjoint();
        }
        out
    }

    fn prob(&self, rho: &CMat, q: i32) -> f64 {
        self.levels(q)
            .into_iter()
            .map(|k| (self.effect(k) * rho).trace().re)
            .sum()
    }

    /// Steps to reach time 1, 2, 3 from t = 0; `true` is π, `false` π/2.
    fn path(t: usize) -> &'static [bool] {
        match t {
            1 => &[true],
            2 => &[true, false],
            _ => &[true, false, false],
        }
    }

    pub fn single(&self, t: usize, q: i32) -> f64 {
        self.prob(&self.evolve(&self.rho0, Self::path(t)), q)
    }

    pub fn joint(&self, ta: usize, tb: usize, qa: i32, qb: i32) -> f64 {
        let at_a = self.evolve(&self.rho0, Self::path(ta));
        let gap = &Self::path(tb)[Self::path(ta).len()..];
        let mut total = 0.0;
        for k in self.levels(qa) {
            let s = self.sqrt_effect(k);
            let branch = &s * &at_a * &s;
            total += self.prob(&self.evolve(&branch, gap), qb);
        }
        total
    }

    pub fn correlator(&self, ta: usize, tb: usize) -> f64 {
        let mut c = 0.0;
        for qa in [-1, 1] {
            for qb in [-1, 1] {
                c += (qa * qb) as f64 * self.joint(ta, tb, qa, qb);
            }
        }
        c
    }

    pub fn value(&self, q: Quantity) -> f64 {
        match q {
            Quantity::Lgi => self.correlator(1, 2) + self.correlator(2, 3) - self.correlator(1, 3),
            Quantity::Wlgi => self.joint(2, 3, 1, 1) - self.joint(1, 2, -1, 1) - self.joint(1, 3, 1, 1),
            Quantity::Nsit => self.single(3, -1) - self.joint(2, 3, 1, -1) - self.joint(2, 3, -1, -1),
        }
    }
}

pub fn spin(twice_j: u32) -> SpinQuantumNumber {
    SpinQuantumNumber::from_twice(twice_j)
}
