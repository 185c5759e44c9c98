//! Closed-form K_LGI, K_WLGI and NSIT values for the `x = 0` grouping.
//!
//! Every expression is built from
//!
//! ```text
//! r(j) = (4j)! / (4^{2j} ((2j)!)²) = C(4j, 2j) / 4^{2j}
//! ```
//!
//! and the powers `a = 4^{−j}`, `b = 16^{−j}`. The raw expressions carry
//! factors like `16^j ((2j)!)²` that overflow f64 from j ≈ 43; here they are
//! divided through so only `r`, `a`, `b` and polynomials in j, λ, v remain.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quantities::{Engine, Params, Quantity, ViolationReport};
use crate::spin::SpinQuantumNumber;

/// Stirling remainder `μ(k) = ln k! − (k ln k − k + ½ ln 2πk)`.
fn stirling_remainder(k: f64) -> f64 {
    let inv = 1.0 / k;
    let inv2 = inv * inv;
    inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0))))
}

/// Below this, `ln k!` is summed exactly and `r` is taken as a product.
const DIRECT_LIMIT: u64 = 64;

/// `ln k!`.
pub fn ln_factorial(k: u64) -> f64 {
    if k < DIRECT_LIMIT {
        (2..=k).map(|i| (i as f64).ln()).sum()
    } else {
        let kf = k as f64;
        kf * kf.ln() - kf + 0.5 * (2.0 * PI * kf).ln() + stirling_remainder(kf)
    }
}

/// `ln r(j)` as `ln (4j)! − 2 ln (2j)! − 4j ln 2`.
///
/// With `n = 2j`, the leading Stirling terms of the three log-factorials
/// cancel exactly to `−½ ln(πn)`, leaving `μ(2n) − 2μ(n)`; this avoids the
/// catastrophic cancellation of subtracting numbers of size `4j ln 4j`.
pub fn ln_ratio_r(j: SpinQuantumNumber) -> f64 {
    let n = j.twice_j() as u64;
    if n < DIRECT_LIMIT {
        (1..=n).map(|k| ((2 * k - 1) as f64 / (2 * k) as f64).ln()).sum()
    } else {
        let nf = n as f64;
        -0.5 * (PI * nf).ln() + stirling_remainder(2.0 * nf) - 2.0 * stirling_remainder(nf)
    }
}

pub fn ratio_r(j: SpinQuantumNumber) -> f64 {
    ln_ratio_r(j).exp()
}

/// `(4^{−j}, 16^{−j})`.
fn inverse_powers(j: SpinQuantumNumber) -> (f64, f64) {
    let a = (-(j.twice_j() as f64)).exp2();
    (a, a * a)
}

fn check_unit(value: f64, err: fn(f64) -> Error) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(err(value))
    }
}

pub fn cf_lgi_sharp(j: SpinQuantumNumber) -> f64 {
    let (a, b) = inverse_powers(j);
    3.0 + 4.0 * b - 4.0 * a - 2.0 * ratio_r(j)
}

pub fn cf_wlgi_sharp(j: SpinQuantumNumber) -> f64 {
    let (a, b) = inverse_powers(j);
    1.0 + b - a - ratio_r(j)
}

/// `√(1 − λ)·√(1 + 2jλ)`.
fn cross_root(jf: f64, lambda: f64) -> f64 {
    (1.0 - lambda).sqrt() * (1.0 + 2.0 * jf * lambda).sqrt()
}

pub fn cf_lgi_unsharp(j: SpinQuantumNumber, lambda: f64) -> Result<f64> {
    check_unit(lambda, Error::InvalidSharpness)?;
    let (a, b) = inverse_powers(j);
    let r = ratio_r(j);
    let jf = j.j();
    let l = lambda;
    let s = cross_root(jf, l);
    let poly = 1.0 + 2.0 * (1.0 - 2.0 * b) * l * l
        + 4.0 * jf * jf * (1.0 - 4.0 * a * l + 2.0 * (1.0 + 2.0 * b) * l * l)
        - 4.0 * l * (a - 2.0 * b + s * (1.0 - 2.0 * a + 2.0 * b))
        - 4.0 * jf * (1.0 + 2.0 * l * (2.0 * a - 2.0 * b - 2.0 + s * (1.0 - 2.0 * a + 2.0 * b)));
    let ratio_term = 2.0 * (1.0 + 2.0 * jf) * l * (-2.0 + l - 2.0 * jf * l + 2.0 * s) * r;
    Ok((poly + ratio_term) / (1.0 + 2.0 * jf).powi(2))
}

pub fn cf_wlgi_unsharp(j: SpinQuantumNumber, lambda: f64) -> Result<f64> {
    check_unit(lambda, Error::InvalidSharpness)?;
    let (a, b) = inverse_powers(j);
    let r = ratio_r(j);
    let jf = j.j();
    let l = lambda;
    let s = cross_root(jf, l);
    let poly = 4.0 * jf * jf * l * (-a + b * l + l)
        - l * (-2.0 * b + a - 1.0 + b * l + s * (2.0 * b - 2.0 * a + 2.0))
        - 2.0 * jf * (1.0 + l * (-2.0 * b + 2.0 * a - 3.0 + s * (2.0 * b - 2.0 * a + 2.0)));
    let ratio_term = (1.0 + 2.0 * jf) * l * (-2.0 + l - 2.0 * jf * l + 2.0 * s) * r;
    Ok((poly + ratio_term) / (1.0 + 2.0 * jf).powi(2))
}

pub fn cf_lgi_mixed(j: SpinQuantumNumber, v: f64) -> Result<f64> {
    check_unit(v, Error::InvalidVisibility)?;
    let (a, b) = inverse_powers(j);
    let r = ratio_r(j);
    let jf = j.j();
    let poly = 8.0 * a - 3.0
        + 2.0 * (2.0 * b - 6.0 * a + 3.0) * v
        + 2.0 * jf * (1.0 + 2.0 * (2.0 * b - 2.0 * a + 1.0) * v);
    Ok((poly - 2.0 * (1.0 + 2.0 * jf) * v * r) / (1.0 + 2.0 * jf))
}

pub fn cf_wlgi_mixed(j: SpinQuantumNumber, v: f64) -> Result<f64> {
    check_unit(v, Error::InvalidVisibility)?;
    let (a, b) = inverse_powers(j);
    let r = ratio_r(j);
    let jf = j.j();
    let poly = 2.0 * a - 1.0 + (b + 2.0 - 3.0 * a + 2.0 * jf * (b - a + 1.0)) * v;
    Ok((poly - (1.0 + 2.0 * jf) * v * r) / (1.0 + 2.0 * jf))
}

pub fn cf_nsit_sharp(j: SpinQuantumNumber) -> f64 {
    1.0 - ratio_r(j)
}

pub fn cf_nsit_unsharp(j: SpinQuantumNumber, lambda: f64) -> Result<f64> {
    check_unit(lambda, Error::InvalidSharpness)?;
    let jf = j.j();
    let s = cross_root(jf, lambda);
    Ok(lambda * (2.0 + (2.0 * jf - 1.0) * lambda - 2.0 * s) * (1.0 - ratio_r(j)) / (1.0 + 2.0 * jf))
}

pub fn cf_nsit_mixed(j: SpinQuantumNumber, v: f64) -> Result<f64> {
    check_unit(v, Error::InvalidVisibility)?;
    Ok(v * (1.0 - ratio_r(j)))
}

/// Large-j limit of the violation: `2vλ²` for LGI, `vλ²` for WLGI and NSIT.
///
/// Reduces to `2λ²`/`λ²` at `v = 1` and `2v`/`v` at `λ = 1`. For general
/// `(λ, v)` the violation is affine in v and vanishes at v = 0 in the limit,
/// which gives the product form.
pub fn asymptotic_limit(quantity: Quantity, lambda: f64, v: f64) -> Result<f64> {
    check_unit(lambda, Error::InvalidSharpness)?;
    check_unit(v, Error::InvalidVisibility)?;
    let scale = match quantity {
        Quantity::Lgi => 2.0,
        Quantity::Wlgi | Quantity::Nsit => 1.0,
    };
    Ok(scale * v * lambda * lambda)
}

/// Closed-form value for a parameter point.
///
/// Available for `x = 0` with either `λ = 1` or `v = 1`.
pub fn closed_form_value(params: &Params, quantity: Quantity) -> Result<f64> {
    params.validate()?;
    if params.x != 0 {
        return Err(Error::ClosedFormUnavailable(format!(
            "grouping x = {} (only x = 0 has a closed form)",
            params.x
        )));
    }
    let j = params.j;
    match (params.lambda == 1.0, params.v == 1.0) {
        (true, true) => Ok(match quantity {
            Quantity::Lgi => cf_lgi_sharp(j),
            Quantity::Wlgi => cf_wlgi_sharp(j),
            Quantity::Nsit => cf_nsit_sharp(j),
        }),
        (false, true) => match quantity {
            Quantity::Lgi => cf_lgi_unsharp(j, params.lambda),
            Quantity::Wlgi => cf_wlgi_unsharp(j, params.lambda),
            Quantity::Nsit => cf_nsit_unsharp(j, params.lambda),
        },
        (true, false) => match quantity {
            Quantity::Lgi => cf_lgi_mixed(j, params.v),
            Quantity::Wlgi => cf_wlgi_mixed(j, params.v),
            Quantity::Nsit => cf_nsit_mixed(j, params.v),
        },
        (false, false) => Err(Error::ClosedFormUnavailable(format!(
            "unsharp (lambda = {}) and mixed (v = {}) together",
            params.lambda, params.v
        ))),
    }
}

pub fn closed_form(params: &Params, quantity: Quantity) -> Result<ViolationReport> {
    let value = closed_form_value(params, quantity)?;
    Ok(ViolationReport::new(quantity, value, Engine::ClosedForm, *params))
}
