//! Threshold sharpness λ_th and threshold visibility v_th.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::closed_form_value;
use crate::error::{Error, Result};
use crate::measurement::GroupingScheme;
use crate::quantities::{Engine, Params, ProtocolEvaluator, ProtocolSpec, Quantity};
use crate::spin::{SpinContext, SpinQuantumNumber};

pub const DEFAULT_SCAN_STEP: f64 = 0.01;
pub const MIN_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variable {
    Lambda,
    Visibility,
}

impl std::str::FromStr for Variable {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "lambda" => Ok(Variable::Lambda),
            "visibility" | "v" => Ok(Variable::Visibility),
            other => Err(format!("unknown variable '{other}' (expected lambda or visibility)")),
        }
    }
}

/// The other parameter is held at 1: λ-thresholds use a pure initial state,
/// v-thresholds use sharp measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdQuery {
    pub quantity: Quantity,
    pub j: SpinQuantumNumber,
    pub x: usize,
    pub variable: Variable,
    pub engine: Engine,
}

impl ThresholdQuery {
    pub fn new(quantity: Quantity, j: SpinQuantumNumber, x: usize, variable: Variable, engine: Engine) -> Result<Self> {
        GroupingScheme::new(j, x)?;
        if engine == Engine::ClosedForm && x != 0 {
            return Err(Error::ClosedFormUnavailable(format!("grouping x = {x}")));
        }
        Ok(Self {
            quantity,
            j,
            x,
            variable,
            engine,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Threshold {
    /// Violation for every value above this one.
    Value(f64),
    /// No violation anywhere on the scanned range, including the endpoint 1.
    NoViolation,
}

impl Threshold {
    pub fn value(self) -> Option<f64> {
        match self {
            Threshold::Value(v) => Some(v),
            Threshold::NoViolation => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub threshold: Threshold,
    /// Sign changes of the violation seen on the coarse scan.
    pub sign_changes: usize,
    /// More than one sign change, or no violation at the endpoint 1 while
    /// violating somewhere below it.
    pub anomaly: bool,
}

/// `f(lo) ≤ 0 < f(hi)`; returns the midpoint of the final bracket.
pub fn bisect(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_nan() || tol < MIN_TOLERANCE {
        return Err(Error::InvalidTolerance(tol));
    }
    Ok(())
}

/// Violation as a function of λ (v = 1) for one query.
fn lambda_violation<'a>(q: &ThresholdQuery, ctx: Option<&'a SpinContext>) -> Result<Box<dyn Fn(f64) -> f64 + Sync + 'a>> {
    match q.engine {
        Engine::Simulation => {
            let ctx = ctx.expect("simulation needs a context");
            let scheme = GroupingScheme::new(q.j, q.x)?;
            let eval = ProtocolEvaluator::new(ctx, &scheme, &ProtocolSpec::pure())?;
            let quantity = q.quantity;
            Ok(Box::new(move |lambda| {
                eval.violation_at(lambda, quantity)
                    .expect("lambda stays inside [0, 1]")
            }))
        }
        Engine::ClosedForm => {
            let params = Params::sharp_pure(q.j);
            let quantity = q.quantity;
            Ok(Box::new(move |lambda| {
                closed_form_value(&params.with_lambda(lambda), quantity)
                    .expect("closed form available for x = 0, v = 1")
                    - quantity.bound()
            }))
        }
    }
}

/// Violation at `v ∈ {0, 1}` (λ = 1).
fn visibility_endpoints(q: &ThresholdQuery, ctx: Option<&SpinContext>) -> Result<(f64, f64)> {
    let at = |v: f64| -> Result<f64> {
        let params = Params::sharp_pure(q.j).with_x(q.x).with_v(v);
        let value = match q.engine {
            Engine::Simulation => {
                let ctx = ctx.expect("simulation needs a context");
                crate::quantities::simulate_in(ctx, &params, q.quantity)?.value
            }
            Engine::ClosedForm => closed_form_value(&params, q.quantity)?,
        };
        Ok(value - q.quantity.bound())
    };
    Ok((at(0.0)?, at(1.0)?))
}

pub fn find_threshold(q: &ThresholdQuery, tol: f64) -> Result<ThresholdResult> {
    find_threshold_with_step(q, tol, DEFAULT_SCAN_STEP)
}

pub fn find_threshold_with_step(q: &ThresholdQuery, tol: f64, step: f64) -> Result<ThresholdResult> {
    let ctx = match q.engine {
        Engine::Simulation => Some(SpinContext::new(q.j)?),
        Engine::ClosedForm => None,
    };
    find_threshold_in(q, ctx.as_ref(), tol, step)
}

/// As [`find_threshold_with_step`], reusing a prebuilt context for the
/// simulation engine.
pub fn find_threshold_in(q: &ThresholdQuery, ctx: Option<&SpinContext>, tol: f64, step: f64) -> Result<ThresholdResult> {
    check_tol(tol)?;
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidScanStep(step));
    }
    let owned;
    let ctx = match (q.engine, ctx) {
        (Engine::Simulation, Some(c)) => {
            if c.spin() != q.j {
                return Err(Error::DimensionMismatch {
                    expected: q.j.dim(),
                    found: c.dim(),
                });
            }
            Some(c)
        }
        (Engine::Simulation, None) => {
            owned = SpinContext::new(q.j)?;
            Some(&owned)
        }
        (Engine::ClosedForm, _) => None,
    };
    match q.variable {
        Variable::Lambda => {
            let f = lambda_violation(q, ctx)?;
            Ok(scan_and_bisect(&*f, tol, step))
        }
        Variable::Visibility => {
            let (at0, at1) = visibility_endpoints(q, ctx)?;
            Ok(ThresholdResult {
                threshold: affine_root(at0, at1),
                sign_changes: usize::from((at0 > 0.0) != (at1 > 0.0)),
                anomaly: at0 > 0.0 && at1 <= 0.0,
            })
        }
    }
}

/// Zero of `v ↦ at0 + (at1 − at0)·v` on [0, 1].
pub fn affine_root(at0: f64, at1: f64) -> Threshold {
    if at1 <= 0.0 {
        return Threshold::NoViolation;
    }
    if at0 >= 0.0 {
        return Threshold::Value(0.0);
    }
    Threshold::Value((-at0 / (at1 - at0)).clamp(0.0, 1.0))
}

/// Coarse scan over `(0, 1]`, then bisection on the last crossing from
/// no-violation to violation.
pub fn scan_and_bisect(f: &(dyn Fn(f64) -> f64 + Sync), tol: f64, step: f64) -> ThresholdResult {
    let n = (1.0 / step).round().max(1.0) as usize;
    let grid: Vec<f64> = (1..=n).map(|i| if i == n { 1.0 } else { i as f64 / n as f64 }).collect();
    let values: Vec<f64> = grid.par_iter().map(|&x| f(x)).collect();
    let violating: Vec<bool> = values.iter().map(|&v| v > 0.0).collect();

    let sign_changes = violating.windows(2).filter(|w| w[0] != w[1]).count();
    if violating.iter().all(|&b| !b) {
        return ThresholdResult {
            threshold: Threshold::NoViolation,
            sign_changes,
            anomaly: false,
        };
    }
    if violating.iter().all(|&b| b) {
        return ThresholdResult {
            threshold: Threshold::Value(0.0),
            sign_changes,
            anomaly: false,
        };
    }

    let last = violating.len() - 1;
    if !violating[last] {
        return ThresholdResult {
            threshold: Threshold::Value(1.0),
            sign_changes,
            anomaly: true,
        };
    }
    let top = (0..last)
        .rev()
        .find(|&i| !violating[i] && violating[i + 1])
        .expect("a non-violating grid point exists below a violating one");
    let threshold = bisect(f, grid[top], grid[top + 1], tol);
    ThresholdResult {
        threshold: Threshold::Value(threshold),
        sign_changes,
        anomaly: sign_changes > 1,
    }
}

/// Bisection in v on [0, 1]; oracle for the affine two-point solve.
pub fn bisect_visibility(q: &ThresholdQuery, tol: f64) -> Result<Threshold> {
    check_tol(tol)?;
    let ctx = match q.engine {
        Engine::Simulation => Some(SpinContext::new(q.j)?),
        Engine::ClosedForm => None,
    };
    let scheme = GroupingScheme::new(q.j, q.x)?;
    let violation = |v: f64| -> f64 {
        let params = Params::sharp_pure(q.j).with_x(q.x).with_v(v);
        let value = match q.engine {
            Engine::Simulation => {
                let ctx = ctx.as_ref().expect("context");
                let eval = ProtocolEvaluator::new(ctx, &scheme, &ProtocolSpec::new(v).expect("v in range"))
                    .expect("consistent inputs");
                eval.value(&eval.setting(1.0).expect("sharp"), q.quantity)
            }
            Engine::ClosedForm => closed_form_value(&params, q.quantity).expect("available"),
        };
        value - q.quantity.bound()
    };
    if violation(1.0) <= 0.0 {
        return Ok(Threshold::NoViolation);
    }
    if violation(0.0) > 0.0 {
        return Ok(Threshold::Value(0.0));
    }
    Ok(Threshold::Value(bisect(violation, 0.0, 1.0, tol)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_root() {
        let r = bisect(|x| x - 0.3141, 0.0, 1.0, 1e-9);
        assert!((r - 0.3141).abs() < 1e-9);
    }

    #[test]
    fn scan_picks_largest_crossing_and_flags_it() {
        // Violating on (0.2, 0.4) and (0.7, 1].
        let f = |x: f64| if (x > 0.2 && x < 0.4) || x > 0.7 { 1.0 } else { -1.0 };
        let r = scan_and_bisect(&f, 1e-6, 0.01);
        assert!((r.threshold.value().unwrap() - 0.7).abs() < 1e-5);
        assert_eq!(r.sign_changes, 3);
        assert!(r.anomaly);
    }

    #[test]
    fn scan_edge_cases() {
        let always = scan_and_bisect(&|_| 1.0, 1e-6, 0.01);
        assert_eq!(always.threshold, Threshold::Value(0.0));
        let never = scan_and_bisect(&|_| -1.0, 1e-6, 0.01);
        assert_eq!(never.threshold, Threshold::NoViolation);
        let hump = scan_and_bisect(&|x| if x < 0.5 { 1.0 } else { -1.0 }, 1e-6, 0.01);
        assert_eq!(hump.threshold, Threshold::Value(1.0));
        assert!(hump.anomaly);
    }

    #[test]
    fn affine_root_cases() {
        assert_eq!(affine_root(-1.0, 1.0), Threshold::Value(0.5));
        assert_eq!(affine_root(0.0, 1.0), Threshold::Value(0.0));
        assert_eq!(affine_root(-1.0, 0.0), Threshold::NoViolation);
    }

    #[test]
    fn tolerance_floor() {
        let q = ThresholdQuery::new(Quantity::Lgi, SpinQuantumNumber::integer(1), 0, Variable::Lambda, Engine::ClosedForm).unwrap();
        assert!(matches!(find_threshold(&q, 1e-7), Err(Error::InvalidTolerance(_))));
    }

    #[test]
    fn closed_engine_needs_lowest_grouping() {
        let err = ThresholdQuery::new(Quantity::Lgi, SpinQuantumNumber::integer(10), 2, Variable::Lambda, Engine::ClosedForm);
        assert!(matches!(err, Err(Error::ClosedFormUnavailable(_))));
    }

    #[test]
    fn spin_one_lgi_threshold() {
        for engine in [Engine::Simulation, Engine::ClosedForm] {
            let q = ThresholdQuery::new(Quantity::Lgi, SpinQuantumNumber::integer(1), 0, Variable::Lambda, engine).unwrap();
            let r = find_threshold(&q, 1e-6).unwrap();
            assert!((r.threshold.value().unwrap() - 0.85).abs() <= 0.005);
            assert_eq!(r.sign_changes, 1);
            assert!(!r.anomaly);
        }
    }

    #[test]
    fn nsit_violates_for_every_lambda() {
        let q = ThresholdQuery::new(Quantity::Nsit, SpinQuantumNumber::integer(3), 0, Variable::Lambda, Engine::Simulation).unwrap();
        assert_eq!(find_threshold(&q, 1e-6).unwrap().threshold, Threshold::Value(0.0));
    }
}
