//! Parameter grids, threshold search and regeneration of the published tables.

mod tables;
mod threshold;

pub use tables::{reproduce_table, table_tolerance, PublishedValue, TABLE_IDS};
pub use threshold::{
    affine_root, bisect, bisect_visibility, find_threshold, find_threshold_in, find_threshold_with_step, scan_and_bisect,
    Threshold, ThresholdQuery, ThresholdResult, Variable, DEFAULT_SCAN_STEP, MIN_TOLERANCE,
};

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::closed_form_value;
use crate::error::{Error, Result};
use crate::measurement::GroupingScheme;
use crate::quantities::{Engine, Params, ProtocolEvaluator, ProtocolSpec, Quantity};
use crate::spin::{SpinContext, SpinQuantumNumber};

/// What a row's `result` holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellKind {
    /// `value − bound`.
    Violation,
    LambdaThreshold,
    VisibilityThreshold,
    /// Large-j limit of the violation.
    Asymptotic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub quantity: Quantity,
    pub kind: CellKind,
    /// `None` for the j → ∞ row.
    pub j: Option<SpinQuantumNumber>,
    pub lambda: f64,
    pub v: f64,
    pub x: usize,
    /// K_LGI / K_WLGI / NSIT LHS, for violation cells.
    pub value: Option<f64>,
    /// Violation or threshold; `None` is the no-violation threshold sentinel.
    pub result: Option<f64>,
    pub engine: Engine,
    /// Closed-form counterpart of `result` when one exists.
    pub closed_form: Option<f64>,
    pub published: Option<PublishedValue>,
    pub tolerance: Option<f64>,
}

impl SweepRow {
    /// `|result − published|`; `None` without a numeric target.
    pub fn deviation(&self) -> Option<f64> {
        match (self.published, self.result) {
            (Some(PublishedValue::Number { value, .. }), Some(r)) => Some((r - value).abs()),
            _ => None,
        }
    }

    /// Whether the row reproduces its published target within
    /// `tolerance + slack`; rows without a target count as matching.
    pub fn matches_published(&self, slack: f64) -> bool {
        let tol = self.tolerance.unwrap_or(0.0) + slack;
        match self.published {
            None => true,
            Some(PublishedValue::NoViolation) => match self.kind {
                CellKind::Violation => self.result.is_none_or(|r| r <= 0.0),
                _ => self.result.is_none(),
            },
            Some(PublishedValue::Number { .. }) => self.deviation().is_some_and(|d| d <= tol),
        }
    }

    /// `|sim − closed|` when both are present.
    pub fn engine_gap(&self) -> Option<f64> {
        Some((self.result? - self.closed_form?).abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub engine: Engine,
    pub tolerance: f64,
    /// Excluded from serialized output so identical inputs give identical bytes.
    #[serde(skip)]
    pub wall_time_seconds: f64,
    pub anomalies: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub metadata: SweepMetadata,
}

/// Cartesian grid over `(j, λ, v, x, quantity)`, iterated in that nesting order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub js: Vec<SpinQuantumNumber>,
    pub lambdas: Vec<f64>,
    pub vs: Vec<f64>,
    pub xs: Vec<usize>,
    pub quantities: Vec<Quantity>,
}

impl SweepGrid {
    pub fn points(&self) -> Vec<(Params, Quantity)> {
        let mut out = Vec::new();
        for &j in &self.js {
            for &lambda in &self.lambdas {
                for &v in &self.vs {
                    for &x in &self.xs {
                        for &q in &self.quantities {
                            out.push((Params { j, lambda, v, x }, q));
                        }
                    }
                }
            }
        }
        out
    }
}

/// Evaluates every grid point; invalid points are an error, never skipped.
pub fn sweep(grid: &SweepGrid, engine: Engine) -> Result<SweepResult> {
    sweep_with_j_max(grid, engine, crate::spin::DEFAULT_J_MAX)
}

pub fn sweep_with_j_max(grid: &SweepGrid, engine: Engine, j_max: f64) -> Result<SweepResult> {
    let start = Instant::now();
    let points = grid.points();
    for (p, _) in &points {
        p.validate()?;
        if engine == Engine::ClosedForm {
            closed_form_value(p, Quantity::Lgi)?;
        }
    }

    let mut rows = Vec::with_capacity(points.len());
    for &j in &grid.js {
        let ctx = match engine {
            Engine::Simulation => Some(SpinContext::with_j_max(j, j_max)?),
            Engine::ClosedForm => None,
        };
        let chunk: Vec<&(Params, Quantity)> = points.iter().filter(|(p, _)| p.j == j).collect();
        let evaluated: Result<Vec<SweepRow>> = chunk
            .par_iter()
            .map(|(p, q)| evaluate_row(ctx.as_ref(), p, *q, engine))
            .collect();
        rows.extend(evaluated?);
    }
    Ok(SweepResult {
        rows,
        metadata: SweepMetadata {
            engine,
            tolerance: 0.0,
            wall_time_seconds: start.elapsed().as_secs_f64(),
            anomalies: Vec::new(),
        },
    })
}

fn evaluate_row(ctx: Option<&SpinContext>, p: &Params, q: Quantity, engine: Engine) -> Result<SweepRow> {
    let value = match engine {
        Engine::Simulation => {
            crate::quantities::simulate_in(ctx.expect("context for simulation"), p, q)?.value
        }
        Engine::ClosedForm => closed_form_value(p, q)?,
    };
    Ok(SweepRow {
        quantity: q,
        kind: CellKind::Violation,
        j: Some(p.j),
        lambda: p.lambda,
        v: p.v,
        x: p.x,
        value: Some(value),
        result: Some(value - q.bound()),
        engine,
        closed_form: None,
        published: None,
        tolerance: None,
    })
}

/// Outcome of probing the most symmetric groupings for one j.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoarseGrainingReport {
    pub j: SpinQuantumNumber,
    /// LGI violation at x = floor(j).
    pub lgi_at_floor: f64,
    /// LGI violation at x = floor(j) − 1.
    pub lgi_below_floor: f64,
    pub wlgi_at_floor: f64,
    pub nsit_at_floor: f64,
}

/// Tolerance for "no LGI violation" at x = floor(j).
pub const EXTREME_COARSE_TOLERANCE: f64 = 1e-10;

impl CoarseGrainingReport {
    pub fn lgi_vanishes_at_floor(&self) -> bool {
        self.lgi_at_floor <= EXTREME_COARSE_TOLERANCE
    }

    pub fn lgi_survives_below_floor(&self) -> bool {
        self.lgi_below_floor > 0.0
    }

    pub fn passed(&self) -> bool {
        self.lgi_vanishes_at_floor() && self.lgi_survives_below_floor()
    }
}

/// Sharp, pure-state LGI/WLGI/NSIT violations at x = floor(j) and LGI at
/// x = floor(j) − 1.
pub fn lgi_extreme_coarse_check(j: SpinQuantumNumber) -> Result<CoarseGrainingReport> {
    if j.floor() < 1 {
        return Err(Error::InvalidGrouping { x: 1, max: j.floor() });
    }
    let ctx = SpinContext::new(j)?;
    let at = |x: usize| -> Result<ProtocolEvaluator<'_>> {
        ProtocolEvaluator::new(&ctx, &GroupingScheme::new(j, x)?, &ProtocolSpec::pure())
    };
    let top = at(j.floor())?;
    let below = at(j.floor() - 1)?;
    Ok(CoarseGrainingReport {
        j,
        lgi_at_floor: top.violation_at(1.0, Quantity::Lgi)?,
        lgi_below_floor: below.violation_at(1.0, Quantity::Lgi)?,
        wlgi_at_floor: top.violation_at(1.0, Quantity::Wlgi)?,
        nsit_at_floor: top.violation_at(1.0, Quantity::Nsit)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_order_is_nested() {
        let grid = SweepGrid {
            js: vec![SpinQuantumNumber::integer(1), SpinQuantumNumber::integer(2)],
            lambdas: vec![1.0, 0.5],
            vs: vec![1.0],
            xs: vec![0],
            quantities: vec![Quantity::Lgi, Quantity::Nsit],
        };
        let res = sweep(&grid, Engine::Simulation).unwrap();
        assert_eq!(res.rows.len(), 8);
        assert_eq!(res.rows[0].quantity, Quantity::Lgi);
        assert_eq!(res.rows[1].quantity, Quantity::Nsit);
        assert_eq!(res.rows[2].lambda, 0.5);
        assert_eq!(res.rows[4].j, Some(SpinQuantumNumber::integer(2)));
        assert!((res.rows[0].result.unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn invalid_points_are_errors() {
        let grid = SweepGrid {
            js: vec![SpinQuantumNumber::integer(1)],
            lambdas: vec![1.0],
            vs: vec![1.0],
            xs: vec![0, 2],
            quantities: vec![Quantity::Lgi],
        };
        assert!(matches!(sweep(&grid, Engine::Simulation), Err(Error::InvalidGrouping { .. })));
        let grid = SweepGrid { xs: vec![1], ..grid };
        assert!(matches!(sweep(&grid, Engine::ClosedForm), Err(Error::ClosedFormUnavailable(_))));
    }

    #[test]
    fn extreme_coarse_half_integer() {
        let r = lgi_extreme_coarse_check(SpinQuantumNumber::from_twice(3)).unwrap();
        assert!(r.lgi_at_floor <= EXTREME_COARSE_TOLERANCE);
        assert!(lgi_extreme_coarse_check(SpinQuantumNumber::from_twice(1)).is_err());
    }

    #[test]
    fn extreme_coarse_spin_ten() {
        let r = lgi_extreme_coarse_check(SpinQuantumNumber::integer(10)).unwrap();
        assert!(r.passed());
        assert!(r.wlgi_at_floor > 0.0);
        assert!(r.nsit_at_floor > 0.0);
    }

    #[test]
    fn row_matching() {
        let mut row = SweepRow {
            quantity: Quantity::Lgi,
            kind: CellKind::Violation,
            j: Some(SpinQuantumNumber::integer(1)),
            lambda: 1.0,
            v: 0.4,
            x: 0,
            value: Some(0.8),
            result: Some(-0.2),
            engine: Engine::Simulation,
            closed_form: Some(-0.2),
            published: Some(PublishedValue::NoViolation),
            tolerance: Some(0.005),
        };
        assert!(row.matches_published(0.0));
        row.result = Some(0.01);
        assert!(!row.matches_published(0.0));
        row.published = Some(PublishedValue::Number { value: 0.0125, decimals: 2 });
        assert!(row.matches_published(0.0));
        assert!((row.deviation().unwrap() - 0.0025).abs() < 1e-15);
    }
}
