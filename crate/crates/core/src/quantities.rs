//! K_LGI, K_WLGI and the NSIT left-hand side from density-matrix evolution of
//! the three-time protocol (t₁ at Ωt = π, then two π/2 intervals).
//!
//! Two-time quantities are pairwise runs: only the two named times carry a
//! measurement, the remaining slot contributes unitary evolution only.
//!
//! [`two_time_joint`], [`single_time_prob`] and [`correlator`] follow the
//! state forward step by step. [`ProtocolEvaluator`] computes the same numbers
//! after caching everything that does not depend on λ: the evolved states at
//! t₁, t₂, t₃ and the Heisenberg-evolved group projectors `U† P_{Q=−1} U`.
//! With those cached, one λ costs O(d²).

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::measurement::{collapse_group, GroupingScheme, MeasurementSetting, Outcome};
use crate::spin::{SpinContext, SpinQuantumNumber, Step};
use crate::state::DensityMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    Lgi,
    Wlgi,
    Nsit,
}

impl Quantity {
    pub const ALL: [Quantity; 3] = [Quantity::Lgi, Quantity::Wlgi, Quantity::Nsit];

    /// Macrorealist bound: violation = value − bound.
    pub fn bound(self) -> f64 {
        match self {
            Quantity::Lgi => 1.0,
            Quantity::Wlgi | Quantity::Nsit => 0.0,
        }
    }

    pub fn algebraic_max(self) -> f64 {
        match self {
            Quantity::Lgi => 3.0,
            Quantity::Wlgi | Quantity::Nsit => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Quantity::Lgi => "lgi",
            Quantity::Wlgi => "wlgi",
            Quantity::Nsit => "nsit",
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quantity {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "lgi" => Ok(Quantity::Lgi),
            "wlgi" => Ok(Quantity::Wlgi),
            "nsit" => Ok(Quantity::Nsit),
            other => Err(format!("unknown quantity '{other}' (expected lgi, wlgi or nsit)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    #[serde(rename = "sim")]
    Simulation,
    #[serde(rename = "closed")]
    ClosedForm,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Simulation => "sim",
            Engine::ClosedForm => "closed",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Time {
    T1,
    T2,
    T3,
}

impl Time {
    /// Evolution from preparation to this time.
    pub fn steps(self) -> &'static [Step] {
        match self {
            Time::T1 => &[Step::Pi],
            Time::T2 => &[Step::Pi, Step::HalfPi],
            Time::T3 => &[Step::Pi, Step::HalfPi, Step::HalfPi],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pair {
    T1T2,
    T2T3,
    T1T3,
}

impl Pair {
    pub const ALL: [Pair; 3] = [Pair::T1T2, Pair::T2T3, Pair::T1T3];

    pub fn first(self) -> Time {
        match self {
            Pair::T1T2 | Pair::T1T3 => Time::T1,
            Pair::T2T3 => Time::T2,
        }
    }

    /// Evolution between the two measured times.
    pub fn gap(self) -> &'static [Step] {
        match self {
            Pair::T1T2 | Pair::T2T3 => &[Step::HalfPi],
            Pair::T1T3 => &[Step::HalfPi, Step::HalfPi],
        }
    }
}

/// Fixed π, π/2, π/2 protocol with initial state `v|−j⟩⟨−j| + (1−v)I/d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    visibility: f64,
}

impl ProtocolSpec {
    pub fn new(visibility: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&visibility) {
            return Err(Error::InvalidVisibility(visibility));
        }
        Ok(Self { visibility })
    }

    pub fn pure() -> Self {
        Self { visibility: 1.0 }
    }

    pub fn visibility(&self) -> f64 {
        self.visibility
    }

    pub fn initial_state(&self, ctx: &SpinContext) -> DensityMatrix {
        DensityMatrix::projector(ctx.dim(), 0)
            .with_white_noise(self.visibility)
            .expect("visibility validated on construction")
    }
}

/// Full parameter point `(j, λ, v, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub j: SpinQuantumNumber,
    pub lambda: f64,
    pub v: f64,
    pub x: usize,
}

impl Params {
    pub fn sharp_pure(j: SpinQuantumNumber) -> Self {
        Self {
            j,
            lambda: 1.0,
            v: 1.0,
            x: 0,
        }
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }

    pub fn with_v(self, v: f64) -> Self {
        Self { v, ..self }
    }

    pub fn with_x(self, x: usize) -> Self {
        Self { x, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        MeasurementSetting::new(self.j.dim(), self.lambda)?;
        ProtocolSpec::new(self.v)?;
        GroupingScheme::new(self.j, self.x)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub quantity: Quantity,
    pub value: f64,
    pub violation: f64,
    pub engine: Engine,
    pub params: Params,
}

impl ViolationReport {
    pub fn new(quantity: Quantity, value: f64, engine: Engine, params: Params) -> Self {
        Self {
            quantity,
            value,
            violation: value - quantity.bound(),
            engine,
            params,
        }
    }

    pub fn violates(&self) -> bool {
        self.violation > 0.0
    }
}

fn evolve_matrix(ctx: &SpinContext, rho: &ComplexMatrix, steps: &[Step]) -> ComplexMatrix {
    steps
        .iter()
        .fold(rho.clone(), |acc, &s| ctx.unitary(s).conjugate(&acc))
}

fn outcome_probability(
    setting: &MeasurementSetting,
    scheme: &GroupingScheme,
    rho: &ComplexMatrix,
    q: Outcome,
) -> f64 {
    rho.diagonal_re()
        .iter()
        .zip(setting.group_weights(scheme, q))
        .map(|(p, w)| p * w)
        .sum()
}

fn check_inputs(
    ctx: &SpinContext,
    setting: &MeasurementSetting,
    scheme: &GroupingScheme,
) -> Result<()> {
    for found in [setting.dim(), scheme.spin().dim()] {
        if found != ctx.dim() {
            return Err(Error::DimensionMismatch {
                expected: ctx.dim(),
                found,
            });
        }
    }
    Ok(())
}

/// `P(Q_a = qa, Q_b = qb)` with measurements only at the two times of `pair`.
pub fn two_time_joint(
    ctx: &SpinContext,
    setting: &MeasurementSetting,
    scheme: &GroupingScheme,
    protocol: &ProtocolSpec,
    pair: Pair,
    qa: Outcome,
    qb: Outcome,
) -> Result<f64> {
    check_inputs(ctx, setting, scheme)?;
    let rho0 = protocol.initial_state(ctx).into_matrix();
    let at_first = evolve_matrix(ctx, &rho0, pair.first().steps());
    let branch = collapse_group(setting, scheme, &at_first, qa)?;
    let at_second = evolve_matrix(ctx, &branch.state, pair.gap());
    Ok(outcome_probability(setting, scheme, &at_second, qb))
}

/// `P(Q_t = q)` with no earlier measurement.
pub fn single_time_prob(
    ctx: &SpinContext,
    setting: &MeasurementSetting,
    scheme: &GroupingScheme,
    protocol: &ProtocolSpec,
    time: Time,
    q: Outcome,
) -> Result<f64> {
    check_inputs(ctx, setting, scheme)?;
    let rho0 = protocol.initial_state(ctx).into_matrix();
    let rho = evolve_matrix(ctx, &rho0, time.steps());
    Ok(outcome_probability(setting, scheme, &rho, q))
}

/// `C_ab = Σ qa·qb·P(qa, qb)`.
pub fn correlator(
    ctx: &SpinContext,
    setting: &MeasurementSetting,
    scheme: &GroupingScheme,
    protocol: &ProtocolSpec,
    pair: Pair,
) -> Result<f64> {
    let mut c = 0.0;
    for qa in Outcome::BOTH {
        for qb in Outcome::BOTH {
            c += qa.value()
                * qb.value()
                * two_time_joint(ctx, setting, scheme, protocol, pair, qa, qb)?;
        }
    }
    Ok(c)
}

pub fn evaluate(
    ctx: &SpinContext,
    setting: &MeasurementSetting,
    scheme: &GroupingScheme,
    protocol: &ProtocolSpec,
    quantity: Quantity,
) -> Result<ViolationReport> {
    check_inputs(ctx, setting, scheme)?;
    Ok(ProtocolEvaluator::new(ctx, scheme, protocol)?.evaluate(setting, quantity))
}

/// λ-independent part of the protocol for one `(j, v, x)`.
#[derive(Debug, Clone)]
pub struct ProtocolEvaluator<'a> {
    ctx: &'a SpinContext,
    scheme: GroupingScheme,
    protocol: ProtocolSpec,
    rho_t1: ComplexMatrix,
    rho_t2: ComplexMatrix,
    populations_t3: Vec<f64>,
    /// `U_{π/2}† P₋ U_{π/2}` and `U_π† P₋ U_π`, with `P₋` the Q = −1 projector.
    heisenberg_minus_half_pi: ComplexMatrix,
    heisenberg_minus_pi: ComplexMatrix,
}

/// `U† P_g U` for the projector onto the basis levels `rows`.
fn heisenberg_projector(u: &ComplexMatrix, rows: std::ops::Range<usize>) -> ComplexMatrix {
    let n = u.dim();
    ComplexMatrix::from_fn(n, |a, b| rows.clone().map(|k| u.get(k, a).conj() * u.get(k, b)).sum())
}

impl<'a> ProtocolEvaluator<'a> {
    pub fn new(
        ctx: &'a SpinContext,
        scheme: &GroupingScheme,
        protocol: &ProtocolSpec,
    ) -> Result<Self> {
        if scheme.spin() != ctx.spin() {
            return Err(Error::DimensionMismatch {
                expected: ctx.dim(),
                found: scheme.spin().dim(),
            });
        }
        let rho0 = protocol.initial_state(ctx).into_matrix();
        let rho_t1 = ctx.u_pi().conjugate(&rho0);
        let rho_t2 = ctx.u_half_pi().conjugate(&rho_t1);
        let populations_t3 = ctx.u_half_pi().conjugate_diagonal(&rho_t2);
        let minus = scheme.members(Outcome::Minus);
        Ok(Self {
            ctx,
            scheme: *scheme,
            protocol: *protocol,
            heisenberg_minus_half_pi: heisenberg_projector(ctx.u_half_pi(), minus.clone()),
            heisenberg_minus_pi: heisenberg_projector(ctx.u_pi(), minus),
            rho_t1,
            rho_t2,
            populations_t3,
        })
    }

    pub fn context(&self) -> &SpinContext {
        self.ctx
    }

    pub fn scheme(&self) -> &GroupingScheme {
        &self.scheme
    }

    pub fn protocol(&self) -> &ProtocolSpec {
        &self.protocol
    }

    pub fn setting(&self, lambda: f64) -> Result<MeasurementSetting> {
        MeasurementSetting::new(self.ctx.dim(), lambda)
    }

    pub fn params(&self, setting: &MeasurementSetting) -> Params {
        Params {
            j: self.ctx.spin(),
            lambda: setting.lambda(),
            v: self.protocol.visibility(),
            x: self.scheme.x(),
        }
    }

    fn populations(&self, time: Time) -> Vec<f64> {
        match time {
            Time::T1 => self.rho_t1.diagonal_re(),
            Time::T2 => self.rho_t2.diagonal_re(),
            Time::T3 => self.populations_t3.clone(),
        }
    }

    pub fn single(&self, setting: &MeasurementSetting, time: Time, q: Outcome) -> f64 {
        self.populations(time)
            .iter()
            .zip(setting.group_weights(&self.scheme, q))
            .map(|(p, w)| p * w)
            .sum()
    }

    pub fn joint(&self, setting: &MeasurementSetting, pair: Pair, qa: Outcome, qb: Outcome) -> f64 {
        let state = match pair.first() {
            Time::T1 => &self.rho_t1,
            _ => &self.rho_t2,
        };
        let heis_minus = match pair {
            Pair::T1T3 => &self.heisenberg_minus_pi,
            _ => &self.heisenberg_minus_half_pi,
        };
        let mask = setting.collapse_mask(&self.scheme, qa);
        let (sr, si) = (state.re(), state.im());
        let (hr, hi) = (heis_minus.re(), heis_minus.im());

        // X = W ∘ ρ; need Tr(X) and Tr(A₋ X) = Σ_ab A₋[a,b]·X[b,a].
        let n = state.dim();
        let mut trace_x = 0.0;
        let mut trace_ax = 0.0;
        for a in 0..n {
            trace_x += mask[(a, a)] * sr[(a, a)];
            for b in 0..n {
                let w = mask[(b, a)];
                trace_ax += w * (hr[(a, b)] * sr[(b, a)] - hi[(a, b)] * si[(b, a)]);
            }
        }

        // Σ_{m∈qb} F_m = λ·P_qb + c·I, and U†P₊U = I − U†P₋U.
        let lambda = setting.lambda();
        let size = self.scheme.group_size(qb) as f64;
        let c = if lambda == 1.0 {
            0.0
        } else {
            size * (1.0 - lambda) / n as f64
        };
        let projected = match qb {
            Outcome::Minus => trace_ax,
            Outcome::Plus => trace_x - trace_ax,
        };
        lambda * projected + c * trace_x
    }

    pub fn correlator(&self, setting: &MeasurementSetting, pair: Pair) -> f64 {
        let mut c = 0.0;
        for qa in Outcome::BOTH {
            for qb in Outcome::BOTH {
                c += qa.value() * qb.value() * self.joint(setting, pair, qa, qb);
            }
        }
        c
    }

    pub fn value(&self, setting: &MeasurementSetting, quantity: Quantity) -> f64 {
        use Outcome::{Minus, Plus};
        match quantity {
            Quantity::Lgi => {
                self.correlator(setting, Pair::T1T2) + self.correlator(setting, Pair::T2T3)
                    - self.correlator(setting, Pair::T1T3)
            }
            Quantity::Wlgi => {
                self.joint(setting, Pair::T2T3, Plus, Plus)
                    - self.joint(setting, Pair::T1T2, Minus, Plus)
                    - self.joint(setting, Pair::T1T3, Plus, Plus)
            }
            Quantity::Nsit => {
                self.single(setting, Time::T3, Minus)
                    - (self.joint(setting, Pair::T2T3, Plus, Minus)
                        + self.joint(setting, Pair::T2T3, Minus, Minus))
            }
        }
    }

    pub fn evaluate(&self, setting: &MeasurementSetting, quantity: Quantity) -> ViolationReport {
        ViolationReport::new(
            quantity,
            self.value(setting, quantity),
            Engine::Simulation,
            self.params(setting),
        )
    }

    /// Violation at sharpness `lambda`.
    pub fn violation_at(&self, lambda: f64, quantity: Quantity) -> Result<f64> {
        let setting = self.setting(lambda)?;
        Ok(self.value(&setting, quantity) - quantity.bound())
    }
}

/// Builds the context and evaluates one parameter point by simulation.
pub fn simulate(params: &Params, quantity: Quantity) -> Result<ViolationReport> {
    params.validate()?;
    let ctx = SpinContext::new(params.j)?;
    simulate_in(&ctx, params, quantity)
}

/// As [`simulate`], reusing an existing context for `params.j`.
pub fn simulate_in(ctx: &SpinContext, params: &Params, quantity: Quantity) -> Result<ViolationReport> {
    let scheme = GroupingScheme::new(params.j, params.x)?;
    let protocol = ProtocolSpec::new(params.v)?;
    let setting = MeasurementSetting::new(ctx.dim(), params.lambda)?;
    evaluate(ctx, &setting, &scheme, &protocol, quantity)
}
