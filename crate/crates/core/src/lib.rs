//! Quantum violations of macrorealism for a spin-j system precessing about x
//! and measured along z.
//!
//! Three necessary conditions are evaluated on a three-time protocol
//! (Ωt₁ = π, then two π/2 intervals) starting from `v|−j⟩⟨−j| + (1−v)I/d`:
//!
//! * the Leggett-Garg inequality `K_LGI = C₁₂ + C₂₃ − C₁₃ ≤ 1`,
//! * the Wigner form `K_WLGI = P(Q₂+,Q₃+) − P(Q₁−,Q₂+) − P(Q₁+,Q₃+) ≤ 0`,
//! * no-signalling in time at t₃ given a measurement at t₂.
//!
//! Measurements are unsharp (`F_m = λP_m + (1−λ)I/d`), updated level by
//! level, and coarse-grained into Q = −1 for `m ≤ −j + x`.
//!
//! Two engines are provided: density-matrix simulation ([`quantities`]) for
//! any `(j, λ, v, x)`, and closed forms ([`closed_form`]) for `x = 0`.

pub mod closed_form;
pub mod error;
pub mod linalg;
pub mod measurement;
pub mod quantities;
pub mod spin;
pub mod state;
pub mod sweep;

pub use error::{Error, Result};
pub use measurement::{GroupingScheme, MeasurementSetting, Outcome};
pub use quantities::{Engine, Pair, Params, ProtocolEvaluator, ProtocolSpec, Quantity, Time, ViolationReport};
pub use spin::{SpinContext, SpinQuantumNumber, Step};
pub use state::DensityMatrix;
