//! Unsharp J_z measurements and their coarse-graining into a two-valued Q.
//!
//! Effects are `F_m = λP_m + (1 − λ)I/d`, all diagonal in the J_z basis, so
//! they are stored as two numbers (the on-level and off-level entries) rather
//! than as d dense d×d matrices. State update is the per-level generalized
//! Lüders rule `√F_m ρ √F_m`; grouping into Q happens after the update.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::spin::{SpinContext, SpinQuantumNumber};
use crate::state::DensityMatrix;

/// Branches below this probability carry no normalized post-state.
pub const ZERO_BRANCH_PROBABILITY: f64 = 1e-15;

const COMPLETENESS_TOLERANCE: f64 = 1e-12;

/// Value of the dichotomic observable Q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Minus,
    Plus,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn value(self) -> f64 {
        match self {
            Outcome::Minus => -1.0,
            Outcome::Plus => 1.0,
        }
    }
}

/// `Q = −1` for `m ∈ {−j, …, −j + x}`, `Q = +1` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupingScheme {
    x: usize,
    spin: SpinQuantumNumber,
}

impl GroupingScheme {
    pub fn new(spin: SpinQuantumNumber, x: usize) -> Result<Self> {
        if x > spin.floor() {
            return Err(Error::InvalidGrouping {
                x,
                max: spin.floor(),
            });
        }
        Ok(Self { x, spin })
    }

    /// The `x = 0` scheme: only `m = −j` maps to `Q = −1`.
    pub fn lowest_level(spin: SpinQuantumNumber) -> Self {
        Self { x: 0, spin }
    }

    pub fn x(&self) -> usize {
        self.x
    }

    pub fn spin(&self) -> SpinQuantumNumber {
        self.spin
    }

    pub fn outcome_of_index(&self, k: usize) -> Outcome {
        if k <= self.x {
            Outcome::Minus
        } else {
            Outcome::Plus
        }
    }

    pub fn group_outcome(&self, m: f64) -> Result<Outcome> {
        Ok(self.outcome_of_index(self.spin.index_of(m)?))
    }

    /// Basis indices belonging to `q`.
    pub fn members(&self, q: Outcome) -> std::ops::Range<usize> {
        match q {
            Outcome::Minus => 0..self.x + 1,
            Outcome::Plus => self.x + 1..self.spin.dim(),
        }
    }

    pub fn group_size(&self, q: Outcome) -> usize {
        self.members(q).len()
    }
}

/// Unsharp J_z measurement with sharpness λ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSetting {
    lambda: f64,
    dim: usize,
    /// `F_m[m]`.
    on_level: f64,
    /// `F_m[k]` for `k ≠ m`.
    off_level: f64,
}

impl MeasurementSetting {
    pub fn new(dim: usize, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidSharpness(lambda));
        }
        let off_level = if lambda == 1.0 {
            0.0
        } else {
            (1.0 - lambda) / dim as f64
        };
        let setting = Self {
            lambda,
            dim,
            on_level: lambda + off_level,
            off_level,
        };
        let residual = (setting.on_level + (dim - 1) as f64 * off_level - 1.0).abs();
        if residual > COMPLETENESS_TOLERANCE {
            return Err(Error::NumericalDegeneracy {
                what: "POVM completeness",
                residual,
                tolerance: COMPLETENESS_TOLERANCE,
            });
        }
        Ok(setting)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Diagonal of `F_m` for the level with basis index `level`.
    pub fn effect_diagonal(&self, level: usize) -> Vec<f64> {
        let mut diag = vec![self.off_level; self.dim];
        diag[level] = self.on_level;
        diag
    }

    pub fn sqrt_effect_diagonal(&self, level: usize) -> Vec<f64> {
        self.effect_diagonal(level).into_iter().map(f64::sqrt).collect()
    }

    pub fn effect(&self, level: usize) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&self.effect_diagonal(level))
    }

    pub fn sqrt_effect(&self, level: usize) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&self.sqrt_effect_diagonal(level))
    }

    /// Diagonal of `Σ_{m ∈ q} F_m`; `Tr(ρ·diag(w))` is the probability of `q`.
    pub fn group_weights(&self, scheme: &GroupingScheme, q: Outcome) -> Vec<f64> {
        let members = scheme.members(q);
        let base = members.len() as f64 * self.off_level;
        (0..self.dim)
            .map(|k| {
                if members.contains(&k) {
                    base + self.lambda
                } else {
                    base
                }
            })
            .collect()
    }

    /// Mask `W` with `Σ_{m ∈ q} √F_m ρ √F_m = W ∘ ρ` (elementwise).
    ///
    /// `W_ab = Σ_{m∈q} s_m[a]·s_m[b]` where `s_m` is the diagonal of `√F_m`;
    /// counted in closed form rather than summed level by level.
    pub fn collapse_mask(&self, scheme: &GroupingScheme, q: Outcome) -> DMatrix<f64> {
        let members = scheme.members(q);
        let size = members.len() as f64;
        let on = self.on_level.sqrt();
        let off = self.off_level.sqrt();
        let inside: Vec<f64> = (0..self.dim)
            .map(|k| if members.contains(&k) { 1.0 } else { 0.0 })
            .collect();
        DMatrix::from_fn(self.dim, self.dim, |a, b| {
            if a == b {
                inside[a] * self.on_level + (size - inside[a]) * self.off_level
            } else {
                let hits = inside[a] + inside[b];
                hits * on * off + (size - hits) * self.off_level
            }
        })
    }
}

/// Builds the measurement for a context; `λ ∈ [0, 1]`.
pub fn make_setting(ctx: &SpinContext, lambda: f64) -> Result<MeasurementSetting> {
    MeasurementSetting::new(ctx.dim(), lambda)
}

#[derive(Debug, Clone)]
pub struct LevelOutcome {
    pub m: f64,
    pub probability: f64,
    /// `None` when `probability < ZERO_BRANCH_PROBABILITY`.
    pub post_state: Option<DensityMatrix>,
}

#[derive(Debug, Clone)]
pub struct OutcomeDistribution {
    pub entries: Vec<LevelOutcome>,
}

impl OutcomeDistribution {
    pub fn total_probability(&self) -> f64 {
        self.entries.iter().map(|e| e.probability).sum()
    }
}

/// Every individual-level outcome with its Lüders post-state.
pub fn measure_levels(
    setting: &MeasurementSetting,
    spin: SpinQuantumNumber,
    rho: &DensityMatrix,
) -> Result<OutcomeDistribution> {
    rho.check_dim(setting.dim())?;
    let pops = rho.populations();
    let entries = spin
        .m_values()
        .into_iter()
        .enumerate()
        .map(|(k, m)| {
            let f = setting.effect_diagonal(k);
            let probability: f64 = pops.iter().zip(&f).map(|(p, w)| p * w).sum();
            let post_state = (probability >= ZERO_BRANCH_PROBABILITY).then(|| {
                let s = setting.sqrt_effect_diagonal(k);
                let mask = DMatrix::from_fn(s.len(), s.len(), |a, b| s[a] * s[b] / probability);
                DensityMatrix::from_matrix_unchecked(rho.matrix().hadamard_real(&mask))
            });
            LevelOutcome {
                m,
                probability,
                post_state,
            }
        })
        .collect();
    Ok(OutcomeDistribution { entries })
}

pub fn group_outcome(scheme: &GroupingScheme, m: f64) -> Result<Outcome> {
    scheme.group_outcome(m)
}

/// Unnormalized branch of a grouped measurement; `Tr(state) = probability`.
#[derive(Debug, Clone)]
pub struct GroupBranch {
    pub probability: f64,
    pub state: ComplexMatrix,
}

/// Outcome `q` of the coarse-grained measurement, with the per-level
/// mixture `Σ_{m ∈ q} √F_m ρ √F_m` as the (unnormalized) post-state.
pub fn collapse_group(
    setting: &MeasurementSetting,
    scheme: &GroupingScheme,
    rho: &ComplexMatrix,
    q: Outcome,
) -> Result<GroupBranch> {
    if rho.dim() != setting.dim() {
        return Err(Error::DimensionMismatch {
            expected: setting.dim(),
            found: rho.dim(),
        });
    }
    let weights = setting.group_weights(scheme, q);
    let probability = rho
        .diagonal_re()
        .iter()
        .zip(&weights)
        .map(|(p, w)| p * w)
        .sum();
    let state = rho.hadamard_real(&setting.collapse_mask(scheme, q));
    Ok(GroupBranch { probability, state })
}
