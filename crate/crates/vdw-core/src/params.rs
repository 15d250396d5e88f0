//! Atom-pair, three-level and pulse parameter types, with regime validators.
//!
//! Hard invariants (positive frequencies, nonzero detuning, valid separation)
//! are enforced at construction. Softer regime conditions — quasiresonance,
//! far field, weak drive — are advisory: the closed forms stay evaluable
//! outside them, so validators emit [`RegimeWarning`]s instead of failing.

use alloc::vec::Vec;
use core::fmt;

use crate::tensor::{ComplexDyadic, Separation};
use num_complex::Complex64;

const FOUR_PI: f64 = 4.0 * core::f64::consts::PI;

/// Which atom of the pair an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Atom {
    A,
    B,
}

/// Errors from parameter constructors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamError {
    /// ω must be positive and finite.
    NonPositiveFrequency,
    /// Γ must be finite and ≥ 0.
    NegativeLinewidth,
    /// ω_A = ω_B makes the coupling tensor diverge.
    ZeroDetuning,
    /// Δ_{+−} = 0 makes the identical-atom shifts diverge.
    ZeroLadderAsymmetry,
    /// Ladder energies must be strictly increasing (ω_− < ω_0 < ω_+).
    NonMonotonicLadder,
    /// Rabi frequency must be positive and finite.
    NonPositiveRabi,
}

impl fmt::Display for ParamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamError::NonPositiveFrequency => write!(f, "transition frequency must be > 0"),
            ParamError::NegativeLinewidth => write!(f, "linewidth must be >= 0"),
            ParamError::ZeroDetuning => write!(f, "detuning omega_a - omega_b must be nonzero"),
            ParamError::ZeroLadderAsymmetry => {
                write!(
                    f,
                    "ladder asymmetry (omega_+ - omega_0) - (omega_0 - omega_-) must be nonzero"
                )
            }
            ParamError::NonMonotonicLadder => {
                write!(
                    f,
                    "ladder energies must satisfy omega_- < omega_0 < omega_+"
                )
            }
            ParamError::NonPositiveRabi => write!(f, "Rabi frequency must be > 0"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ParamError {}

/// Advisory regime flags. Values are never altered by these.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegimeWarning {
    /// |Δ_AB| is not large against (Γ_A + Γ_B)/2 (ratio < 10).
    DetuningNotDominant { ratio: f64 },
    /// |Δ_AB|/min(ω_A, ω_B) exceeds 0.1: outside the quasiresonant regime.
    NotQuasiresonant { ratio: f64 },
    /// kR below 10 for a far-field expression.
    NotFarField { kr: f64 },
    /// Ω/ω_A exceeds 0.1: drive not weak against the transition.
    StrongDrive { ratio: f64 },
    /// |Δ_{+−}| against the ladder gaps exceeds 0.1.
    LadderAsymmetryLarge { ratio: f64 },
    /// Γ·t not small for an expression derived at Γt ≪ 1 (threshold 0.1).
    DampedRegime { gamma_t: f64 },
    /// |Ω| close to |Δ_AB|: the non-resonant pulse branch loses accuracy.
    NearResonantPulse { ratio: f64 },
}

impl RegimeWarning {
    /// Short stable code for CSV columns and logs.
    pub fn code(&self) -> &'static str {
        match self {
            RegimeWarning::DetuningNotDominant { .. } => "detuning_vs_linewidth",
            RegimeWarning::NotQuasiresonant { .. } => "not_quasiresonant",
            RegimeWarning::NotFarField { .. } => "not_far_field",
            RegimeWarning::StrongDrive { .. } => "strong_drive",
            RegimeWarning::LadderAsymmetryLarge { .. } => "ladder_asymmetry",
            RegimeWarning::DampedRegime { .. } => "damped_regime",
            RegimeWarning::NearResonantPulse { .. } => "near_resonant_pulse",
        }
    }
}

impl fmt::Display for RegimeWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegimeWarning::DetuningNotDominant { ratio } => {
                write!(
                    f,
                    "detuning only {ratio:.3}x the mean linewidth (want >= 10)"
                )
            }
            RegimeWarning::NotQuasiresonant { ratio } => {
                write!(f, "|detuning|/omega = {ratio:.3} exceeds 0.1")
            }
            RegimeWarning::NotFarField { kr } => {
                write!(f, "kR = {kr:.3} below far-field threshold 10")
            }
            RegimeWarning::StrongDrive { ratio } => {
                write!(f, "Rabi/omega_a = {ratio:.3} exceeds 0.1")
            }
            RegimeWarning::LadderAsymmetryLarge { ratio } => {
                write!(f, "ladder asymmetry ratio {ratio:.3} exceeds 0.1")
            }
            RegimeWarning::DampedRegime { gamma_t } => {
                write!(f, "Gamma*t = {gamma_t:.3} not small against 1")
            }
            RegimeWarning::NearResonantPulse { ratio } => {
                write!(
                    f,
                    "|Omega/Delta| = {ratio:.4} close to 1; resonant branch applies"
                )
            }
        }
    }
}

/// A pair of dissimilar two-level atoms: A initially excited, B ground.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomPair {
    omega_a: f64,
    omega_b: f64,
    gamma_a: f64,
    gamma_b: f64,
    mu_a: [f64; 3],
    mu_b: [f64; 3],
    sep: Separation,
}

impl AtomPair {
    pub fn new(
        omega_a: f64,
        omega_b: f64,
        gamma_a: f64,
        gamma_b: f64,
        mu_a: [f64; 3],
        mu_b: [f64; 3],
        sep: Separation,
    ) -> Result<Self, ParamError> {
        if !(omega_a > 0.0 && omega_a.is_finite()) || !(omega_b > 0.0 && omega_b.is_finite()) {
            return Err(ParamError::NonPositiveFrequency);
        }
        if !(gamma_a >= 0.0 && gamma_a.is_finite()) || !(gamma_b >= 0.0 && gamma_b.is_finite()) {
            return Err(ParamError::NegativeLinewidth);
        }
        if omega_a == omega_b {
            return Err(ParamError::ZeroDetuning);
        }
        Ok(Self {
            omega_a,
            omega_b,
            gamma_a,
            gamma_b,
            mu_a,
            mu_b,
            sep,
        })
    }

    pub fn omega_a(&self) -> f64 {
        self.omega_a
    }
    pub fn omega_b(&self) -> f64 {
        self.omega_b
    }
    pub fn gamma_a(&self) -> f64 {
        self.gamma_a
    }
    pub fn gamma_b(&self) -> f64 {
        self.gamma_b
    }
    pub fn mu_a(&self) -> [f64; 3] {
        self.mu_a
    }
    pub fn mu_b(&self) -> [f64; 3] {
        self.mu_b
    }
    pub fn separation(&self) -> &Separation {
        &self.sep
    }

    /// Detuning `Δ_AB = ω_A − ω_B` (nonzero by construction).
    pub fn detuning(&self) -> f64 {
        self.omega_a - self.omega_b
    }

    /// Same pair with the separation replaced (used by the numerical force).
    pub fn with_separation(&self, sep: Separation) -> Self {
        Self { sep, ..*self }
    }

    /// Coupling tensor for this pair.
    pub fn coupling(&self) -> CouplingU {
        CouplingU::new(self.mu_a, self.mu_b, self.detuning())
    }

    /// Advisory regime checks on the pair parameters themselves.
    pub fn regime_warnings(&self) -> Vec<RegimeWarning> {
        let mut w = Vec::new();
        let delta = self.detuning().abs();
        let mean_gamma = 0.5 * (self.gamma_a + self.gamma_b);
        if mean_gamma > 0.0 {
            let ratio = delta / mean_gamma;
            if ratio < 10.0 {
                w.push(RegimeWarning::DetuningNotDominant { ratio });
            }
        }
        let ratio = delta / self.omega_a.min(self.omega_b);
        if ratio > 0.1 {
            w.push(RegimeWarning::NotQuasiresonant { ratio });
        }
        w
    }

    /// Far-field advisory check for the `1/R²` expressions.
    pub fn far_field_warnings(&self) -> Vec<RegimeWarning> {
        let mut w = Vec::new();
        let r = self.sep.magnitude();
        let kr = self.omega_a.min(self.omega_b) * r;
        if kr < 10.0 {
            w.push(RegimeWarning::NotFarField { kr });
        }
        w
    }
}

/// Rank-4 coupling tensor `U_{ijpq} = μ^A_i μ^A_q μ^B_j μ^B_p / ((4π)² Δ_AB)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingU {
    entries: [[[[f64; 3]; 3]; 3]; 3],
}

impl CouplingU {
    pub fn new(mu_a: [f64; 3], mu_b: [f64; 3], detuning: f64) -> Self {
        let norm = FOUR_PI * FOUR_PI * detuning;
        let mut entries = [[[[0.0; 3]; 3]; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for p in 0..3 {
                    for q in 0..3 {
                        entries[i][j][p][q] = mu_a[i] * mu_a[q] * mu_b[j] * mu_b[p] / norm;
                    }
                }
            }
        }
        Self { entries }
    }

    pub fn entry(&self, i: usize, j: usize, p: usize, q: usize) -> f64 {
        self.entries[i][j][p][q]
    }

    /// `U_{ijpq} X^{ij} Y^{pq}` over complex dyadics.
    pub fn contract(&self, x: &ComplexDyadic, y: &ComplexDyadic) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                for p in 0..3 {
                    for q in 0..3 {
                        acc += x.entries[i][j] * y.entries[p][q] * self.entries[i][j][p][q];
                    }
                }
            }
        }
        acc
    }

    /// Contraction of two real-part dyadics, returned as a real number.
    pub fn contract_re(&self, x: &ComplexDyadic, y: &ComplexDyadic) -> f64 {
        self.contract(x, y).re
    }
}

/// Identical-atom ladder `|−⟩ → |0⟩ → |+⟩` with both atoms prepared in `|0⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeLevelConfig {
    omega_minus: f64,
    omega_0: f64,
    omega_plus: f64,
    mu_minus: [f64; 3],
    mu_plus: [f64; 3],
    sep: Separation,
}

impl ThreeLevelConfig {
    pub fn new(
        omega_minus: f64,
        omega_0: f64,
        omega_plus: f64,
        mu_minus: [f64; 3],
        mu_plus: [f64; 3],
        sep: Separation,
    ) -> Result<Self, ParamError> {
        if !(omega_minus.is_finite() && omega_0.is_finite() && omega_plus.is_finite()) {
            return Err(ParamError::NonPositiveFrequency);
        }
        if !(omega_minus < omega_0 && omega_0 < omega_plus) {
            return Err(ParamError::NonMonotonicLadder);
        }
        let cfg = Self {
            omega_minus,
            omega_0,
            omega_plus,
            mu_minus,
            mu_plus,
            sep,
        };
        if cfg.delta_pm() == 0.0 {
            return Err(ParamError::ZeroLadderAsymmetry);
        }
        Ok(cfg)
    }

    pub fn omega_minus(&self) -> f64 {
        self.omega_minus
    }
    pub fn omega_0(&self) -> f64 {
        self.omega_0
    }
    pub fn omega_plus(&self) -> f64 {
        self.omega_plus
    }
    pub fn mu_minus(&self) -> [f64; 3] {
        self.mu_minus
    }
    pub fn mu_plus(&self) -> [f64; 3] {
        self.mu_plus
    }
    pub fn separation(&self) -> &Separation {
        &self.sep
    }

    /// Lower-transition frequency `ω_0 − ω_−`.
    pub fn k_lower(&self) -> f64 {
        self.omega_0 - self.omega_minus
    }

    /// Upper-transition frequency `ω_+ − ω_0`.
    pub fn k_upper(&self) -> f64 {
        self.omega_plus - self.omega_0
    }

    /// Ladder asymmetry `Δ_{+−} = (ω_+ − ω_0) − (ω_0 − ω_−)`.
    pub fn delta_pm(&self) -> f64 {
        self.k_upper() - self.k_lower()
    }

    pub fn regime_warnings(&self) -> Vec<RegimeWarning> {
        let mut w = Vec::new();
        let ratio = self.delta_pm().abs() / self.k_upper().min(self.k_lower());
        if ratio > 0.1 {
            w.push(RegimeWarning::LadderAsymmetryLarge { ratio });
        }
        w
    }
}

/// π-pulse drive: Rabi frequency Ω and derived duration π/Ω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseParams {
    rabi: f64,
}

impl PulseParams {
    pub fn new(rabi: f64) -> Result<Self, ParamError> {
        if !(rabi > 0.0 && rabi.is_finite()) {
            return Err(ParamError::NonPositiveRabi);
        }
        Ok(Self { rabi })
    }

    pub fn rabi(&self) -> f64 {
        self.rabi
    }

    /// Pulse duration `π/Ω`.
    pub fn duration(&self) -> f64 {
        core::f64::consts::PI / self.rabi
    }

    /// Weak-drive advisory check against the pair it drives.
    pub fn regime_warnings(&self, pair: &AtomPair) -> Vec<RegimeWarning> {
        let mut w = Vec::new();
        let ratio = self.rabi / pair.omega_a();
        if ratio > 0.1 {
            w.push(RegimeWarning::StrongDrive { ratio });
        }
        let res = (self.rabi / pair.detuning()).abs();
        if (res - 1.0).abs() < 0.05 {
            w.push(RegimeWarning::NearResonantPulse { ratio: res });
        }
        w
    }
}
