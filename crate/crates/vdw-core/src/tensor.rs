//! Small complex-tensor algebra and the free-space dyadic Green function.
//!
//! The electric field radiated at `R` by a point dipole oscillating at
//! frequency `ω = ck` is governed by the 3×3 dyadic
//!
//! ```text
//! G(R, ω) = (k e^{ikR} / 4π) [ α/(kR) + i β/(kR)² − β/(kR)³ ],
//! α = I − R̂R̂,   β = I − 3 R̂R̂.
//! ```
//!
//! `α` projects onto the plane transverse to `R̂` and dominates in the far
//! field; `β` is traceless and carries the near-field `1/R³` behaviour.
//! Everything here is a pure function of its arguments.

use core::fmt;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Errors from tensor-layer constructors and evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TensorError {
    /// Separation vector with zero (or non-finite) magnitude.
    CoincidentPoints,
    /// Green function requested at `ω ≤ 0`.
    NonPositiveFrequency,
}

impl fmt::Display for TensorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TensorError::CoincidentPoints => write!(f, "separation must have positive magnitude"),
            TensorError::NonPositiveFrequency => write!(f, "frequency must be positive"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for TensorError {}

/// Dense 3×3 complex tensor (dimensionless, natural units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexDyadic {
    pub entries: [[Complex64; 3]; 3],
}

impl ComplexDyadic {
    pub const ZERO: ComplexDyadic = ComplexDyadic {
        entries: [[Complex64::new(0.0, 0.0); 3]; 3],
    };

    pub fn identity() -> Self {
        let mut m = Self::ZERO;
        for i in 0..3 {
            m.entries[i][i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Build from a real-valued 3×3 array.
    pub fn from_real(r: [[f64; 3]; 3]) -> Self {
        let mut m = Self::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m.entries[i][j] = Complex64::new(r[i][j], 0.0);
            }
        }
        m
    }

    /// Entrywise real part as a new dyadic.
    pub fn re(&self) -> Self {
        let mut m = Self::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m.entries[i][j] = Complex64::new(self.entries[i][j].re, 0.0);
            }
        }
        m
    }

    /// Entrywise imaginary part as a new dyadic.
    pub fn im(&self) -> Self {
        let mut m = Self::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m.entries[i][j] = Complex64::new(self.entries[i][j].im, 0.0);
            }
        }
        m
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        let mut m = Self::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m.entries[i][j] = self.entries[i][j].conj();
            }
        }
        m
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut m = Self::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m.entries[i][j] = self.entries[i][j] * s;
            }
        }
        m
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut m = Self::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m.entries[i][j] = self.entries[i][j] + other.entries[i][j];
            }
        }
        m
    }

    /// Matrix product `self · other`.
    pub fn matmul(&self, other: &Self) -> Self {
        let mut m = Self::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = Complex64::new(0.0, 0.0);
                for l in 0..3 {
                    acc += self.entries[i][l] * other.entries[l][j];
                }
                m.entries[i][j] = acc;
            }
        }
        m
    }

    pub fn trace(&self) -> Complex64 {
        self.entries[0][0] + self.entries[1][1] + self.entries[2][2]
    }

    /// Bilinear form `a · M · b` with real vectors.
    pub fn sandwich(&self, a: &[f64; 3], b: &[f64; 3]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                acc += self.entries[i][j] * a[i] * b[j];
            }
        }
        acc
    }

    /// Matrix–vector product `M · v` with a real vector.
    pub fn apply(&self, v: &[f64; 3]) -> [Complex64; 3] {
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i] += self.entries[i][j] * v[j];
            }
        }
        out
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        for i in 0..3 {
            for j in (i + 1)..3 {
                if (self.entries[i][j] - self.entries[j][i]).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Largest entry magnitude, used for scale-aware comparisons.
    pub fn max_norm(&self) -> f64 {
        let mut m = 0.0_f64;
        for row in &self.entries {
            for e in row {
                m = m.max(e.norm());
            }
        }
        m
    }
}

/// Interatomic separation `R = R̄_A − R̄_B` with positive magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Separation {
    vector: [f64; 3],
    magnitude: f64,
    unit: [f64; 3],
}

impl Separation {
    pub fn new(vector: [f64; 3]) -> Result<Self, TensorError> {
        let r2: f64 = vector.iter().map(|c| c * c).sum();
        let magnitude = r2.sqrt();
        if !(magnitude > 0.0) || !magnitude.is_finite() {
            return Err(TensorError::CoincidentPoints);
        }
        let unit = [
            vector[0] / magnitude,
            vector[1] / magnitude,
            vector[2] / magnitude,
        ];
        Ok(Self {
            vector,
            magnitude,
            unit,
        })
    }

    /// Separation of magnitude `r` along `+z`.
    pub fn along_z(r: f64) -> Result<Self, TensorError> {
        Self::new([0.0, 0.0, r])
    }

    pub fn vector(&self) -> [f64; 3] {
        self.vector
    }

    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }

    pub fn unit(&self) -> [f64; 3] {
        self.unit
    }

    /// New separation displaced by `delta`.
    pub fn displaced(&self, delta: [f64; 3]) -> Result<Self, TensorError> {
        Self::new([
            self.vector[0] + delta[0],
            self.vector[1] + delta[1],
            self.vector[2] + delta[2],
        ])
    }
}

/// Transverse projector `α = I − R̂R̂`.
///
/// Real, symmetric, idempotent, trace 2, and annihilates `R̂`.
pub fn alpha_tensor(sep: &Separation) -> ComplexDyadic {
    let n = sep.unit();
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = if i == j { 1.0 } else { 0.0 };
            m[i][j] -= n[i] * n[j];
        }
    }
    ComplexDyadic::from_real(m)
}

/// Traceless near-field tensor `β = I − 3 R̂R̂ = 3α − 2I`.
pub fn beta_tensor(sep: &Separation) -> ComplexDyadic {
    let n = sep.unit();
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = if i == j { 1.0 } else { 0.0 };
            m[i][j] -= 3.0 * n[i] * n[j];
        }
    }
    ComplexDyadic::from_real(m)
}

/// Free-space dyadic Green function `G(R, ω)` at `ω = k > 0` (natural units).
///
/// Evaluates `(k e^{ikR}/4π) [α/(kR) + iβ/(kR)² − β/(kR)³]`. Negative or zero
/// frequencies are rejected; integral representations that need the negative
/// frequency axis work with the explicit `Im G` kernel instead (see
/// [`crate::oracle`]), never with this function.
pub fn green_dyadic(sep: &Separation, omega: f64) -> Result<ComplexDyadic, TensorError> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(TensorError::NonPositiveFrequency);
    }
    let k = omega;
    let r = sep.magnitude();
    let x = k * r;
    let alpha = alpha_tensor(sep);
    let beta = beta_tensor(sep);

    let pref = Complex64::new(0.0, x).exp() * (k / (4.0 * core::f64::consts::PI));
    let ca = pref / x;
    let cb = pref * (Complex64::new(0.0, 1.0) / (x * x) - 1.0 / (x * x * x));

    Ok(alpha.scale(ca).add(&beta.scale(cb)))
}
