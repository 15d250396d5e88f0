//! Nested-exponential time kernels and their exact analytic reduction.
//!
//! A [`TimeKernel`] describes a sum of regions, each a product of nested
//! integration chains over ordered time variables. Every integrand factor is
//! an exponential `e^{r·t}` whose rate `r` is affine in the two photon
//! frequencies `ω, ω′` (see [`RateExpr`]), optionally modulated by a pulse
//! envelope that expands into a small sum of further exponentials. Nested
//! integrals of exponentials are exponential sums again, so the reduction is
//! exact: [`reduce_time_kernel`] evaluates it numerically at one
//! `(ω, ω′, T)` point, while [`reduce_symbolic`] keeps the frequency
//! dependence — a phase `e^{i(aω + a′ω′)}` and a list of simple poles per
//! frequency — for downstream quadrature.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Below this magnitude a constant rate is treated as exactly zero and the
/// confluent antiderivative `t^{m+1}/(m+1)` is used.
pub const CONFLUENT_TOL: f64 = 1e-12;

/// Rate `base + i·(s_w·ω + s_wp·ω′)` attached to one time variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateExpr {
    pub base: Complex64,
    pub s_w: i8,
    pub s_wp: i8,
}

impl RateExpr {
    pub const ZERO: RateExpr = RateExpr {
        base: Complex64::new(0.0, 0.0),
        s_w: 0,
        s_wp: 0,
    };

    pub fn constant(base: Complex64) -> Self {
        RateExpr {
            base,
            s_w: 0,
            s_wp: 0,
        }
    }

    pub fn new(base: Complex64, s_w: i8, s_wp: i8) -> Self {
        RateExpr { base, s_w, s_wp }
    }

    pub fn eval(&self, w: f64, wp: f64) -> Complex64 {
        self.base + Complex64::new(0.0, self.s_w as f64 * w + self.s_wp as f64 * wp)
    }

    fn add(&self, other: &RateExpr) -> RateExpr {
        RateExpr {
            base: self.base + other.base,
            s_w: self.s_w + other.s_w,
            s_wp: self.s_wp + other.s_wp,
        }
    }

    fn shifted(&self, delta: Complex64) -> RateExpr {
        RateExpr {
            base: self.base + delta,
            ..*self
        }
    }
}

/// Multiplicative modulation of one time variable (arguments `Ωt/2` for the
/// half-angle forms, `Ωt` inside `sin²`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Envelope {
    None,
    /// `sin²(Ωt/2)`
    SinSq,
    /// `cos(Ωt/2)`
    Cos,
    /// `sin(Ωt/2)`
    Sin,
}

/// Lower integration bound of one segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LowerBound {
    /// Adiabatically switched past: requires a positive accumulated real rate.
    MinusInf,
    Zero,
    /// `π/Ω`, the pulse end.
    PulseEnd,
}

/// Upper bound of the outermost segment of a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpperBound {
    /// The observation time `T`.
    Time,
    /// `π/Ω`: the chain lives entirely inside the pulse.
    PulseEnd,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub rate: RateExpr,
    pub envelope: Envelope,
    pub lower: LowerBound,
}

impl Segment {
    pub fn plain(rate: RateExpr, lower: LowerBound) -> Self {
        Segment {
            rate,
            envelope: Envelope::None,
            lower,
        }
    }
}

/// Nested group of segments, outermost first; each inner segment integrates
/// up to the enclosing variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub upper: UpperBound,
    pub segments: Vec<Segment>,
}

/// One additive term of the kernel: a scalar prefactor, a `T`-dependent
/// prefactor exponential, and a product of chains.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub prefactor: Complex64,
    pub prefactor_rate: RateExpr,
    pub chains: Vec<Chain>,
}

/// A complete generating integrand.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeKernel {
    /// Rabi frequency for `PulseEnd` bounds and pulse envelopes.
    pub omega_pulse: Option<f64>,
    pub regions: Vec<Region>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelError {
    /// A `PulseEnd` bound or pulse envelope without a Rabi frequency.
    MissingPulseFrequency,
    /// `(−∞, ·]` bound with a non-positive accumulated real rate.
    DivergentLowerBound,
    /// The exponential part does not close to a pure damping factor at
    /// `t = t′ = t″ = T`; the kernel is malformed.
    PhaseNotClosed { residual: f64 },
    /// A denominator couples ω and ω′; symbolic reduction does not apply.
    CoupledFrequencies,
}

impl fmt::Display for KernelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelError::MissingPulseFrequency => {
                write!(
                    f,
                    "kernel uses pulse bounds or envelopes without a Rabi frequency"
                )
            }
            KernelError::DivergentLowerBound => {
                write!(
                    f,
                    "adiabatic lower bound requires a positive accumulated real rate"
                )
            }
            KernelError::PhaseNotClosed { residual } => {
                write!(
                    f,
                    "kernel phases do not close at equal times (residual {residual:.3e})"
                )
            }
            KernelError::CoupledFrequencies => {
                write!(f, "denominator couples the two frequencies")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for KernelError {}

impl TimeKernel {
    /// Structural checks: pulse data present where needed, and per region the
    /// total exponent at equal times reduces to a real (damping) rate.
    pub fn validate(&self) -> Result<(), KernelError> {
        for region in &self.regions {
            let mut total = region.prefactor_rate;
            for chain in &region.chains {
                if chain.upper == UpperBound::PulseEnd && self.omega_pulse.is_none() {
                    return Err(KernelError::MissingPulseFrequency);
                }
                for seg in &chain.segments {
                    if (seg.lower == LowerBound::PulseEnd || seg.envelope != Envelope::None)
                        && self.omega_pulse.is_none()
                    {
                        return Err(KernelError::MissingPulseFrequency);
                    }
                    total = total.add(&seg.rate);
                }
            }
            let scale = 1.0 + total.base.norm();
            let residual =
                (total.s_w as f64).abs() + (total.s_wp as f64).abs() + total.base.im.abs() / scale;
            if residual > 1e-9 {
                return Err(KernelError::PhaseNotClosed { residual });
            }
        }
        Ok(())
    }
}

fn envelope_components(
    env: Envelope,
    omega_pulse: Option<f64>,
) -> Result<Vec<(Complex64, Complex64)>, KernelError> {
    let one = Complex64::new(1.0, 0.0);
    Ok(match env {
        Envelope::None => vec![(one, Complex64::new(0.0, 0.0))],
        Envelope::SinSq => {
            let om = omega_pulse.ok_or(KernelError::MissingPulseFrequency)?;
            vec![
                (Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.0)),
                (Complex64::new(-0.25, 0.0), Complex64::new(0.0, om)),
                (Complex64::new(-0.25, 0.0), Complex64::new(0.0, -om)),
            ]
        }
        Envelope::Cos => {
            let om = omega_pulse.ok_or(KernelError::MissingPulseFrequency)?;
            vec![
                (Complex64::new(0.5, 0.0), Complex64::new(0.0, om / 2.0)),
                (Complex64::new(0.5, 0.0), Complex64::new(0.0, -om / 2.0)),
            ]
        }
        Envelope::Sin => {
            let om = omega_pulse.ok_or(KernelError::MissingPulseFrequency)?;
            vec![
                (Complex64::new(0.0, -0.5), Complex64::new(0.0, om / 2.0)),
                (Complex64::new(0.0, 0.5), Complex64::new(0.0, -om / 2.0)),
            ]
        }
    })
}

fn falling(m: u32, j: u32) -> f64 {
    // m·(m−1)·…·(m−j+1)
    let mut acc = 1.0;
    for i in 0..j {
        acc *= (m - i) as f64;
    }
    acc
}

// ---------------------------------------------------------------------------
// Numeric reduction at one (ω, ω′, T) point.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
struct PolyExp {
    coeff: Complex64,
    power: u32,
    rate: Complex64,
}

/// Integrate `Σ cᵢ v^{pᵢ} e^{rᵢ v}` from `lower` to a symbolic upper bound,
/// returning the antiderivative terms in the new outer variable.
fn integrate_polyexp(terms: &[PolyExp], lower: Option<f64>) -> Result<Vec<PolyExp>, KernelError> {
    let mut out = Vec::with_capacity(terms.len() * 2);
    for term in terms {
        if term.rate.norm() <= CONFLUENT_TOL {
            // Confluent branch: ∫ v^m dv = v^{m+1}/(m+1).
            let m = term.power;
            match lower {
                None => return Err(KernelError::DivergentLowerBound),
                Some(l) => {
                    out.push(PolyExp {
                        coeff: term.coeff / (m + 1) as f64,
                        power: m + 1,
                        rate: Complex64::new(0.0, 0.0),
                    });
                    if l != 0.0 {
                        out.push(PolyExp {
                            coeff: -term.coeff / (m + 1) as f64 * l.powi(m as i32 + 1),
                            power: 0,
                            rate: Complex64::new(0.0, 0.0),
                        });
                    }
                }
            }
            continue;
        }
        let m = term.power;
        // F(v) = e^{rv} Σ_j (−1)^j m!/(m−j)! v^{m−j} / r^{j+1}
        for j in 0..=m {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let c = term.coeff * sign * falling(m, j) / term.rate.powu(j + 1);
            out.push(PolyExp {
                coeff: c,
                power: m - j,
                rate: term.rate,
            });
        }
        match lower {
            None => {
                if term.rate.re <= 0.0 {
                    return Err(KernelError::DivergentLowerBound);
                }
                // e^{r·(−∞)} → 0: no boundary term.
            }
            Some(l) => {
                let mut boundary = Complex64::new(0.0, 0.0);
                let erl = (term.rate * l).exp();
                for j in 0..=m {
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    boundary += term.coeff * sign * falling(m, j) * l.powi((m - j) as i32)
                        / term.rate.powu(j + 1);
                }
                out.push(PolyExp {
                    coeff: -boundary * erl,
                    power: 0,
                    rate: Complex64::new(0.0, 0.0),
                });
            }
        }
    }
    Ok(out)
}

fn eval_polyexp(terms: &[PolyExp], v: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for term in terms {
        acc += term.coeff * v.powi(term.power as i32) * (term.rate * v).exp();
    }
    acc
}

fn lower_value(lower: LowerBound, tau: Option<f64>) -> Result<Option<f64>, KernelError> {
    Ok(match lower {
        LowerBound::MinusInf => None,
        LowerBound::Zero => Some(0.0),
        LowerBound::PulseEnd => Some(tau.ok_or(KernelError::MissingPulseFrequency)?),
    })
}

fn chain_value_numeric(
    chain: &Chain,
    omega_pulse: Option<f64>,
    w: f64,
    wp: f64,
    t: f64,
) -> Result<Complex64, KernelError> {
    let tau = omega_pulse.map(|om| core::f64::consts::PI / om);
    let mut terms = vec![PolyExp {
        coeff: Complex64::new(1.0, 0.0),
        power: 0,
        rate: Complex64::new(0.0, 0.0),
    }];
    for seg in chain.segments.iter().rev() {
        let rate = seg.rate.eval(w, wp);
        let env = envelope_components(seg.envelope, omega_pulse)?;
        let mut expanded = Vec::with_capacity(terms.len() * env.len());
        for term in &terms {
            for (c, dr) in &env {
                expanded.push(PolyExp {
                    coeff: term.coeff * c,
                    power: term.power,
                    rate: term.rate + rate + dr,
                });
            }
        }
        terms = integrate_polyexp(&expanded, lower_value(seg.lower, tau)?)?;
    }
    let upper = match chain.upper {
        UpperBound::Time => t,
        UpperBound::PulseEnd => tau.ok_or(KernelError::MissingPulseFrequency)?,
    };
    Ok(eval_polyexp(&terms, upper))
}

/// Exact value of the nested time integrals at one `(ω, ω′, T)` point.
///
/// Every integrand is a product of exponentials (envelopes expanded), so the
/// result is a finite sum of exponential ratios; rates within
/// [`CONFLUENT_TOL`] of zero take the confluent `t·e^{rt}` limit.
pub fn reduce_time_kernel(
    kernel: &TimeKernel,
    w: f64,
    wp: f64,
    t: f64,
) -> Result<Complex64, KernelError> {
    let mut total = Complex64::new(0.0, 0.0);
    for region in &kernel.regions {
        let mut value = region.prefactor * (region.prefactor_rate.eval(w, wp) * t).exp();
        for chain in &region.chains {
            value *= chain_value_numeric(chain, kernel.omega_pulse, w, wp, t)?;
        }
        total += value;
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Symbolic reduction: frequency dependence kept as phases and simple poles.
// ---------------------------------------------------------------------------

/// One additive term
/// `scalar · e^{i(a_w ω + a_wp ω′)} / [∏(ω − z) ∏(ω′ − z′) (ω − ω′ − zc)]`,
/// where the coupled factor `zc` is optional and at most simple.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTerm {
    pub scalar: Complex64,
    pub phase_w: f64,
    pub phase_wp: f64,
    pub poles_w: Vec<Complex64>,
    pub poles_wp: Vec<Complex64>,
    /// Offset `zc` of a coupled factor `1/(ω − ω′ − zc)`, if present.
    pub couple: Option<Complex64>,
}

impl SymTerm {
    fn unit() -> Self {
        SymTerm {
            scalar: Complex64::new(1.0, 0.0),
            phase_w: 0.0,
            phase_wp: 0.0,
            poles_w: Vec::new(),
            poles_wp: Vec::new(),
            couple: None,
        }
    }

    fn product(&self, other: &SymTerm) -> SymTerm {
        let mut poles_w = self.poles_w.clone();
        poles_w.extend_from_slice(&other.poles_w);
        let mut poles_wp = self.poles_wp.clone();
        poles_wp.extend_from_slice(&other.poles_wp);
        debug_assert!(self.couple.is_none() || other.couple.is_none());
        SymTerm {
            scalar: self.scalar * other.scalar,
            phase_w: self.phase_w + other.phase_w,
            phase_wp: self.phase_wp + other.phase_wp,
            poles_w,
            poles_wp,
            couple: self.couple.or(other.couple),
        }
    }

    pub fn eval(&self, w: f64, wp: f64) -> Complex64 {
        let mut v = self.scalar * Complex64::new(0.0, self.phase_w * w + self.phase_wp * wp).exp();
        for z in &self.poles_w {
            v /= Complex64::new(w, 0.0) - z;
        }
        for z in &self.poles_wp {
            v /= Complex64::new(wp, 0.0) - z;
        }
        if let Some(zc) = self.couple {
            v /= Complex64::new(w - wp, 0.0) - zc;
        }
        v
    }
}

/// Evaluate a symbolic term sum at one frequency pair (cross-check path).
pub fn eval_sym_terms(terms: &[SymTerm], w: f64, wp: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for term in terms {
        acc += term.eval(w, wp);
    }
    acc
}

/// `ω ↔ ω′` partner of a term sum.
pub fn swap_partner(terms: &[SymTerm]) -> Vec<SymTerm> {
    terms
        .iter()
        .map(|t| SymTerm {
            // swapping negates the coupled factor: 1/(ω′ − ω − zc)
            scalar: if t.couple.is_some() {
                -t.scalar
            } else {
                t.scalar
            },
            phase_w: t.phase_wp,
            phase_wp: t.phase_w,
            poles_w: t.poles_wp.clone(),
            poles_wp: t.poles_w.clone(),
            couple: t.couple.map(|zc| -zc),
        })
        .collect()
}

/// Conjugated `(ω ↔ ω′)*` partner of a term sum.
pub fn conj_swap_partner(terms: &[SymTerm]) -> Vec<SymTerm> {
    terms
        .iter()
        .map(|t| SymTerm {
            scalar: if t.couple.is_some() {
                -t.scalar.conj()
            } else {
                t.scalar.conj()
            },
            phase_w: -t.phase_wp,
            phase_wp: -t.phase_w,
            poles_w: t.poles_wp.iter().map(|z| z.conj()).collect(),
            poles_wp: t.poles_w.iter().map(|z| z.conj()).collect(),
            couple: t.couple.map(|zc| -zc.conj()),
        })
        .collect()
}

#[derive(Debug, Clone)]
struct SymPolyExp {
    term: SymTerm,
    power: u32,
    rate: RateExpr,
}

fn sym_integrate(terms: &[SymPolyExp], lower: Option<f64>) -> Result<Vec<SymPolyExp>, KernelError> {
    let mut out = Vec::with_capacity(terms.len() * 2);
    for t in terms {
        let r = t.rate;
        let constant = r.s_w == 0 && r.s_wp == 0;
        if constant && r.base.norm() <= CONFLUENT_TOL {
            let m = t.power;
            match lower {
                None => return Err(KernelError::DivergentLowerBound),
                Some(l) => {
                    let mut up = t.clone();
                    up.term.scalar /= (m + 1) as f64;
                    up.power = m + 1;
                    up.rate = RateExpr::ZERO;
                    out.push(up);
                    if l != 0.0 {
                        let mut lo = t.clone();
                        lo.term.scalar *= -l.powi(m as i32 + 1) / (m + 1) as f64;
                        lo.power = 0;
                        lo.rate = RateExpr::ZERO;
                        out.push(lo);
                    }
                }
            }
            continue;
        }
        // 1/r^{j+1} either stays a constant or contributes j+1 poles:
        // r = i·s·(ω − z) with z = i·base/s.
        let m = t.power;
        for j in 0..=m {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let mut up = t.clone();
            up.term.scalar *= sign * falling(m, j);
            push_inverse_rate(&mut up.term, &r, j + 1)?;
            up.power = m - j;
            // rate unchanged: still a function of the enclosing variable.
            out.push(up);
        }
        match lower {
            None => {
                if r.base.re <= 0.0 {
                    return Err(KernelError::DivergentLowerBound);
                }
            }
            Some(l) => {
                for j in 0..=m {
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    let mut lo = t.clone();
                    lo.term.scalar *=
                        -sign * falling(m, j) * l.powi((m - j) as i32) * (r.base * l).exp();
                    lo.term.phase_w += r.s_w as f64 * l;
                    lo.term.phase_wp += r.s_wp as f64 * l;
                    push_inverse_rate(&mut lo.term, &r, j + 1)?;
                    lo.power = 0;
                    lo.rate = RateExpr::ZERO;
                    out.push(lo);
                }
            }
        }
    }
    Ok(out)
}

/// Multiply a symbolic term by `1/r^{count}`.
fn push_inverse_rate(term: &mut SymTerm, r: &RateExpr, count: u32) -> Result<(), KernelError> {
    if r.s_w == 0 && r.s_wp == 0 {
        term.scalar /= r.base.powu(count);
        return Ok(());
    }
    if r.s_w != 0 && r.s_wp != 0 {
        // Opposite tags give the coupled factor 1/(ω − ω′ − zc); same-sign
        // tags (two-photon denominators) stay unsupported here.
        if r.s_w + r.s_wp != 0 || count != 1 || term.couple.is_some() {
            return Err(KernelError::CoupledFrequencies);
        }
        let s = r.s_w;
        // r = i s (ω − ω′ − zc), zc = i·base/s.
        let zc = Complex64::new(0.0, 1.0) * r.base / s as f64;
        term.scalar /= Complex64::new(0.0, s as f64);
        term.couple = Some(zc);
        return Ok(());
    }
    let (s, poles) = if r.s_w != 0 {
        (r.s_w, &mut term.poles_w)
    } else {
        (r.s_wp, &mut term.poles_wp)
    };
    // r = i s (ω − z), z = i·base/s.
    let z = Complex64::new(0.0, 1.0) * r.base / s as f64;
    let is = Complex64::new(0.0, s as f64);
    term.scalar /= is.powu(count);
    for _ in 0..count {
        poles.push(z);
    }
    Ok(())
}

fn sym_substitute(terms: &[SymPolyExp], v: f64) -> Vec<SymTerm> {
    terms
        .iter()
        .map(|t| {
            let mut out = t.term.clone();
            out.scalar *= v.powi(t.power as i32) * (t.rate.base * v).exp();
            out.phase_w += t.rate.s_w as f64 * v;
            out.phase_wp += t.rate.s_wp as f64 * v;
            out
        })
        .collect()
}

fn chain_terms_symbolic(
    chain: &Chain,
    omega_pulse: Option<f64>,
    t: f64,
) -> Result<Vec<SymTerm>, KernelError> {
    let tau = omega_pulse.map(|om| core::f64::consts::PI / om);
    let mut terms = vec![SymPolyExp {
        term: SymTerm::unit(),
        power: 0,
        rate: RateExpr::ZERO,
    }];
    for seg in chain.segments.iter().rev() {
        let env = envelope_components(seg.envelope, omega_pulse)?;
        let mut expanded = Vec::with_capacity(terms.len() * env.len());
        for term in &terms {
            for (c, dr) in &env {
                let mut new = term.clone();
                new.term.scalar *= c;
                // term.rate carries the accumulated inner rate already.
                new.rate = new.rate.add(&seg.rate).shifted(*dr);
                expanded.push(new);
            }
        }
        terms = sym_integrate(&expanded, lower_value(seg.lower, tau)?)?;
    }
    let upper = match chain.upper {
        UpperBound::Time => t,
        UpperBound::PulseEnd => tau.ok_or(KernelError::MissingPulseFrequency)?,
    };
    Ok(sym_substitute(&terms, upper))
}

/// Reduce a kernel to closed-form frequency structure at observation time `t`.
///
/// Each returned term is `scalar · e^{i(a_w ω + a_wp ω′)}` divided by simple
/// pole factors in each frequency separately; kernels whose denominators
/// couple `ω` and `ω′` are rejected with [`KernelError::CoupledFrequencies`].
pub fn reduce_symbolic(kernel: &TimeKernel, t: f64) -> Result<Vec<SymTerm>, KernelError> {
    kernel.validate()?;
    let mut out = Vec::new();
    for region in &kernel.regions {
        let mut region_terms = vec![SymTerm {
            scalar: region.prefactor * (region.prefactor_rate.base * t).exp(),
            phase_w: region.prefactor_rate.s_w as f64 * t,
            phase_wp: region.prefactor_rate.s_wp as f64 * t,
            poles_w: Vec::new(),
            poles_wp: Vec::new(),
            couple: None,
        }];
        for chain in &region.chains {
            let chain_terms = chain_terms_symbolic(chain, kernel.omega_pulse, t)?;
            let mut next = Vec::with_capacity(region_terms.len() * chain_terms.len());
            for a in &region_terms {
                for b in &chain_terms {
                    next.push(a.product(b));
                }
            }
            region_terms = next;
        }
        out.extend(region_terms);
    }
    Ok(out)
}
