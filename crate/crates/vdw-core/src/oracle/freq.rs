//! Regularized frequency quadrature for the reduced kernels.
//!
//! After time reduction, each kernel term needs the two integrals
//! `∫ dk k² Im G_ij(kR) e^{iak} / ∏(k − z_j)` over the whole real axis. The
//! spectral weight splits exactly into two plane-wave halves with polynomial
//! coefficients,
//!
//! ```text
//! k² Im G(kR) = P₊(k) e^{ikR} + P₋(k) e^{−ikR},
//! P_±(k) = (1/8π) [ ∓i k² α/R + k β/R² ± i β/R³ ],
//! ```
//!
//! so every contribution has the canonical shape `∫ k^m e^{iφk}/∏(k−z_j) dk`
//! with a nonzero total phase `φ`. Partial fractions split that into a
//! polynomial part — whose regularized integral against `e^{iφk}` vanishes
//! for `φ ≠ 0` — and pole parts `∫ e^{iφk}/(k−z)^l dk`, which are computed
//! numerically: dense panels across the pole window, oscillation-matched
//! panels over the background, and integration-by-parts tail corrections
//! beyond a phase-scaled extent. Panel layout is a pure function of the
//! inputs, and sums run in a fixed order, so results are reproducible
//! bit-for-bit.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::tensor::ComplexDyadic;
use num_complex::Complex64;

/// Phases below this magnitude sit on a light-cone degeneracy of the
/// observation time and cannot be regularized by oscillation.
pub const PHASE_MIN: f64 = 1e-9;

/// Pole pairs closer than this (relative) are merged into one higher-order
/// pole before partial fractions.
const POLE_MERGE_REL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FreqError {
    /// Total phase ≈ 0: the observation time sits on a light-cone
    /// coincidence (e.g. T = R or T = 2R) where the tamed form degenerates.
    PhaseDegenerate { phase: f64 },
    /// A pole sits exactly on the real axis; the regulator must be positive.
    PoleOnAxis,
    /// More than three coincident poles are not supported.
    MultiplicityTooHigh,
}

impl fmt::Display for FreqError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FreqError::PhaseDegenerate { phase } => write!(
                f,
                "total oscillation phase {phase:.3e} is degenerate; move the observation time off the light cone"
            ),
            FreqError::PoleOnAxis => write!(f, "pole on the real frequency axis"),
            FreqError::MultiplicityTooHigh => write!(f, "pole multiplicity above 3"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for FreqError {}

/// Panel-layout controls for one refinement level.
#[derive(Debug, Clone, Copy)]
pub struct GridControl {
    /// Physical half-width of the finely resolved window around each pole.
    pub window: f64,
    /// Density multiplier ≥ 1; doubling halves panel widths and doubles the
    /// background extent.
    pub density: f64,
}

const GL16_X: [f64; 8] = [
    0.095_012_509_837_637_44,
    0.281_603_550_779_258_9,
    0.458_016_777_657_227_4,
    0.617_876_244_402_643_7,
    0.755_404_408_355_003,
    0.865_631_202_387_831_7,
    0.944_575_023_073_232_6,
    0.989_400_934_991_649_9,
];
const GL16_W: [f64; 8] = [
    0.189_450_610_455_068_5,
    0.182_603_415_044_923_6,
    0.169_156_519_395_002_5,
    0.149_595_988_816_576_7,
    0.124_628_971_255_533_9,
    0.095_158_511_682_492_8,
    0.062_253_523_938_647_89,
    0.027_152_459_411_754_095,
];

fn gl16_pole(phi: f64, b: f64, order: u32, a: f64, c: f64) -> Complex64 {
    let mid = 0.5 * (a + c);
    let half = 0.5 * (c - a);
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..8 {
        let dx = half * GL16_X[i];
        for u in [mid + dx, mid - dx] {
            let denom = Complex64::new(u, -b).powu(order);
            acc += Complex64::new(0.0, phi * u).exp() / denom * GL16_W[i];
        }
    }
    acc * half
}

/// `V_l(φ, b) = ∫ e^{iφu} / (u − ib)^l du` over the real line.
fn pole_line_integral(
    phi: f64,
    b: f64,
    order: u32,
    grid: &GridControl,
) -> Result<Complex64, FreqError> {
    if phi.abs() < PHASE_MIN {
        return Err(FreqError::PhaseDegenerate { phase: phi });
    }
    if b == 0.0 || !b.is_finite() {
        return Err(FreqError::PoleOnAxis);
    }
    let period_cap = core::f64::consts::PI / phi.abs() / (1.5 * grid.density);
    let extent = (48.0 * grid.density / phi.abs())
        .max(2.0 * grid.window)
        .max(24.0 * b.abs());

    // Panels on [0, extent], mirrored: geometric growth from the pole scale,
    // capped by the window resolution inside the window and by the
    // oscillation period everywhere.
    let mut acc = Complex64::new(0.0, 0.0);
    let first = (b.abs() * 0.5).min(period_cap).max(extent * 1e-15);
    let fine_cap = (grid.window / (8.0 * grid.density)).max(first);
    for side in [1.0_f64, -1.0] {
        let mut x = 0.0_f64;
        let mut w = first;
        while x < extent {
            let cap = if x < grid.window {
                fine_cap.min(period_cap)
            } else {
                period_cap
            };
            let step = w.min(cap).min(extent - x);
            let (lo, hi) = if side > 0.0 {
                (x, x + step)
            } else {
                (-(x + step), -x)
            };
            acc += gl16_pole(phi, b, order, lo, hi);
            x += step;
            w *= 1.8;
        }
    }

    // Two-term integration-by-parts tails beyond ±extent.
    let iphi = Complex64::new(0.0, phi);
    let l = order as f64;
    let zk_r = Complex64::new(extent, -b);
    let right = Complex64::new(0.0, phi * extent).exp()
        * (-1.0 / (iphi * zk_r.powu(order)) - l / (iphi * iphi * zk_r.powu(order + 1)));
    let zk_l = Complex64::new(-extent, -b);
    let left = Complex64::new(0.0, -phi * extent).exp()
        * (1.0 / (iphi * zk_l.powu(order)) + l / (iphi * iphi * zk_l.powu(order + 1)));
    Ok(acc + right + left)
}

/// Cache of `U_l(φ, z)` values keyed by exact bit patterns.
pub type UCache = BTreeMap<(u64, u64, u64, u32), Complex64>;

/// `U_l(φ, z) = ∫ e^{iφk}/(k − z)^l dk = e^{iφ·Re z} V_l(φ, Im z)`.
pub fn pole_integral(
    phi: f64,
    z: Complex64,
    order: u32,
    grid: &GridControl,
    cache: &mut UCache,
) -> Result<Complex64, FreqError> {
    let key = (phi.to_bits(), z.re.to_bits(), z.im.to_bits(), order);
    if let Some(v) = cache.get(&key) {
        return Ok(*v);
    }
    let v = pole_line_integral(phi, z.im, order, grid)? * Complex64::new(0.0, phi * z.re).exp();
    cache.insert(key, v);
    Ok(v)
}

/// Group near-coincident poles into (location, multiplicity) clusters.
pub(crate) fn cluster_poles(poles: &[Complex64]) -> Result<Vec<(Complex64, u32)>, FreqError> {
    let mut clusters: Vec<(Complex64, u32)> = Vec::new();
    for &z in poles {
        let mut merged = false;
        for (zc, count) in clusters.iter_mut() {
            let scale = 1.0_f64.max(zc.norm()).max(z.norm());
            if (*zc - z).norm() <= POLE_MERGE_REL * scale {
                // running mean keeps the cluster centred
                *zc = (*zc * *count as f64 + z) / (*count + 1) as f64;
                *count += 1;
                merged = true;
                break;
            }
        }
        if !merged {
            clusters.push((z, 1));
        }
    }
    for (_, count) in &clusters {
        if *count > 3 {
            return Err(FreqError::MultiplicityTooHigh);
        }
    }
    Ok(clusters)
}

fn monomial(z: Complex64, m: u32) -> Complex64 {
    z.powu(m)
}

fn monomial_deriv(z: Complex64, m: u32) -> Complex64 {
    if m == 0 {
        Complex64::new(0.0, 0.0)
    } else {
        z.powu(m - 1) * m as f64
    }
}

fn monomial_deriv2_half(z: Complex64, m: u32) -> Complex64 {
    if m < 2 {
        Complex64::new(0.0, 0.0)
    } else {
        z.powu(m - 2) * (m * (m - 1)) as f64 * 0.5
    }
}

/// Partial-fraction coefficients of `k^m / ∏ (k − z_j)^{mult_j}`: returns
/// `(z, order, coefficient)` triples. The polynomial quotient is dropped —
/// its regularized integral against a nonzero phase vanishes.
fn residue_coefficients(
    clusters: &[(Complex64, u32)],
    m: u32,
) -> Result<Vec<(Complex64, u32, Complex64)>, FreqError> {
    let mut out = Vec::new();
    match clusters {
        [] => {}
        [(z, 1)] => out.push((*z, 1, monomial(*z, m))),
        [(z, 2)] => {
            out.push((*z, 2, monomial(*z, m)));
            out.push((*z, 1, monomial_deriv(*z, m)));
        }
        [(z, 3)] => {
            out.push((*z, 3, monomial(*z, m)));
            out.push((*z, 2, monomial_deriv(*z, m)));
            out.push((*z, 1, monomial_deriv2_half(*z, m)));
        }
        _ => {
            let all_simple = clusters.iter().all(|(_, c)| *c == 1);
            if all_simple {
                for (j, (zj, _)) in clusters.iter().enumerate() {
                    let mut denom = Complex64::new(1.0, 0.0);
                    for (l, (zl, _)) in clusters.iter().enumerate() {
                        if l != j {
                            denom *= *zj - *zl;
                        }
                    }
                    out.push((*zj, 1, monomial(*zj, m) / denom));
                }
            } else if clusters.len() == 2 {
                // One double, one simple (in either order).
                let (dbl, smp) = if clusters[0].1 == 2 {
                    (clusters[0].0, clusters[1].0)
                } else {
                    (clusters[1].0, clusters[0].0)
                };
                if clusters[0].1 + clusters[1].1 != 3 {
                    return Err(FreqError::MultiplicityTooHigh);
                }
                let dz = dbl - smp;
                out.push((dbl, 2, monomial(dbl, m) / dz));
                out.push((
                    dbl,
                    1,
                    (monomial_deriv(dbl, m) * dz - monomial(dbl, m)) / (dz * dz),
                ));
                out.push((smp, 1, monomial(smp, m) / (dz * dz)));
            } else {
                return Err(FreqError::MultiplicityTooHigh);
            }
        }
    }
    Ok(out)
}

/// `J_m = ∫ k^m e^{iφk} / ∏(k − z_j) dk` (regularized; pole parts only).
fn canonical_integral(
    m: u32,
    phi: f64,
    poles: &[Complex64],
    grid: &GridControl,
    cache: &mut UCache,
) -> Result<Complex64, FreqError> {
    if poles.is_empty() {
        // Pure polynomial × e^{iφk}: regularized to zero for φ ≠ 0.
        if phi.abs() < PHASE_MIN {
            return Err(FreqError::PhaseDegenerate { phase: phi });
        }
        return Ok(Complex64::new(0.0, 0.0));
    }
    let clusters = cluster_poles(poles)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (z, order, coeff) in residue_coefficients(&clusters, m)? {
        acc += coeff * pole_integral(phi, z, order, grid, cache)?;
    }
    Ok(acc)
}

/// Dyadic spectral factor `∫ dk k² Im G(kR) e^{i·phase·k} / ∏(k − z_j)`.
///
/// `alpha`/`beta` are the projector tensors of the separation; the result
/// combines the three polynomial coefficients of each plane-wave half.
pub fn spectral_factor(
    r: f64,
    alpha: &ComplexDyadic,
    beta: &ComplexDyadic,
    phase: f64,
    poles: &[Complex64],
    grid: &GridControl,
    cache: &mut UCache,
) -> Result<ComplexDyadic, FreqError> {
    if poles.is_empty() {
        return Ok(ComplexDyadic::ZERO);
    }
    let inv8pi = 1.0 / (8.0 * core::f64::consts::PI);
    let mut out = ComplexDyadic::ZERO;
    for s in [1.0_f64, -1.0] {
        let phi = s * r + phase;
        let j0 = canonical_integral(0, phi, poles, grid, cache)?;
        let j1 = canonical_integral(1, phi, poles, grid, cache)?;
        let j2 = canonical_integral(2, phi, poles, grid, cache)?;
        let c2 = Complex64::new(0.0, -s * inv8pi / r);
        let c1 = Complex64::new(inv8pi / (r * r), 0.0);
        let c0 = Complex64::new(0.0, s * inv8pi / (r * r * r));
        out = out.add(&alpha.scale(c2 * j2));
        out = out.add(&beta.scale(c1 * j1 + c0 * j0));
    }
    Ok(out)
}

/// Binomial coefficients for the small shift powers used here.
fn binomial(n: u32, k: u32) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Dyadic spectral factor with a polynomial shift:
/// `∫ dk k² Im G(kR) (k − shift)^{shift_pow} e^{i·phase·k} / ∏(k − z_j)`.
#[allow(clippy::too_many_arguments)]
pub fn spectral_factor_shifted(
    r: f64,
    alpha: &ComplexDyadic,
    beta: &ComplexDyadic,
    phase: f64,
    poles: &[Complex64],
    shift_pow: u32,
    shift: Complex64,
    grid: &GridControl,
    cache: &mut UCache,
) -> Result<ComplexDyadic, FreqError> {
    if poles.is_empty() {
        return Ok(ComplexDyadic::ZERO);
    }
    let inv8pi = 1.0 / (8.0 * core::f64::consts::PI);
    let mut out = ComplexDyadic::ZERO;
    for s in [1.0_f64, -1.0] {
        let phi = s * r + phase;
        // J_{m+j} shared across the three polynomial pieces
        let mut j_int = [Complex64::new(0.0, 0.0); 5];
        for (m, slot) in j_int
            .iter_mut()
            .enumerate()
            .take((2 + shift_pow as usize) + 1)
        {
            *slot = canonical_integral(m as u32, phi, poles, grid, cache)?;
        }
        let weights: [(u32, Complex64, bool); 3] = [
            (2, Complex64::new(0.0, -s * inv8pi / r), true),
            (1, Complex64::new(inv8pi / (r * r), 0.0), false),
            (0, Complex64::new(0.0, s * inv8pi / (r * r * r)), false),
        ];
        for (m, coeff, is_alpha) in weights {
            let mut j_total = Complex64::new(0.0, 0.0);
            for j in 0..=shift_pow {
                j_total +=
                    binomial(shift_pow, j) * (-shift).powu(shift_pow - j) * j_int[(m + j) as usize];
            }
            let tensor = if is_alpha { alpha } else { beta };
            out = out.add(&tensor.scale(coeff * j_total));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{alpha_tensor, beta_tensor, green_dyadic, Separation};

    fn grid() -> GridControl {
        GridControl {
            window: 0.1,
            density: 1.0,
        }
    }

    /// Closed values of U_l by residues: 2πi e^{iφz} (φ>0, Im z>0), etc.
    fn exact_u1(phi: f64, z: Complex64) -> Complex64 {
        if phi > 0.0 && z.im > 0.0 {
            Complex64::new(0.0, 2.0 * core::f64::consts::PI) * (Complex64::new(0.0, phi) * z).exp()
        } else if phi < 0.0 && z.im < 0.0 {
            -Complex64::new(0.0, 2.0 * core::f64::consts::PI) * (Complex64::new(0.0, phi) * z).exp()
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    fn exact_u2(phi: f64, z: Complex64) -> Complex64 {
        // d/dz of exact_u1
        exact_u1(phi, z) * Complex64::new(0.0, phi)
    }

    #[test]
    fn pole_integral_matches_residue_values() {
        let mut cache = UCache::new();
        let g = grid();
        for &(phi, zre, zim) in &[
            (3.0, 1.0, 1e-4),
            (3.0, 1.0, -1e-4),
            (-3.0, 1.0, 1e-4),
            (-3.0, 1.0, -1e-4),
            (7.5, 0.99, 2e-6),
            (-0.4, 1.0, 1e-5),
            (12.0, 2.0, 5e-3),
        ] {
            let z = Complex64::new(zre, zim);
            let got = pole_integral(phi, z, 1, &g, &mut cache).unwrap();
            let expect = exact_u1(phi, z);
            let scale = 2.0 * core::f64::consts::PI;
            assert!(
                (got - expect).norm() <= 2e-4 * scale,
                "phi={phi}, z={z}: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn pole_integral_second_order() {
        let mut cache = UCache::new();
        let g = grid();
        for &(phi, zim) in &[(3.0, 1e-4), (5.0, -1e-5), (-2.0, 1e-4)] {
            let z = Complex64::new(1.0, zim);
            let got = pole_integral(phi, z, 2, &g, &mut cache).unwrap();
            let expect = exact_u2(phi, z);
            let scale = 2.0 * core::f64::consts::PI * phi.abs();
            assert!(
                (got - expect).norm() <= 2e-4 * scale,
                "phi={phi}, z={z}: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn refinement_tightens_pole_integral() {
        let mut cache = UCache::new();
        let z = Complex64::new(1.0, 1e-5);
        let phi = 3.0;
        let coarse = pole_integral(phi, z, 1, &grid(), &mut cache).unwrap();
        let fine = pole_integral(
            phi,
            z,
            1,
            &GridControl {
                window: 0.1,
                density: 4.0,
            },
            &mut UCache::new(),
        )
        .unwrap();
        let expect = exact_u1(phi, z);
        assert!((fine - expect).norm() <= (coarse - expect).norm() + 1e-12);
        assert!((fine - expect).norm() <= 2e-6 * expect.norm());
    }

    #[test]
    fn degenerate_phase_rejected() {
        let mut cache = UCache::new();
        let e = pole_integral(0.0, Complex64::new(1.0, 1e-5), 1, &grid(), &mut cache);
        assert!(matches!(e, Err(FreqError::PhaseDegenerate { .. })));
    }

    #[test]
    fn residues_for_two_simple_poles() {
        // k/(k−z1)(k−z2) → c1 = z1/(z1−z2), c2 = z2/(z2−z1)
        let z1 = Complex64::new(1.0, 1e-4);
        let z2 = Complex64::new(0.7, -2e-4);
        let clusters = cluster_poles(&[z1, z2]).unwrap();
        let res = residue_coefficients(&clusters, 1).unwrap();
        assert_eq!(res.len(), 2);
        assert!((res[0].2 - z1 / (z1 - z2)).norm() < 1e-12);
        assert!((res[1].2 - z2 / (z2 - z1)).norm() < 1e-12);
    }

    #[test]
    fn near_coincident_poles_merge_to_double() {
        let z = Complex64::new(1.0, 1e-6);
        let clusters = cluster_poles(&[z, z + Complex64::new(1e-12, 0.0)]).unwrap();
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].1, 2);
    }

    /// The spectral factor with a single upper-half pole at k₀ + iη must
    /// reproduce π k₀² G(R, k₀) as η → 0 (the residue identity behind the
    /// quasistationary closed forms).
    #[test]
    fn spectral_factor_residue_identity() {
        let r = 3.0;
        let sep = Separation::along_z(r).unwrap();
        let alpha = alpha_tensor(&sep);
        let beta = beta_tensor(&sep);
        let k0 = 1.0;
        let eta = 1e-6;
        let mut cache = UCache::new();
        let f = spectral_factor(
            r,
            &alpha,
            &beta,
            0.0,
            &[Complex64::new(k0, eta)],
            &grid(),
            &mut cache,
        )
        .unwrap();
        let g = green_dyadic(&sep, k0).unwrap();
        let expect = g.scale(Complex64::new(core::f64::consts::PI * k0 * k0, 0.0));
        let scale = expect.max_norm();
        for i in 0..3 {
            for j in 0..3 {
                assert!(
                    (f.entries[i][j] - expect.entries[i][j]).norm() <= 2e-4 * scale,
                    "({i},{j}): {} vs {}",
                    f.entries[i][j],
                    expect.entries[i][j]
                );
            }
        }
        // Lower-half pole gives the conjugate: π k₀² G*(R, k₀).
        let f_conj = spectral_factor(
            r,
            &alpha,
            &beta,
            0.0,
            &[Complex64::new(k0, -eta)],
            &grid(),
            &mut UCache::new(),
        )
        .unwrap();
        let expect_conj = expect.conj();
        for i in 0..3 {
            for j in 0..3 {
                assert!((f_conj.entries[i][j] - expect_conj.entries[i][j]).norm() <= 2e-4 * scale);
            }
        }
    }
}
