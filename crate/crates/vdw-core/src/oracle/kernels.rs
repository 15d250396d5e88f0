//! Builders for the generating time integrands of each quantity.
//!
//! Rates follow the propagator phases of the underlying processes: the atom
//! that starts excited contributes `e^{−i(ω_A − iΓ_A/2)t}` segments, photons
//! contribute `e^{±iωt}`, and every time variable carries the adiabatic
//! switch `e^{ηt}`. Each builder closes its phases (checked by
//! [`TimeKernel::validate`]) so the reduction yields pure damping at equal
//! times.
//!
//! Sign convention: the overall sign of every kernel is fixed so that its
//! quasistationary limit reproduces the closed forms in
//! [`crate::potentials`]; the two-sided (bra-side) kernels take the opposite
//! overall sign from their ket-side partners.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::params::{AtomPair, PulseParams, ThreeLevelConfig};

use super::kernel::{
    Chain, Envelope, LowerBound, RateExpr, Region, Segment, TimeKernel, UpperBound,
};

fn i_times(x: f64) -> Complex64 {
    Complex64::new(0.0, x)
}

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Sudden-excitation kernel for the ground-state atom (single-transit
/// causality). Pair with the plain `ω ↔ ω′` partner.
pub fn w_b_sudden_kernel(pair: &AtomPair, eta: f64) -> TimeKernel {
    let (wa, wb) = (pair.omega_a(), pair.omega_b());
    let t_seg = Segment::plain(
        RateExpr::new(Complex64::new(eta, -wb), 1, 0),
        LowerBound::Zero,
    );
    let tp_seg = Segment::plain(
        RateExpr::new(Complex64::new(eta, wa), -1, 0),
        LowerBound::Zero,
    );
    let tpp_seg = Segment::plain(
        RateExpr::new(Complex64::new(eta, -wa), 0, 1),
        LowerBound::Zero,
    );
    TimeKernel {
        omega_pulse: None,
        regions: vec![Region {
            prefactor: I,
            prefactor_rate: RateExpr::new(i_times(wb), 0, -1),
            chains: vec![
                Chain {
                    upper: UpperBound::Time,
                    segments: vec![t_seg, tp_seg],
                },
                Chain {
                    upper: UpperBound::Time,
                    segments: vec![tpp_seg],
                },
            ],
        }],
    }
}

/// Sudden-excitation kernel for the excited atom (two-transit causality).
/// Pair with the conjugated `(ω ↔ ω′)*` partner.
pub fn w_a_sudden_kernel(pair: &AtomPair, eta: f64) -> TimeKernel {
    let (wa, wb) = (pair.omega_a(), pair.omega_b());
    let segments = vec![
        Segment::plain(
            RateExpr::new(Complex64::new(eta, -wb), 1, 0),
            LowerBound::Zero,
        ),
        Segment::plain(
            RateExpr::new(Complex64::new(eta, wb), 0, -1),
            LowerBound::Zero,
        ),
        Segment::plain(
            RateExpr::new(Complex64::new(eta, -wa), 0, 1),
            LowerBound::Zero,
        ),
    ];
    TimeKernel {
        omega_pulse: None,
        regions: vec![Region {
            prefactor: I,
            prefactor_rate: RateExpr::new(i_times(wa), -1, 0),
            chains: vec![Chain {
                upper: UpperBound::Time,
                segments,
            }],
        }],
    }
}

/// π-pulse kernel for the excited atom: one all-outside region plus three
/// regions weighted by `sin²(Ωt″/2)` reaching into the pulse.
pub fn w_a_pulse_kernel(pair: &AtomPair, pulse: &PulseParams, eta: f64) -> TimeKernel {
    let (wa, wb) = (pair.omega_a(), pair.omega_b());
    let (ga, gb) = (pair.gamma_a(), pair.gamma_b());
    let rate_t = RateExpr::new(Complex64::new(eta - gb / 2.0, -wb), 1, 0);
    let rate_tp = RateExpr::new(Complex64::new(eta + gb / 2.0, wb), 0, -1);
    let rate_tpp = RateExpr::new(Complex64::new(eta - ga / 2.0, -wa), 0, 1);
    let prefactor_rate = RateExpr::new(Complex64::new(-ga / 2.0, wa), -1, 0);

    let seg = |rate: RateExpr, lower: LowerBound, envelope: Envelope| Segment {
        rate,
        envelope,
        lower,
    };

    let regions = vec![
        // all three interaction times after the pulse
        Region {
            prefactor: I,
            prefactor_rate,
            chains: vec![Chain {
                upper: UpperBound::Time,
                segments: vec![
                    seg(rate_t, LowerBound::PulseEnd, Envelope::None),
                    seg(rate_tp, LowerBound::PulseEnd, Envelope::None),
                    seg(rate_tpp, LowerBound::PulseEnd, Envelope::None),
                ],
            }],
        },
        // earliest interaction inside the pulse
        Region {
            prefactor: I,
            prefactor_rate,
            chains: vec![
                Chain {
                    upper: UpperBound::Time,
                    segments: vec![
                        seg(rate_t, LowerBound::PulseEnd, Envelope::None),
                        seg(rate_tp, LowerBound::PulseEnd, Envelope::None),
                    ],
                },
                Chain {
                    upper: UpperBound::PulseEnd,
                    segments: vec![seg(rate_tpp, LowerBound::Zero, Envelope::SinSq)],
                },
            ],
        },
        // two earliest interactions inside the pulse
        Region {
            prefactor: I,
            prefactor_rate,
            chains: vec![
                Chain {
                    upper: UpperBound::Time,
                    segments: vec![seg(rate_t, LowerBound::PulseEnd, Envelope::None)],
                },
                Chain {
                    upper: UpperBound::PulseEnd,
                    segments: vec![
                        seg(rate_tp, LowerBound::Zero, Envelope::None),
                        seg(rate_tpp, LowerBound::Zero, Envelope::SinSq),
                    ],
                },
            ],
        },
        // all three inside the pulse
        Region {
            prefactor: I,
            prefactor_rate,
            chains: vec![Chain {
                upper: UpperBound::PulseEnd,
                segments: vec![
                    seg(rate_t, LowerBound::Zero, Envelope::None),
                    seg(rate_tp, LowerBound::Zero, Envelope::None),
                    seg(rate_tpp, LowerBound::Zero, Envelope::SinSq),
                ],
            }],
        },
    ];

    TimeKernel {
        omega_pulse: Some(pulse.rabi()),
        regions,
    }
}

/// π-pulse kernel for the ground-state atom: the bra and ket interaction
/// times factorize, giving a 3 × 2 product of regions.
pub fn w_b_pulse_kernel(pair: &AtomPair, pulse: &PulseParams, eta: f64) -> TimeKernel {
    let (wa, wb) = (pair.omega_a(), pair.omega_b());
    let (ga, gb) = (pair.gamma_a(), pair.gamma_b());
    let rate_t = RateExpr::new(Complex64::new(eta + gb / 2.0, -wb), 1, 0);
    let rate_tp = RateExpr::new(Complex64::new(eta - ga / 2.0, wa), -1, 0);
    let rate_tpp = RateExpr::new(Complex64::new(eta - ga / 2.0, -wa), 0, 1);
    let prefactor_rate = RateExpr::new(Complex64::new(-gb / 2.0, wb), 0, -1);

    let one = Complex64::new(1.0, 0.0);
    let seg = |rate: RateExpr, lower: LowerBound, envelope: Envelope| Segment {
        rate,
        envelope,
        lower,
    };

    // In-pulse interactions weigh in with sin²(Ω t/2): the flip amplitude
    // sin(Ωt/2) times the survival factor cos(Ω(τ−t)/2) = sin(Ωt/2) through
    // the rest of a π pulse. Both groups carry real unit weights.
    // (weight, chains) alternatives for the (t, t′) pair…
    let group_tt: Vec<(Complex64, Vec<Chain>)> = vec![
        (
            one,
            vec![Chain {
                upper: UpperBound::Time,
                segments: vec![
                    seg(rate_t, LowerBound::PulseEnd, Envelope::None),
                    seg(rate_tp, LowerBound::PulseEnd, Envelope::None),
                ],
            }],
        ),
        (
            one,
            vec![
                Chain {
                    upper: UpperBound::Time,
                    segments: vec![seg(rate_t, LowerBound::PulseEnd, Envelope::None)],
                },
                Chain {
                    upper: UpperBound::PulseEnd,
                    segments: vec![seg(rate_tp, LowerBound::Zero, Envelope::SinSq)],
                },
            ],
        ),
        (
            one,
            vec![Chain {
                upper: UpperBound::PulseEnd,
                segments: vec![
                    seg(rate_t, LowerBound::Zero, Envelope::None),
                    seg(rate_tp, LowerBound::Zero, Envelope::SinSq),
                ],
            }],
        ),
    ];
    // …and for t″.
    let group_tpp: Vec<(Complex64, Vec<Chain>)> = vec![
        (
            one,
            vec![Chain {
                upper: UpperBound::Time,
                segments: vec![seg(rate_tpp, LowerBound::PulseEnd, Envelope::None)],
            }],
        ),
        (
            one,
            vec![Chain {
                upper: UpperBound::PulseEnd,
                segments: vec![seg(rate_tpp, LowerBound::Zero, Envelope::SinSq)],
            }],
        ),
    ];

    let mut regions = Vec::with_capacity(group_tt.len() * group_tpp.len());
    for (w1, chains1) in &group_tt {
        for (w2, chains2) in &group_tpp {
            let mut chains = chains1.clone();
            chains.extend(chains2.iter().cloned());
            regions.push(Region {
                prefactor: I * w1 * w2,
                prefactor_rate,
                chains,
            });
        }
    }

    TimeKernel {
        omega_pulse: Some(pulse.rabi()),
        regions,
    }
}

/// Adiabatic kernel for the identical-atom level shift of `|0⟩` (both
/// diagram families). No frequency partner is added: the two regions are the
/// partner pair.
pub fn identical_e0_kernel(cfg: &ThreeLevelConfig, eta: f64) -> TimeKernel {
    let kl = cfg.k_lower();
    let ku = cfg.k_upper();
    TimeKernel {
        omega_pulse: None,
        regions: vec![
            identical_ket_region(kl, ku, eta, I),
            identical_bra_region(kl, ku, eta, I),
        ],
    }
}

/// Adiabatic kernel for the identical-atom phase-shift rate: twice the
/// ket-side region alone.
pub fn identical_eprime_kernel(cfg: &ThreeLevelConfig, eta: f64) -> TimeKernel {
    let kl = cfg.k_lower();
    let ku = cfg.k_upper();
    TimeKernel {
        omega_pulse: None,
        regions: vec![identical_ket_region(kl, ku, eta, 2.0 * I)],
    }
}

fn identical_ket_region(kl: f64, ku: f64, eta: f64, prefactor: Complex64) -> Region {
    Region {
        prefactor,
        prefactor_rate: RateExpr::new(i_times(kl), -1, 0),
        chains: vec![Chain {
            upper: UpperBound::Time,
            segments: vec![
                Segment::plain(
                    RateExpr::new(Complex64::new(eta, -ku), 1, 0),
                    LowerBound::MinusInf,
                ),
                Segment::plain(
                    RateExpr::new(Complex64::new(eta, ku), 0, -1),
                    LowerBound::MinusInf,
                ),
                Segment::plain(
                    RateExpr::new(Complex64::new(eta, -kl), 0, 1),
                    LowerBound::MinusInf,
                ),
            ],
        }],
    }
}

fn identical_bra_region(kl: f64, ku: f64, eta: f64, prefactor: Complex64) -> Region {
    Region {
        prefactor,
        prefactor_rate: RateExpr::new(i_times(ku), 0, -1),
        chains: vec![
            Chain {
                upper: UpperBound::Time,
                segments: vec![
                    Segment::plain(
                        RateExpr::new(Complex64::new(eta, -ku), 1, 0),
                        LowerBound::MinusInf,
                    ),
                    Segment::plain(
                        RateExpr::new(Complex64::new(eta, kl), -1, 0),
                        LowerBound::MinusInf,
                    ),
                ],
            },
            Chain {
                upper: UpperBound::Time,
                segments: vec![Segment::plain(
                    RateExpr::new(Complex64::new(eta, -kl), 0, 1),
                    LowerBound::MinusInf,
                )],
            },
        ],
    }
}

/// Adiabatic two-photon (antiresonant) kernel of the excited-atom family:
/// its reduction carries the joint `1/(ω + ω′ − Δ_AB)` denominator.
pub fn diag_c_kernel(pair: &AtomPair, eta: f64) -> TimeKernel {
    let (wa, wb) = (pair.omega_a(), pair.omega_b());
    TimeKernel {
        omega_pulse: None,
        regions: vec![Region {
            prefactor: I,
            prefactor_rate: RateExpr::new(i_times(wa), -1, 0),
            chains: vec![Chain {
                upper: UpperBound::Time,
                segments: vec![
                    Segment::plain(
                        RateExpr::new(Complex64::new(eta, -wb), 0, -1),
                        LowerBound::MinusInf,
                    ),
                    Segment::plain(
                        RateExpr::new(Complex64::new(eta, wb), 1, 0),
                        LowerBound::MinusInf,
                    ),
                    Segment::plain(
                        RateExpr::new(Complex64::new(eta, -wa), 0, 1),
                        LowerBound::MinusInf,
                    ),
                ],
            }],
        }],
    }
}

/// Adiabatic single-photon-exchange kernel of the ground-atom family
/// (opposite-sign pole pair).
pub fn diag_m_kernel(pair: &AtomPair, eta: f64) -> TimeKernel {
    let (wa, wb) = (pair.omega_a(), pair.omega_b());
    TimeKernel {
        omega_pulse: None,
        regions: vec![Region {
            prefactor: I,
            prefactor_rate: RateExpr::new(i_times(wb), 0, -1),
            chains: vec![
                Chain {
                    upper: UpperBound::Time,
                    segments: vec![
                        Segment::plain(
                            RateExpr::new(Complex64::new(eta, -wb), 1, 0),
                            LowerBound::MinusInf,
                        ),
                        Segment::plain(
                            RateExpr::new(Complex64::new(eta, wa), -1, 0),
                            LowerBound::MinusInf,
                        ),
                    ],
                },
                Chain {
                    upper: UpperBound::Time,
                    segments: vec![Segment::plain(
                        RateExpr::new(Complex64::new(eta, -wa), 0, 1),
                        LowerBound::MinusInf,
                    )],
                },
            ],
        }],
    }
}

/// Adiabatic two-photon (antiresonant) kernel of the ground-atom family.
pub fn diag_o_kernel(pair: &AtomPair, eta: f64) -> TimeKernel {
    let (wa, wb) = (pair.omega_a(), pair.omega_b());
    TimeKernel {
        omega_pulse: None,
        regions: vec![Region {
            prefactor: I,
            prefactor_rate: RateExpr::new(i_times(wb), 1, 0),
            chains: vec![
                Chain {
                    upper: UpperBound::Time,
                    segments: vec![
                        Segment::plain(
                            RateExpr::new(Complex64::new(eta, -wb), 0, -1),
                            LowerBound::MinusInf,
                        ),
                        Segment::plain(
                            RateExpr::new(Complex64::new(eta, wa), -1, 0),
                            LowerBound::MinusInf,
                        ),
                    ],
                },
                Chain {
                    upper: UpperBound::Time,
                    segments: vec![Segment::plain(
                        RateExpr::new(Complex64::new(eta, -wa), 0, 1),
                        LowerBound::MinusInf,
                    )],
                },
            ],
        }],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::kernel::reduce_time_kernel;
    use crate::tensor::Separation;

    fn pair() -> AtomPair {
        AtomPair::new(
            1.0,
            0.99,
            0.0,
            0.0,
            [1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            Separation::along_z(3.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn all_kernels_validate() {
        let p = pair();
        let pulse = PulseParams::new(0.05).unwrap();
        let cfg = ThreeLevelConfig::new(
            0.0,
            1.0,
            2.01,
            [1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            Separation::along_z(3.0).unwrap(),
        )
        .unwrap();
        let eta = 1e-5;
        for kernel in [
            w_b_sudden_kernel(&p, eta),
            w_a_sudden_kernel(&p, eta),
            w_a_pulse_kernel(&p, &pulse, eta),
            w_b_pulse_kernel(&p, &pulse, eta),
            identical_e0_kernel(&cfg, eta),
            identical_eprime_kernel(&cfg, eta),
            diag_c_kernel(&p, eta),
            diag_m_kernel(&p, eta),
            diag_o_kernel(&p, eta),
        ] {
            kernel.validate().unwrap();
        }
    }

    /// The adiabatic ground-family kernel reduces to
    /// `e^{3ηT} / [(Δ − 2iη)(ω − ω_A + iη)(ω′ − ω_A − iη)]`: opposite-sign
    /// pole pair, positive overall sign.
    #[test]
    fn diag_m_reduces_to_pole_pair() {
        let p = pair();
        let eta = 0.3;
        let kernel = diag_m_kernel(&p, eta);
        let (w, wp, t) = (1.13, 0.82, 1.7);
        let got = reduce_time_kernel(&kernel, w, wp, t).unwrap();
        let delta = p.detuning();
        let expect = (Complex64::new(3.0 * eta, 0.0) * t).exp()
            / (Complex64::new(delta, -2.0 * eta)
                * Complex64::new(w - p.omega_a(), eta)
                * Complex64::new(wp - p.omega_a(), -eta));
        assert!(
            (got - expect).norm() <= 1e-12 * expect.norm(),
            "{got} vs {expect}"
        );
    }

    /// The adiabatic excited-family two-photon kernel carries the joint
    /// denominator `ω + ω′ − Δ_AB` and same-sign poles.
    #[test]
    fn diag_c_reduces_to_joint_pole() {
        let p = pair();
        let eta = 0.25;
        let kernel = diag_c_kernel(&p, eta);
        let delta = p.detuning();
        // off resonance and exactly on resonance (ω = ω′ = k_A, η finite)
        for (w, wp, t) in [(0.9, 1.2, 0.6), (p.omega_a(), p.omega_a(), 0.6)] {
            let got = reduce_time_kernel(&kernel, w, wp, t).unwrap();
            let expect = -(Complex64::new(3.0 * eta, 0.0) * t).exp()
                / (Complex64::new(w - p.omega_a(), -3.0 * eta)
                    * Complex64::new(w + wp - delta, -2.0 * eta)
                    * Complex64::new(wp - p.omega_a(), -eta));
            assert!(
                (got - expect).norm() <= 1e-12 * expect.norm(),
                "{got} vs {expect}"
            );
        }
    }

    /// Ket-side sudden kernel in the adiabatic limit: same-sign pole pair
    /// with the `1/Δ` weight, positive sign.
    #[test]
    fn w_a_adiabatic_pole_structure() {
        let p = pair();
        let eta = 0.2;
        // Replace the finite lower bounds by the adiabatic switch.
        let mut kernel = w_a_sudden_kernel(&p, eta);
        for region in &mut kernel.regions {
            for chain in &mut region.chains {
                for seg in &mut chain.segments {
                    seg.lower = LowerBound::MinusInf;
                }
            }
        }
        let (w, wp, t) = (1.21, 1.05, 0.9);
        let got = reduce_time_kernel(&kernel, w, wp, t).unwrap();
        let delta = p.detuning();
        let expect = (Complex64::new(3.0 * eta, 0.0) * t).exp()
            / (Complex64::new(delta, 2.0 * eta)
                * Complex64::new(w - p.omega_a(), -3.0 * eta)
                * Complex64::new(wp - p.omega_a(), -eta));
        assert!(
            (got - expect).norm() <= 1e-12 * expect.norm(),
            "{got} vs {expect}"
        );
    }
}
