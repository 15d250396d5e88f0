//! Independent evaluation of the generating time integrals.
//!
//! Every closed form in [`crate::potentials`] descends from a nested time
//! integral over two photon frequencies. This module evaluates those
//! integrals directly: the time integrations are carried out analytically
//! (the integrands are products of exponentials), and the two frequency
//! integrals are done numerically with an adiabatic regulator `η → 0⁺`,
//! extrapolated over a decreasing η sequence. Agreement with the closed
//! forms is then a genuine cross-check of both routes.

pub mod freq;
pub mod kernel;
pub mod kernels;

mod run;

pub use kernel::{
    reduce_time_kernel, Chain, Envelope, KernelError, LowerBound, RateExpr, Region, Segment,
    TimeKernel, UpperBound,
};
pub use run::{
    oracle_identical, oracle_w_a_sudden, oracle_w_b_sudden, oracle_w_pulse, pole_kernel_excited,
    pole_kernel_ground, pole_pair_quadrature, sudden_regime_warnings, time_average, IdenticalShift,
    OracleError, OracleReport, OracleValue, PoleKernel, PolePair, QuadratureSpec,
};
