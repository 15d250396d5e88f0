//! Two-atom dispersion interactions with one atom excited.
//!
//! This crate evaluates the van der Waals potentials, level shifts and
//! phase-shift rates of a pair of two-level atoms (and of a pair of identical
//! three-level atoms) in free space, both dynamically and in the
//! quasistationary regime, working in natural units `ħ = c = ε₀ = 1` so that
//! every frequency is a wavenumber and every energy is an inverse length.
//!
//! Two independent evaluation routes are provided:
//!
//! * [`potentials`] — the closed-form expressions, built on the free-space
//!   dyadic Green function of [`tensor`];
//! * [`oracle`] — the generating time integrals, reduced analytically in the
//!   time variables and integrated numerically over the two photon
//!   frequencies with an adiabatic regulator `η → 0⁺`.
//!
//! The two routes share no numerics beyond the Green tensor itself, so their
//! agreement is a meaningful cross-check; the `oracle` module reports
//! convergence diagnostics for every evaluation.
//!
//! The crate is `no_std`-compatible (with `alloc`); the companion `vdw-cli`
//! crate carries IO, configuration files and the sweep front-end.

#![cfg_attr(not(feature = "std"), no_std)]
// negated comparisons like `!(x > 0.0)` are NaN-rejecting validity guards
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// indexed 0..3 loops mirror the tensor-component notation throughout
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod oracle;
pub mod params;
pub mod potentials;
pub mod tensor;

pub use params::{
    Atom, AtomPair, CouplingU, ParamError, PulseParams, RegimeWarning, ThreeLevelConfig,
};
pub use potentials::PotentialError;
pub use tensor::{ComplexDyadic, Separation, TensorError};
