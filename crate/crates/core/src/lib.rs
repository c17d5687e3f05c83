//! Numerical laboratory for the Aharonov–Bohm effect.
//!
//! The crate computes vector-potential phases along open and closed paths,
//! compares the field-overlap interaction energy with the minimal-coupling
//! energy `−q v·A`, and runs a truncated-mode QED model of a charge and a
//! solenoid coupled through transverse photons.
//!
//! Modules, bottom up:
//!
//! - [`units`]: physical constants (SI or natural units).
//! - [`em`]: solenoid and point-charge potentials and fields, gauge
//!   functions, current discretization, finite-difference operators.
//! - [`quadrature`]: adaptive line and volume integrals.
//! - [`phase`]: path phases, the flux theorem, gauge scans.
//! - [`energy`]: the field-overlap energy and its comparison with `±q v·A`.
//! - [`qed`]: photon mode grids, second-order and exact evolution, branch
//!   states and the reduced density matrix of the charge.
//! - [`invariants`]: hermiticity, unitarity, transversality and
//!   finite-difference checks bundled as one suite.
//!
//! A guide with worked examples lives in the `book/` directory of the
//! repository; its code listings are compiled as doc-tests of this crate.

pub mod em;
pub mod energy;
mod error;
pub mod invariants;
pub mod phase;
pub mod qed;
pub mod quadrature;
pub mod units;

pub use error::{Error, Result};
pub use units::{Constants, UnitSystem};

/// Cartesian 3-vector used for positions, velocities and fields.
pub type Vec3 = nalgebra::Vector3<f64>;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/phases.md")]
    mod phases {}
    #[doc = include_str!("../../../book/src/energy.md")]
    mod energy {}
    #[doc = include_str!("../../../book/src/qed.md")]
    mod qed {}
    #[doc = include_str!("../../../book/src/entanglement.md")]
    mod entanglement {}
    #[doc = include_str!("../../../book/src/conventions.md")]
    mod conventions {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
