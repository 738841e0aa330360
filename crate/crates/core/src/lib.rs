//! Bright-state stimulated Raman adiabatic passage (b-STIRAP) in a
//! propagating medium of three-level Λ atoms with unequal oscillator
//! strengths.
//!
//! The crate is `no_std` (with `alloc`) and contains only the numerics:
//!
//! - [`domain`]: dimensionless parameters, grids and entrance pulses;
//! - [`atom`]: the single-atom Hamiltonian, dressed states and the RK4
//!   amplitude integrator;
//! - [`propagation`]: coupled atom–field stepping through the medium and
//!   the photon-number and two-photon-detuning diagnostics;
//! - [`analytic`]: the adiabatic characteristics solution for the mixing
//!   angle, the adiabaticity factor, and the transfer-length limits.

#![no_std]

extern crate alloc;

pub mod analytic;
pub mod atom;
pub mod domain;
mod error;
mod math;
pub mod propagation;

pub use error::{Error, Result};
