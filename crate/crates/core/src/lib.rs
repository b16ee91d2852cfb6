//! Numerical laboratory for the focusing inhomogeneous nonlinear Schrödinger
//! equation with a spatially growing weight,
//!
//! ```text
//! i ∂_t u + Δu = −|x|^b |u|^{p−1} u,   x ∈ ℝ^N,  b > 0,
//! ```
//!
//! restricted to radial functions.
//!
//! The crate is `no_std` (it needs `alloc`) and carries only the numerics:
//!
//! * [`model`]: parameters, critical exponents and regime classification.
//! * [`grid`]: the truncated cell-centred radial grid, its quadrature and the
//!   finite-volume Laplacian.
//! * [`functionals`]: mass, energy, action, Nehari and virial functionals,
//!   Gagliardo–Nirenberg ratio and the phase-optimised H¹ distance.
//! * [`groundstate`]: the positive radial ground state by shooting, its
//!   stationary identities, the action level `d(ω)` and the Nehari projection.
//! * [`normalized`]: fixed-mass standing waves (scaling construction and the
//!   constrained minimisation in the mass-subcritical regime).
//! * [`dynamics`]: Crank–Nicolson time integration with conservation and
//!   virial monitoring, potential-well classification and the stability /
//!   instability experiment families.
//!
//! File formats, configuration and the command line live in the `inls-lab`
//! crate.

#![no_std]
#![warn(missing_debug_implementations)]
// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dynamics;
pub mod error;
pub mod functionals;
pub mod grid;
pub mod groundstate;
pub mod model;
pub mod normalized;
pub mod perturbation;
pub(crate) mod tridiag;

pub use error::{Error, Result};
pub use grid::{RadialField, RadialGrid};
pub use model::{ModelParams, Regime, Scalar};

pub use num_complex::Complex64;
