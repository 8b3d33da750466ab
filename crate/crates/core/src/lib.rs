//! Photon statistics and quadrature squeezing of a three-level cascade laser
//! whose atoms sit in a closed cavity and are pumped bottom-to-top by
//! electron bombardment.
//!
//! The crate evaluates the closed-form steady-state results and reproduces
//! them along independent numerical routes:
//!
//! - [`model`]: parameters, derived rates and the operating regime.
//! - [`analytic`]: populations, photon statistics, quadrature variances,
//!   global squeezing and consistency diagnostics.
//! - [`dynamics`]: fixed-step RK4 integration of the moment equations and a
//!   direct steady-state linear solve.
//! - [`stochastic`]: Gillespie population jumps, Langevin ensembles for the
//!   collective coherence and the two-time field correlation.
//! - [`spectral`]: quadrature spectrum, band fraction `z(λ)` and band-limited
//!   squeezing, with an adaptive quadrature cross-check.
//! - [`cli`]: the config-driven command surface behind the `laserlab` binary.
//!
//! ```
//! use laserlab::{analytic, model::LaserParams};
//!
//! let params = LaserParams::new(1.0, 16.0, 0.0625, 100).unwrap();
//! assert!((params.eta() - 4.0).abs() < 1e-15);
//! let (s, s_out) = analytic::quadrature_squeezing(&params);
//! assert!((s - 0.5).abs() < 1e-12 && s == s_out);
//! ```

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod spectral;
pub mod stochastic;

pub use error::{Error, Result};
pub use model::{LaserParams, Regime};
