//! Achievable information rates for on-off keying (OOK) and pulse-position
//! modulation (PPM) over a lossy optical channel with direct detection.
//!
//! The crate covers both Poissonian pulses and sub-Poissonian pulses built
//! from mixtures of adjacent Fock states. It provides:
//!
//! - [`photon_stats`]: photon-number distributions, `g2`, and the no-click
//!   probability after loss, exact and to second order.
//! - [`info_theory`]: binary asymmetric channel and erasure-channel mutual
//!   information, plus the single-mode capacity limit expressed per photon.
//! - [`analytic`]: closed-form PPM optima built on the Lambert W function.
//! - [`optimize`]: numerical maximization of the exact rates over the pulse
//!   mean photon number.
//! - [`montecarlo`]: a sampling oracle for click statistics.
//! - [`sweep`]: grid sweeps that produce CSV tables and SVG line plots.
//!
//! ```
//! use photorate::analytic::{self, AnalyticPoint};
//!
//! let point = AnalyticPoint::new(0.01, 1.0, 1.0).unwrap();
//! let mu = analytic::mu_opt_classical(&point).unwrap();
//! assert!((mu.value - 0.4218).abs() < 1e-3);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod error;
pub mod info_theory;
pub mod montecarlo;
pub mod optimize;
pub mod photon_stats;
pub mod sweep;

pub use error::{Error, Result};

/// A value computed from an approximation, together with whether the inputs
/// were inside the approximation's domain of validity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub valid: bool,
}

impl Estimate {
    pub fn new(value: f64, valid: bool) -> Self {
        Estimate { value, valid }
    }
}
