//! Closed-form PPM rates from the second-order expansion of the no-click
//! probability.
//!
//! With `eps ~ 1 - eta mu + g2 (eta mu)^2 / 2` and `p = nbar / mu`, the PPM
//! rate per bin becomes
//!
//! ```text
//! I(mu) = eta nbar (1 - g2 eta mu / 2) log2(mu / nbar)
//! ```
//!
//! which is maximized in closed form through the Lambert W function. The
//! optimum depends on `g2 eta nbar` only, through the photon information
//! efficiency `pie_approx`.

mod lambert;

pub use lambert::{lambert_w0, BRANCH_POINT};

use std::f64::consts::{E, LN_2};

use crate::error::{Error, Result};
use crate::photon_stats::max_mean_for_g2;
use crate::Estimate;

/// Output pulse energies `eta mu` at or above this are flagged as outside
/// the small-signal regime of the expansion.
pub const SMALL_SIGNAL_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticPoint {
    pub nbar: f64,
    pub eta: f64,
    pub g2: f64,
}

impl AnalyticPoint {
    pub fn new(nbar: f64, eta: f64, g2: f64) -> Result<Self> {
        if !(nbar > 0.0 && nbar.is_finite()) {
            return Err(Error::Domain {
                name: "nbar",
                value: nbar,
                domain: "(0, inf)",
            });
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::Domain {
                name: "eta",
                value: eta,
                domain: "(0, 1]",
            });
        }
        if !(g2 >= 0.0 && g2.is_finite()) {
            return Err(Error::Domain {
                name: "g2",
                value: g2,
                domain: "[0, inf)",
            });
        }
        Ok(AnalyticPoint { nbar, eta, g2 })
    }

    pub fn eta_nbar(&self) -> f64 {
        self.eta * self.nbar
    }
}

/// Second-order PPM rate at pulse mean `mu`. Flagged invalid when
/// `eta mu >= SMALL_SIGNAL_LIMIT`.
pub fn ppm_mi_approx(point: &AnalyticPoint, mu: f64) -> Result<Estimate> {
    if !(mu > point.nbar && mu.is_finite()) {
        return Err(Error::Domain {
            name: "mu",
            value: mu,
            domain: "(nbar, inf)",
        });
    }
    let AnalyticPoint { nbar, eta, g2 } = *point;
    let value = eta * nbar * (1.0 - 0.5 * g2 * eta * mu) * (mu / nbar).log2();
    Ok(Estimate::new(value, eta * mu < SMALL_SIGNAL_LIMIT))
}

/// Stationary point of [`ppm_mi_approx`] in `mu`,
/// `2 / (eta g2 W(2e / (g2 eta nbar)))`.
///
/// Flagged invalid when the result exceeds the largest mean compatible with
/// a non-negative variance at this `g2`.
pub fn mu_opt_classical(point: &AnalyticPoint) -> Result<Estimate> {
    if point.g2 == 0.0 {
        return Err(Error::ClassicalOptimumUndefined);
    }
    let w = lambert_w0(2.0 * E / (point.g2 * point.eta_nbar()))?;
    let mu = 2.0 / (point.eta * point.g2 * w);
    let physical = max_mean_for_g2(point.g2).is_none_or(|max| mu <= max);
    Ok(Estimate::new(mu, physical))
}

/// Photon information efficiency of optimized PPM under the second-order
/// expansion, as a function of the mean output photon number per bin:
///
/// ```text
/// Pi(x) = (1/W(2e/x) - 1) log2(x W(2e/x) / 2)
/// ```
///
/// Since `x W / 2 = e^(1 - W)`, this equals `(W - 1)^2 / (W ln 2)`. It
/// reaches zero at `x = 2` and grows again beyond, where the stationary
/// point of the expanded rate has `mu < nbar`. Flagged invalid once
/// `W(2e/x) <= 1`.
pub fn pie_approx(x: f64) -> Result<Estimate> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Domain {
            name: "x",
            value: x,
            domain: "(0, inf)",
        });
    }
    let w = lambert_w0(2.0 * E / x)?;
    let value = (1.0 / w - 1.0) * (0.5 * x * w).log2();
    Ok(Estimate::new(value, w > 1.0))
}

/// [`pie_approx`] with `W` replaced by its leading asymptote `ln`, the
/// `x -> 0` form.
pub fn pie_asymptotic(x: f64) -> f64 {
    let l = (2.0 * E / x).ln();
    (1.0 / l - 1.0) * (0.5 * x * l).ln() / LN_2
}

/// Optimized PPM rate for classical light, `eta nbar Pi(g2 eta nbar)`.
pub fn ppm_mi_classical_opt(point: &AnalyticPoint) -> Result<Estimate> {
    if point.g2 < 1.0 {
        return Err(Error::Domain {
            name: "g2",
            value: point.g2,
            domain: "[1, inf)",
        });
    }
    let pie = pie_approx(point.g2 * point.eta_nbar())?;
    let mu = mu_opt_classical(point)?;
    Ok(Estimate::new(
        point.eta_nbar() * pie.value,
        pie.valid && point.eta * mu.value < SMALL_SIGNAL_LIMIT,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonclassicalBranch {
    /// Single-photon Fock states, `mu = 1`.
    FockOne,
    /// Pulses on the variance boundary with `mu > 1`.
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonclassicalOptimum {
    /// Bits per bin.
    pub value: f64,
    pub branch: NonclassicalBranch,
    /// Optimal pulse mean photon number.
    pub mu: f64,
}

/// Transmission above which single photons maximize the approximate PPM rate,
/// `2 / ln(1/nbar)`.
pub fn fock_one_threshold(nbar: f64) -> f64 {
    2.0 / (1.0 / nbar).ln()
}

fn check_nonclassical(nbar: f64, eta: f64) -> Result<()> {
    if !(nbar > 0.0 && nbar < 1.0) {
        return Err(Error::Domain {
            name: "nbar",
            value: nbar,
            domain: "(0, 1)",
        });
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Domain {
            name: "eta",
            value: eta,
            domain: "(0, 1]",
        });
    }
    Ok(())
}

/// Single-photon branch, `eta nbar log2(1/nbar)`.
pub fn ppm_mi_fock_one(nbar: f64, eta: f64) -> Result<f64> {
    check_nonclassical(nbar, eta)?;
    Ok(-eta * nbar * nbar.log2())
}

/// Variance-boundary branch, `eta nbar (1 + eta/2) Pi(eta nbar / (1 + eta/2))`,
/// with its optimal `mu`.
pub fn ppm_mi_mixed(nbar: f64, eta: f64) -> Result<(f64, f64)> {
    check_nonclassical(nbar, eta)?;
    let gain = 1.0 + 0.5 * eta;
    let x = eta * nbar / gain;
    let value = eta * nbar * gain * pie_approx(x)?.value;
    let mu = 2.0 * gain / (eta * lambert_w0(2.0 * E / x)?);
    Ok((value, mu))
}

/// Approximate PPM rate optimized jointly over `mu` and `g2` subject to a
/// non-negative photon-number variance.
pub fn ppm_mi_nonclassical_opt(nbar: f64, eta: f64) -> Result<NonclassicalOptimum> {
    check_nonclassical(nbar, eta)?;
    if eta >= fock_one_threshold(nbar) {
        Ok(NonclassicalOptimum {
            value: ppm_mi_fock_one(nbar, eta)?,
            branch: NonclassicalBranch::FockOne,
            mu: 1.0,
        })
    } else {
        let (value, mu) = ppm_mi_mixed(nbar, eta)?;
        Ok(NonclassicalOptimum {
            value,
            branch: NonclassicalBranch::Mixed,
            mu,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    /// Dense grid maximization of `ppm_mi_approx`, the oracle for the
    /// closed-form optimum.
    fn grid_argmax(point: &AnalyticPoint, lo: f64, hi: f64, n: usize) -> (f64, f64) {
        (0..=n)
            .map(|i| lo * (hi / lo).powf(i as f64 / n as f64))
            .map(|mu| (mu, ppm_mi_approx(point, mu).unwrap().value))
            .fold((f64::NAN, f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best })
    }

    #[test]
    fn approx_rate_examples() {
        let p = AnalyticPoint::new(0.01, 1.0, 0.0).unwrap();
        let v = ppm_mi_approx(&p, 0.02).unwrap();
        assert!((v.value - 0.01).abs() < 1e-15);
        assert!(v.valid);
        for mu in [0.05, 0.3, 2.0] {
            let v = ppm_mi_approx(&p, mu).unwrap().value;
            assert!((v - 0.01 * (mu / 0.01f64).log2()).abs() < 1e-15);
        }
        let p = AnalyticPoint::new(0.01, 1.0, 1.0).unwrap();
        let v = ppm_mi_approx(&p, 0.4218).unwrap().value;
        // 40-digit evaluation at mu = 0.4218.
        assert!(rel(v, 0.042_599_46).abs() < 1e-6);
        let (mu_grid, best) = grid_argmax(&p, 0.02, 1.9, 100_000);
        assert!(rel(mu_grid, 0.4218) < 1e-3);
        assert!(v <= best + 1e-12);
        assert!(ppm_mi_approx(&p, 0.01).is_err());
        assert!(!ppm_mi_approx(&p, 0.6).unwrap().valid);
    }

    #[test]
    fn classical_optimum_examples() {
        let p = AnalyticPoint::new(0.01, 1.0, 1.0).unwrap();
        let mu = mu_opt_classical(&p).unwrap();
        assert!((mu.value - 0.421_773_371_837_313_1).abs() < 1e-13);
        assert!(mu.valid);

        // mu depends on eta only through the prefactor and the product
        // eta * nbar.
        let half = mu_opt_classical(&AnalyticPoint::new(0.01, 0.5, 1.0).unwrap()).unwrap();
        let ref_point = mu_opt_classical(&AnalyticPoint::new(0.005, 1.0, 1.0).unwrap()).unwrap();
        assert!(rel(half.value, 2.0 * ref_point.value) < 1e-14);

        let p2 = AnalyticPoint::new(0.01, 1.0, 2.0).unwrap();
        let mu2 = mu_opt_classical(&p2).unwrap().value;
        assert!((mu2 - 0.239_472_098_904_019_3).abs() < 1e-13);
        let (mu_grid, _) = grid_argmax(&p2, 0.02, 0.99, 200_000);
        assert!(rel(mu2, mu_grid) < 1e-3);

        let zero = AnalyticPoint::new(0.01, 1.0, 0.0).unwrap();
        assert!(matches!(mu_opt_classical(&zero), Err(Error::ClassicalOptimumUndefined)));
    }

    #[test]
    fn unphysical_optimum_is_flagged() {
        // g2 = 0.9 allows mu <= 10; a tiny output photon number pushes the
        // unconstrained optimum past it.
        let p = AnalyticPoint::new(1e-6, 0.01, 0.9).unwrap();
        let mu = mu_opt_classical(&p).unwrap();
        assert!(mu.value > 10.0);
        assert!(!mu.valid);
    }

    #[test]
    fn pie_examples() {
        // 40-digit evaluations with W from bisection.
        let p = pie_approx(0.1).unwrap();
        assert!((p.value - 1.825_289_670_801_16).abs() < 1e-13);
        assert!(p.valid);
        assert!((pie_approx(0.01).unwrap().value - 4.259_946_245_125_379).abs() < 1e-13);
        assert!((pie_approx(0.001).unwrap().value - 6.994_515_270_728_179).abs() < 1e-12);

        let ratio = pie_approx(1e-6).unwrap().value / pie_asymptotic(1e-6);
        assert!((ratio - 1.001_495_680_902_875).abs() < 1e-12);
        let ratio_1e3 = pie_approx(1e-3).unwrap().value / pie_asymptotic(1e-3);
        assert!((ratio - 1.0).abs() < (ratio_1e3 - 1.0).abs());

        assert!(!pie_approx(3.0).unwrap().valid);
        assert!(pie_approx(2.0).unwrap().value.abs() < 1e-12);
        assert!(pie_approx(3.0).unwrap().value > 0.0);
        for x in [1e-5, 0.1, 1.9, 5.0] {
            let w = lambert_w0(2.0 * E / x).unwrap();
            let folded = (w - 1.0) * (w - 1.0) / (w * LN_2);
            assert!((pie_approx(x).unwrap().value - folded).abs() < 1e-12);
        }
        assert!(pie_approx(0.0).is_err());
    }

    #[test]
    fn pie_decreasing_on_log_grid() {
        let values: Vec<f64> = (0..=500)
            .map(|i| 10f64.powf(-6.0 + 5.0 * i as f64 / 500.0))
            .map(|x| pie_approx(x).unwrap().value)
            .collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn classical_opt_examples() {
        let v = ppm_mi_classical_opt(&AnalyticPoint::new(0.1, 1.0, 1.0).unwrap()).unwrap();
        assert!((v.value - 0.182_528_967_080_116).abs() < 1e-13);
        // g2 rescales the argument of Pi only.
        let v2 = ppm_mi_classical_opt(&AnalyticPoint::new(0.05, 1.0, 2.0).unwrap()).unwrap();
        assert!(rel(v2.value, v.value / 2.0) < 1e-14);
        let tiny = ppm_mi_classical_opt(&AnalyticPoint::new(1e-9, 1.0, 1.0).unwrap()).unwrap();
        assert!(tiny.value < 1e-7);
        assert!(pie_approx(1e-9).unwrap().value > pie_approx(1e-6).unwrap().value);
        assert!(ppm_mi_classical_opt(&AnalyticPoint::new(0.05, 1.0, 0.5).unwrap()).is_err());
    }

    #[test]
    fn nonclassical_examples() {
        let opt = ppm_mi_nonclassical_opt(0.01, 0.5).unwrap();
        assert_eq!(opt.branch, NonclassicalBranch::FockOne);
        assert_eq!(opt.mu, 1.0);
        assert!((opt.value - 0.033_219_280_948_873_62).abs() < 1e-15);
        assert!((fock_one_threshold(0.01) - std::f64::consts::LOG10_E).abs() < 1e-15);

        let opt = ppm_mi_nonclassical_opt(0.01, 0.2).unwrap();
        assert_eq!(opt.branch, NonclassicalBranch::Mixed);
        assert!((opt.value - 0.013_785_252_590_930_94).abs() < 1e-14);
        assert!(opt.mu > 1.0);

        assert!(ppm_mi_nonclassical_opt(1.0, 0.5).is_err());
        assert!(ppm_mi_nonclassical_opt(0.01, 0.0).is_err());
    }

    #[test]
    fn nonclassical_continuous_at_threshold() {
        for nbar in [1e-4, 1e-3, 0.01, 0.05, 0.1] {
            let eta = fock_one_threshold(nbar);
            let fock = ppm_mi_fock_one(nbar, eta).unwrap();
            let (mixed, mu) = ppm_mi_mixed(nbar, eta).unwrap();
            assert!(rel(mixed, fock) < 1e-3, "nbar = {nbar}");
            assert!((mu - 1.0).abs() < 1e-9);
            assert_eq!(
                ppm_mi_nonclassical_opt(nbar, eta).unwrap().branch,
                NonclassicalBranch::FockOne
            );
        }
    }

    #[test]
    fn classical_hierarchy_small_signal() {
        for nbar in [1e-6, 1e-5, 1e-4, 1e-3, 1e-2] {
            let mu = mu_opt_classical(&AnalyticPoint::new(nbar, 1.0, 1.0).unwrap()).unwrap().value;
            assert!(nbar < mu && mu < 1.0);
        }
    }

    proptest! {
        #[test]
        fn classical_optimum_is_stationary(
            log_nbar in -5.0f64..-1.0,
            eta in 0.05f64..=1.0,
            g2 in 1.0f64..3.0,
        ) {
            let p = AnalyticPoint::new(10f64.powf(log_nbar), eta, g2).unwrap();
            let mu = mu_opt_classical(&p).unwrap().value;
            let h = 1e-4 * mu;
            let f = |m: f64| ppm_mi_approx(&p, m).unwrap().value;
            let slope = (f(mu + h) - f(mu - h)) / (2.0 * h);
            let curvature = (f(mu + h) - 2.0 * f(mu) + f(mu - h)) / (h * h);
            prop_assert!(curvature < 0.0);
            prop_assert!(slope.abs() <= 1e-6 * curvature.abs() * mu);
        }

        #[test]
        fn nonclassical_beats_classical(log_nbar in -4.0f64..-1.0, eta in 0.01f64..=1.0) {
            let nbar = 10f64.powf(log_nbar);
            let nc = ppm_mi_nonclassical_opt(nbar, eta).unwrap().value;
            let cl = ppm_mi_classical_opt(&AnalyticPoint::new(nbar, eta, 1.0).unwrap()).unwrap().value;
            prop_assert!(nc >= cl * (1.0 - 1e-12));
        }

        #[test]
        fn lambert_residual(log_offset in -9.0f64..12.0) {
            let x = BRANCH_POINT + 10f64.powf(log_offset);
            let w = lambert_w0(x).unwrap();
            prop_assert!((w * w.exp() - x).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }
}
