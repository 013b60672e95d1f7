//! Photon-number statistics of the non-zero pulse and its no-click
//! probability after a lossy channel.

use crate::error::{check_probability, check_range, Error, Result};
use crate::Estimate;

/// Tolerance on the total probability of an explicit distribution.
pub const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum SourceKind {
    /// Coherent-state (Poissonian) pulse.
    Poisson { mean: f64 },
    /// Mixture of the `floor(mean)` and `floor(mean) + 1` photon Fock states
    /// with the minimum variance compatible with `mean`.
    FockMixture { mean: f64 },
    /// `probabilities[n]` is the probability of `n` photons; photon numbers
    /// past the end of the list have probability zero.
    Explicit { probabilities: Vec<f64> },
}

/// Photon-number distribution of a single-mode pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonSource {
    kind: SourceKind,
}

impl PhotonSource {
    pub fn poisson(mean: f64) -> Result<Self> {
        check_range("mean", mean, 0.0, f64::MAX, "[0, inf)")?;
        Ok(PhotonSource {
            kind: SourceKind::Poisson { mean },
        })
    }

    pub fn fock_mixture(mean: f64) -> Result<Self> {
        check_range("mean", mean, 0.0, f64::MAX, "[0, inf)")?;
        Ok(PhotonSource {
            kind: SourceKind::FockMixture { mean },
        })
    }

    pub fn explicit(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(Error::InvalidDistribution("empty distribution".into()));
        }
        if let Some((n, p)) = probabilities
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.is_finite() && **p >= 0.0))
        {
            return Err(Error::InvalidDistribution(format!(
                "probability of {n} photons is {p}"
            )));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(PhotonSource {
            kind: SourceKind::Explicit { probabilities },
        })
    }

    pub fn kind(&self) -> &SourceKind {
        &self.kind
    }

    /// Mean photon number `<n>`.
    pub fn mean(&self) -> f64 {
        match &self.kind {
            SourceKind::Poisson { mean } | SourceKind::FockMixture { mean } => *mean,
            SourceKind::Explicit { probabilities } => probabilities
                .iter()
                .enumerate()
                .map(|(n, p)| n as f64 * p)
                .sum(),
        }
    }

    /// Normally ordered second moment `<n(n-1)>`.
    pub fn factorial_moment2(&self) -> f64 {
        match &self.kind {
            SourceKind::Poisson { mean } => mean * mean,
            SourceKind::FockMixture { mean } => {
                let (k, frac) = split_mean(*mean);
                k * (k - 1.0) + 2.0 * frac * k
            }
            SourceKind::Explicit { probabilities } => probabilities
                .iter()
                .enumerate()
                .map(|(n, p)| {
                    let n = n as f64;
                    n * (n - 1.0) * p
                })
                .sum(),
        }
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.factorial_moment2() + mean - mean * mean
    }

    /// Normalized second-order intensity correlation at zero delay,
    /// `<n(n-1)> / <n>^2`.
    pub fn g2(&self) -> Result<f64> {
        let mean = self.mean();
        if mean <= 0.0 {
            return Err(Error::G2UndefinedForVacuum);
        }
        Ok(self.factorial_moment2() / (mean * mean))
    }

    /// Probability of exactly `n` photons.
    pub fn probability(&self, n: usize) -> f64 {
        match &self.kind {
            SourceKind::Poisson { mean } => {
                (1..=n).fold((-mean).exp(), |p, j| p * mean / j as f64)
            }
            SourceKind::FockMixture { mean } => {
                let (k, frac) = split_mean(*mean);
                let n = n as f64;
                if n == k {
                    1.0 - frac
                } else if n == k + 1.0 {
                    frac
                } else {
                    0.0
                }
            }
            SourceKind::Explicit { probabilities } => {
                probabilities.get(n).copied().unwrap_or(0.0)
            }
        }
    }

    /// Exact probability that the pulse produces no click after a channel
    /// of transmission `eta`, `sum_n p_n (1 - eta)^n`.
    pub fn no_count(&self, eta: f64) -> Result<f64> {
        check_probability("eta", eta)?;
        let survive_none = 1.0 - eta;
        Ok(match &self.kind {
            SourceKind::Poisson { mean } => (-eta * mean).exp(),
            SourceKind::FockMixture { mean } => {
                let (k, frac) = split_mean(*mean);
                (1.0 - eta * frac) * pow_count(survive_none, k)
            }
            SourceKind::Explicit { probabilities } => probabilities
                .iter()
                .rev()
                .fold(0.0, |acc, p| acc * survive_none + p),
        })
    }
}

/// Integer part and fractional part of a non-negative mean.
fn split_mean(mean: f64) -> (f64, f64) {
    let k = mean.floor();
    (k, mean - k)
}

fn pow_count(base: f64, k: f64) -> f64 {
    if k <= i32::MAX as f64 {
        base.powi(k as i32)
    } else {
        base.powf(k)
    }
}

/// Transmission and dark-count parameters of the channel and detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub eta: f64,
    pub dark_prob: f64,
}

impl ChannelParams {
    pub fn new(eta: f64, dark_prob: f64) -> Result<Self> {
        check_probability("eta", eta)?;
        if !(0.0..1.0).contains(&dark_prob) {
            return Err(Error::Domain {
                name: "dark_prob",
                value: dark_prob,
                domain: "[0, 1)",
            });
        }
        Ok(ChannelParams { eta, dark_prob })
    }

    /// Lossy channel with a dark-count-free detector.
    pub fn lossy(eta: f64) -> Result<Self> {
        Self::new(eta, 0.0)
    }
}

/// No-click probability expanded to second order in `eta * n`:
/// `1 - eta mu + g2 (eta mu)^2 / 2`.
///
/// The result is clamped to `[0, 1]`; `valid` is false when clamping was
/// needed.
pub fn no_count_approx(mu: f64, g2: f64, eta: f64) -> Result<Estimate> {
    check_range("mu", mu, 0.0, f64::MAX, "[0, inf)")?;
    check_range("g2", g2, 0.0, f64::MAX, "[0, inf)")?;
    check_probability("eta", eta)?;
    let x = eta * mu;
    let raw = 1.0 - x + 0.5 * g2 * x * x;
    let clamped = raw.clamp(0.0, 1.0);
    Ok(Estimate::new(clamped, clamped == raw))
}

/// Largest mean photon number compatible with a non-negative variance at
/// the given `g2`. `None` means unbounded (classical light).
pub fn max_mean_for_g2(g2: f64) -> Option<f64> {
    if g2 < 1.0 {
        Some(1.0 / (1.0 - g2))
    } else {
        None
    }
}

/// Smallest photon-number variance any state with mean `mu` can have,
/// attained by the adjacent Fock-state mixture.
pub fn min_variance(mu: f64) -> f64 {
    let (_, frac) = split_mean(mu);
    frac * (1.0 - frac)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn means() {
        assert_eq!(PhotonSource::poisson(0.3).unwrap().mean(), 0.3);
        assert_eq!(PhotonSource::fock_mixture(1.5).unwrap().mean(), 1.5);
        let explicit = PhotonSource::explicit(vec![0.5, 0.0, 0.5]).unwrap();
        assert_eq!(explicit.mean(), 1.0);
    }

    #[test]
    fn g2_values() {
        for mu in [0.01, 0.5, 3.0] {
            let g2 = PhotonSource::poisson(mu).unwrap().g2().unwrap();
            assert!(close(g2, 1.0, 1e-15));
        }
        assert_eq!(PhotonSource::fock_mixture(2.0).unwrap().g2().unwrap(), 0.5);
        let g2 = PhotonSource::fock_mixture(1.5).unwrap().g2().unwrap();
        assert!(close(g2, 4.0 / 9.0, 1e-15));
    }

    #[test]
    fn g2_vacuum_is_error() {
        for source in [
            PhotonSource::poisson(0.0).unwrap(),
            PhotonSource::fock_mixture(0.0).unwrap(),
            PhotonSource::explicit(vec![1.0]).unwrap(),
        ] {
            assert!(matches!(source.g2(), Err(Error::G2UndefinedForVacuum)));
        }
    }

    #[test]
    fn explicit_validation() {
        assert!(PhotonSource::explicit(vec![]).is_err());
        assert!(PhotonSource::explicit(vec![0.5, 0.6]).is_err());
        assert!(PhotonSource::explicit(vec![1.1, -0.1]).is_err());
        assert!(PhotonSource::explicit(vec![0.5, f64::NAN]).is_err());
        assert!(PhotonSource::explicit(vec![0.5, 0.5 + 5e-13]).is_ok());
        assert!(PhotonSource::poisson(-1.0).is_err());
        assert!(PhotonSource::fock_mixture(f64::NAN).is_err());
    }

    #[test]
    fn no_count_examples() {
        let p = PhotonSource::poisson(0.7).unwrap();
        assert_eq!(p.no_count(0.0).unwrap(), 1.0);
        assert_eq!(PhotonSource::fock_mixture(1.0).unwrap().no_count(1.0).unwrap(), 0.0);
        assert_eq!(PhotonSource::fock_mixture(1.5).unwrap().no_count(0.5).unwrap(), 0.375);
        assert!(p.no_count(1.5).is_err());
        assert!(p.no_count(-0.1).is_err());
    }

    #[test]
    fn no_count_approx_examples() {
        assert_eq!(no_count_approx(0.0, 1.0, 0.5).unwrap().value, 1.0);
        let e = no_count_approx(0.1, 1.0, 1.0).unwrap();
        assert!(close(e.value, 0.905, 1e-15) && e.valid);
        let e = no_count_approx(1.0, 0.0, 1.0).unwrap();
        assert_eq!(e.value, 0.0);
        assert!(e.valid);
        // 1 - 3 + 0 is clamped.
        let e = no_count_approx(3.0, 0.0, 1.0).unwrap();
        assert_eq!(e.value, 0.0);
        assert!(!e.valid);
        assert!(no_count_approx(-1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn variance_bounds() {
        assert_eq!(max_mean_for_g2(0.0), Some(1.0));
        assert_eq!(max_mean_for_g2(0.5), Some(2.0));
        assert_eq!(max_mean_for_g2(1.0), None);
        assert_eq!(max_mean_for_g2(2.5), None);
        assert_eq!(min_variance(2.0), 0.0);
        assert_eq!(min_variance(1.5), 0.25);
        assert_eq!(min_variance(0.25), 0.1875);
    }

    #[test]
    fn fock_integer_saturates_variance_bound() {
        for m in 1..=20 {
            let source = PhotonSource::fock_mixture(m as f64).unwrap();
            let g2 = source.g2().unwrap();
            assert!(close(g2, 1.0 - 1.0 / m as f64, 1e-15));
            assert!(close(max_mean_for_g2(g2).unwrap(), m as f64, 1e-12));
        }
    }

    #[test]
    fn poisson_probabilities_sum_to_one() {
        let source = PhotonSource::poisson(2.5).unwrap();
        let total: f64 = (0..60).map(|n| source.probability(n)).sum();
        assert!(close(total, 1.0, 1e-14));
    }

    fn as_explicit(source: &PhotonSource, max_n: usize) -> PhotonSource {
        PhotonSource::explicit((0..=max_n).map(|n| source.probability(n)).collect()).unwrap()
    }

    proptest! {
        #[test]
        fn no_count_bounded_and_monotone(mu in 0.0f64..12.0, e1 in 0.0f64..=1.0, e2 in 0.0f64..=1.0) {
            let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
            for source in [PhotonSource::poisson(mu).unwrap(), PhotonSource::fock_mixture(mu).unwrap()] {
                let a = source.no_count(lo).unwrap();
                let b = source.no_count(hi).unwrap();
                prop_assert!((0.0..=1.0).contains(&a));
                prop_assert!((0.0..=1.0).contains(&b));
                prop_assert!(b <= a);
            }
        }

        #[test]
        fn fock_closed_form_matches_sum(mu in 0.0f64..30.0, eta in 0.0f64..=1.0) {
            let fock = PhotonSource::fock_mixture(mu).unwrap();
            let explicit = as_explicit(&fock, mu.floor() as usize + 1);
            prop_assert!((fock.no_count(eta).unwrap() - explicit.no_count(eta).unwrap()).abs() <= 1e-12);
            prop_assert!((fock.mean() - explicit.mean()).abs() <= 1e-12);
        }

        #[test]
        fn fock_mixture_has_minimum_variance(mu in 0.0f64..30.0) {
            let fock = PhotonSource::fock_mixture(mu).unwrap();
            prop_assert!((fock.variance() - min_variance(mu)).abs() <= 1e-9 * (1.0 + mu * mu));
        }

        #[test]
        fn poisson_second_order_remainder(mu in 0.0f64..1.0, eta in 0.0f64..=1.0) {
            let exact = PhotonSource::poisson(mu).unwrap().no_count(eta).unwrap();
            let approx = no_count_approx(mu, 1.0, eta).unwrap().value;
            let x = eta * mu;
            prop_assert!((approx - exact).abs() <= x.powi(3) / 6.0 + 1e-15);
        }
    }
}
