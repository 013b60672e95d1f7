//! Sampling oracle for the no-click probability.
//!
//! Each trial draws a photon number from the source, lets every photon
//! survive the channel independently with probability `eta`, and adds an
//! independent dark click. Streams come from ChaCha8 (`rand_chacha`).
//!
//! Trials are split into [`SHARDS`] fixed shards. Every shard uses the
//! generator seeded from `seed` with the ChaCha stream number set to the
//! shard index, so results do not depend on the thread count.
//! Changing the shard count changes the streams, and therefore the low-order
//! digits of an estimate, within statistical tolerance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::photon_stats::{ChannelParams, PhotonSource, SourceKind};

pub const DEFAULT_SEED: u64 = 0xC0FFEE;
pub const DEFAULT_TRIALS: u64 = 1_000_000;
pub const SHARDS: u64 = 16;

/// Maximum distance, in standard errors, between an estimate and the exact
/// value for a validation case to pass.
pub const SIGMA_LIMIT: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    pub source: PhotonSource,
    pub channel: ChannelParams,
}

impl McConfig {
    pub fn new(trials: u64, seed: u64, source: PhotonSource, channel: ChannelParams) -> Result<Self> {
        if trials == 0 {
            return Err(Error::Domain {
                name: "trials",
                value: 0.0,
                domain: "[1, inf)",
            });
        }
        Ok(McConfig {
            trials,
            seed,
            source,
            channel,
        })
    }
}

/// Draws a photon number. Poisson uses sequential inversion.
pub fn sample_photons<R: Rng + ?Sized>(source: &PhotonSource, rng: &mut R) -> u64 {
    match source.kind() {
        SourceKind::Poisson { mean } => {
            let u: f64 = rng.random();
            let mut n = 0u64;
            let mut pn = (-mean).exp();
            let mut cdf = pn;
            // The cdf can stall just below 1 in floating point.
            while u > cdf && pn > 0.0 {
                n += 1;
                pn *= mean / n as f64;
                cdf += pn;
            }
            n
        }
        SourceKind::FockMixture { mean } => {
            let k = mean.floor();
            let extra = rng.random_bool((mean - k).clamp(0.0, 1.0));
            k as u64 + u64::from(extra)
        }
        SourceKind::Explicit { probabilities } => {
            let u: f64 = rng.random();
            let mut cdf = 0.0;
            for (n, p) in probabilities.iter().enumerate() {
                cdf += p;
                if u < cdf {
                    return n as u64;
                }
            }
            // Rounding in the cdf; fall back to the last populated number.
            probabilities.iter().rposition(|p| *p > 0.0).unwrap_or(0) as u64
        }
    }
}

/// One detection window: `true` if any photon survived or a dark count fired.
pub fn sample_click<R: Rng + ?Sized>(source: &PhotonSource, channel: &ChannelParams, rng: &mut R) -> bool {
    trial(source, channel, rng).1
}

fn trial<R: Rng + ?Sized>(source: &PhotonSource, channel: &ChannelParams, rng: &mut R) -> (u64, bool) {
    let photons = sample_photons(source, rng);
    let survived = (0..photons).any(|_| rng.random_bool(channel.eta));
    let dark = channel.dark_prob > 0.0 && rng.random_bool(channel.dark_prob);
    (photons, survived || dark)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    /// Fraction of trials without a click.
    pub eps_hat: f64,
    /// Binomial standard error `sqrt(eps_hat (1 - eps_hat) / trials)`.
    pub std_err: f64,
    /// Sample mean of the drawn photon numbers.
    pub mean_photons: f64,
    pub trials: u64,
}

#[derive(Default)]
struct Tally {
    no_clicks: u64,
    photons: u64,
}

fn run_shard(config: &McConfig, shard: u64, trials: u64) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(shard);
    let mut tally = Tally::default();
    for _ in 0..trials {
        let (photons, clicked) = trial(&config.source, &config.channel, &mut rng);
        tally.photons += photons;
        if !clicked {
            tally.no_clicks += 1;
        }
    }
    tally
}

pub fn estimate_no_count(config: &McConfig) -> McEstimate {
    let shards = SHARDS.min(config.trials);
    let base = config.trials / shards;
    let remainder = config.trials % shards;
    let total = (0..shards)
        .into_par_iter()
        .map(|s| run_shard(config, s, base + u64::from(s < remainder)))
        .reduce(Tally::default, |a, b| Tally {
            no_clicks: a.no_clicks + b.no_clicks,
            photons: a.photons + b.photons,
        });
    let n = config.trials as f64;
    let eps_hat = total.no_clicks as f64 / n;
    McEstimate {
        eps_hat,
        std_err: (eps_hat * (1.0 - eps_hat) / n).sqrt(),
        mean_photons: total.photons as f64 / n,
        trials: config.trials,
    }
}

/// Exact no-click probability including dark counts,
/// `eps (1 - dark_prob)`.
pub fn no_click_exact(source: &PhotonSource, channel: &ChannelParams) -> Result<f64> {
    Ok(source.no_count(channel.eta)? * (1.0 - channel.dark_prob))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationCase {
    pub name: String,
    pub source: PhotonSource,
    pub channel: ChannelParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationOutcome {
    pub name: String,
    pub eps_hat: f64,
    pub eps: f64,
    pub std_err: f64,
    /// `|eps_hat - eps| / std_err`; zero when both the deviation and the
    /// standard error vanish.
    pub sigma: f64,
    pub pass: bool,
}

const SUITE_DARK_PROB: f64 = 0.05;

/// Twelve cases: Poisson(1) and FockMixture(1.5) pulses, three transmissions,
/// with and without dark counts.
pub fn default_suite() -> Vec<ValidationCase> {
    suite_for_etas(&[0.25, 0.5, 1.0])
}

/// Suite restricted to the given transmissions.
pub fn suite_for_etas(etas: &[f64]) -> Vec<ValidationCase> {
    let sources = [
        ("poisson(1)", PhotonSource::poisson(1.0).expect("valid mean")),
        ("fock(1.5)", PhotonSource::fock_mixture(1.5).expect("valid mean")),
    ];
    let mut cases = Vec::new();
    for (label, source) in &sources {
        for &eta in etas {
            for dark in [0.0, SUITE_DARK_PROB] {
                cases.push(ValidationCase {
                    name: format!("{label} eta={eta} dark={dark}"),
                    source: source.clone(),
                    channel: ChannelParams { eta, dark_prob: dark },
                });
            }
        }
    }
    cases
}

pub fn run_case(case: &ValidationCase, trials: u64, seed: u64) -> Result<ValidationOutcome> {
    let config = McConfig::new(trials, seed, case.source.clone(), ChannelParams::new(case.channel.eta, case.channel.dark_prob)?)?;
    let estimate = estimate_no_count(&config);
    let eps = no_click_exact(&case.source, &case.channel)?;
    let deviation = (estimate.eps_hat - eps).abs();
    let sigma = if deviation == 0.0 {
        0.0
    } else {
        deviation / estimate.std_err
    };
    Ok(ValidationOutcome {
        name: case.name.clone(),
        eps_hat: estimate.eps_hat,
        eps,
        std_err: estimate.std_err,
        sigma,
        pass: deviation <= SIGMA_LIMIT * estimate.std_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(source: PhotonSource, eta: f64, dark: f64, trials: u64, seed: u64) -> McConfig {
        McConfig::new(trials, seed, source, ChannelParams::new(eta, dark).unwrap()).unwrap()
    }

    #[test]
    fn certain_and_impossible_clicks() {
        let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
        let one = PhotonSource::fock_mixture(1.0).unwrap();
        let perfect = ChannelParams::lossy(1.0).unwrap();
        assert!((0..1000).all(|_| sample_click(&one, &perfect, &mut rng)));
        let opaque = ChannelParams::lossy(0.0).unwrap();
        let bright = PhotonSource::poisson(5.0).unwrap();
        assert!((0..1000).all(|_| !sample_click(&bright, &opaque, &mut rng)));
    }

    #[test]
    fn poisson_click_rate() {
        let est = estimate_no_count(&config(PhotonSource::poisson(2.0).unwrap(), 0.5, 0.0, 200_000, 7));
        let click = 1.0 - est.eps_hat;
        assert!((click - (1.0 - (-1.0f64).exp())).abs() <= 4.0 * est.std_err);
    }

    #[test]
    fn agreement_examples() {
        let est = estimate_no_count(&config(PhotonSource::poisson(0.4218).unwrap(), 1.0, 0.0, DEFAULT_TRIALS, DEFAULT_SEED));
        assert!((est.eps_hat - (-0.4218f64).exp()).abs() <= 4.0 * est.std_err);
        assert!((est.mean_photons - 0.4218).abs() <= 4.0 * (0.4218 / DEFAULT_TRIALS as f64).sqrt());

        let est = estimate_no_count(&config(PhotonSource::fock_mixture(1.5).unwrap(), 0.5, 0.0, DEFAULT_TRIALS, DEFAULT_SEED));
        assert!((est.eps_hat - 0.375).abs() <= 4.0 * est.std_err);
    }

    #[test]
    fn single_trial() {
        let est = estimate_no_count(&config(PhotonSource::poisson(1.0).unwrap(), 0.5, 0.0, 1, 3));
        assert!(est.eps_hat == 0.0 || est.eps_hat == 1.0);
        assert_eq!(est.std_err, 0.0);
        assert!(McConfig::new(0, 1, PhotonSource::poisson(1.0).unwrap(), ChannelParams::lossy(1.0).unwrap()).is_err());
    }

    #[test]
    fn reproducible_per_seed() {
        let c = config(PhotonSource::poisson(1.0).unwrap(), 0.5, 0.05, 100_003, 11);
        assert_eq!(estimate_no_count(&c), estimate_no_count(&c));
        let other = config(PhotonSource::poisson(1.0).unwrap(), 0.5, 0.05, 100_003, 12);
        assert_ne!(estimate_no_count(&c).eps_hat, estimate_no_count(&other).eps_hat);
    }

    #[test]
    fn explicit_sampling() {
        let source = PhotonSource::explicit(vec![0.5, 0.0, 0.5]).unwrap();
        let c = config(source.clone(), 0.5, 0.0, 200_000, 5);
        let est = estimate_no_count(&c);
        let exact = source.no_count(0.5).unwrap();
        assert!((est.eps_hat - exact).abs() <= 4.0 * est.std_err);
        assert!((est.mean_photons - 1.0).abs() < 0.01);
    }

    #[test]
    fn opaque_channel_case_is_exact() {
        for case in suite_for_etas(&[0.0]).iter().filter(|c| c.channel.dark_prob == 0.0) {
            let outcome = run_case(case, 10_000, DEFAULT_SEED).unwrap();
            assert_eq!(outcome.eps_hat, 1.0);
            assert!(outcome.pass);
        }
    }

    #[test]
    fn suite_shape() {
        let suite = default_suite();
        assert_eq!(suite.len(), 12);
        assert!(suite.iter().any(|c| c.channel.dark_prob > 0.0));
    }
}
