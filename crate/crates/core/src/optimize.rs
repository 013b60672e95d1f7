//! Numerical maximization of the exact mutual information over the pulse
//! mean photon number `mu`, at fixed average photon number `nbar = p mu`.

use std::fmt;
use std::str::FromStr;

use crate::analytic::{self, AnalyticPoint};
use crate::error::{Error, Result};
use crate::info_theory::{ook_click_probs, ook_mutual_info, ppm_rate, RateResult, Scheme};
use crate::photon_stats::{ChannelParams, PhotonSource};

/// Relative tolerance on the optimal `mu`.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Log-spaced samples taken before golden-section refinement.
pub const PRESCAN_POINTS: usize = 128;

/// Linear samples per unit `mu` for Fock mixtures, whose rate has kinks at
/// integer `mu`.
pub const FOCK_POINTS_PER_UNIT: usize = 8;

/// Relative shortfall of the refined maximum below the best grid sample that
/// is tolerated before the objective is declared non-unimodal.
const UNIMODAL_SLACK: f64 = 1e-6;

const INV_GOLDEN: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceFamily {
    Poisson,
    FockMixture,
}

impl SourceFamily {
    pub fn source(&self, mu: f64) -> Result<PhotonSource> {
        match self {
            SourceFamily::Poisson => PhotonSource::poisson(mu),
            SourceFamily::FockMixture => PhotonSource::fock_mixture(mu),
        }
    }
}

impl fmt::Display for SourceFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceFamily::Poisson => f.write_str("poisson"),
            SourceFamily::FockMixture => f.write_str("fock"),
        }
    }
}

impl FromStr for SourceFamily {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "poisson" => Ok(SourceFamily::Poisson),
            "fock" | "fock-mixture" => Ok(SourceFamily::FockMixture),
            other => Err(format!("unknown source family '{other}'")),
        }
    }
}

/// Options for [`maximize_scalar_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    /// Samples spread over `[lo, hi]`, log-spaced when `lo > 0`.
    pub points: usize,
    /// Extra samples at every `1/n` of a unit on the integer lattice.
    pub per_unit: Option<usize>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            points: PRESCAN_POINTS,
            per_unit: None,
        }
    }
}

/// Maximizes `f` on `[lo, hi]` with the default pre-scan.
///
/// Returns `(x_opt, f_opt)`. See [`maximize_scalar_with`].
pub fn maximize_scalar<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    maximize_scalar_with(f, lo, hi, tol, ScanOptions::default())
}

/// Grid pre-scan followed by golden-section refinement on the cell pair
/// around the best sample.
///
/// The refinement stops once the bracket is narrower than `tol` relative to
/// its midpoint. The result is the better of the refined point and the best
/// grid sample, preferring the smaller abscissa on ties. A refined value
/// noticeably below the best sample means `f` was not unimodal on the
/// bracket and is reported as [`Error::Unimodality`].
pub fn maximize_scalar_with<F>(
    f: F,
    lo: f64,
    hi: f64,
    tol: f64,
    options: ScanOptions,
) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Domain {
            name: "hi",
            value: hi,
            domain: "finite bracket with lo < hi",
        });
    }
    if !(tol > 0.0) {
        return Err(Error::Domain {
            name: "tol",
            value: tol,
            domain: "(0, inf)",
        });
    }
    let eval = |x: f64| -> Result<f64> {
        let value = f(x);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::NonFinite { x, value })
        }
    };

    let grid = prescan_grid(lo, hi, options);
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, &x) in grid.iter().enumerate() {
        let value = eval(x)?;
        if value > best_value {
            best = i;
            best_value = value;
        }
    }
    let grid_x = grid[best];

    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(grid.len() - 1)];
    let mut c = b - INV_GOLDEN * (b - a);
    let mut d = a + INV_GOLDEN * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    while (b - a) > tol * (0.5 * (a + b)).abs().max(f64::MIN_POSITIVE) {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_GOLDEN * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_GOLDEN * (b - a);
            fd = eval(d)?;
        }
        if c >= d {
            break;
        }
    }
    let (refined_x, refined_value) = if fc >= fd { (c, fc) } else { (d, fd) };

    if refined_value < best_value - UNIMODAL_SLACK * best_value.abs() {
        return Err(Error::Unimodality {
            grid_x,
            grid_value: best_value,
            refined_x,
            refined_value,
        });
    }

    let grid_wins = best_value > refined_value || (best_value == refined_value && grid_x < refined_x);
    Ok(if grid_wins {
        (grid_x, best_value)
    } else {
        (refined_x, refined_value)
    })
}

fn prescan_grid(lo: f64, hi: f64, options: ScanOptions) -> Vec<f64> {
    let n = options.points.max(2);
    let mut grid: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            if lo > 0.0 {
                lo * (hi / lo).powf(t)
            } else {
                lo + (hi - lo) * t
            }
        })
        .collect();
    grid[0] = lo;
    grid[n - 1] = hi;
    if let Some(per_unit) = options.per_unit.filter(|&k| k > 0) {
        let step = 1.0 / per_unit as f64;
        let first = (lo * per_unit as f64).ceil() as i64;
        let last = (hi * per_unit as f64).floor() as i64;
        grid.extend((first..=last).map(|j| j as f64 * step));
    }
    grid.retain(|x| *x >= lo && *x <= hi);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// One scheme/source pairing to optimize at fixed `nbar` and channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeProblem {
    pub scheme: Scheme,
    pub family: SourceFamily,
    pub nbar: f64,
    pub channel: ChannelParams,
    mu_bounds: (f64, f64),
    pub tol: f64,
}

impl OptimizeProblem {
    /// Problem with the default search interval
    /// `[max(2 nbar, 1e-6), max(50, 100 mu_clas)]`, where `mu_clas` is the
    /// closed-form Poissonian optimum.
    pub fn new(
        scheme: Scheme,
        family: SourceFamily,
        nbar: f64,
        channel: ChannelParams,
    ) -> Result<Self> {
        if !(nbar > 0.0 && nbar < 0.5) {
            return Err(Error::Domain {
                name: "nbar",
                value: nbar,
                domain: "(0, 1/2)",
            });
        }
        let lo = (2.0 * nbar).max(1e-6);
        let hi = if channel.eta > 0.0 {
            let point = AnalyticPoint::new(nbar, channel.eta, 1.0)?;
            let mu_clas = analytic::mu_opt_classical(&point)?.value;
            (100.0 * mu_clas).max(50.0)
        } else {
            50.0
        };
        Ok(OptimizeProblem {
            scheme,
            family,
            nbar,
            channel,
            mu_bounds: (lo, hi),
            tol: DEFAULT_TOL,
        })
    }

    pub fn with_bounds(mut self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo > self.nbar && lo < hi && hi.is_finite()) {
            return Err(Error::Domain {
                name: "mu_bounds",
                value: lo,
                domain: "nbar < lo < hi < inf",
            });
        }
        self.mu_bounds = (lo, hi);
        Ok(self)
    }

    pub fn with_tol(mut self, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::Domain {
                name: "tol",
                value: tol,
                domain: "(0, inf)",
            });
        }
        self.tol = tol;
        Ok(self)
    }

    pub fn mu_bounds(&self) -> (f64, f64) {
        self.mu_bounds
    }

    /// Exact mutual information per bin at pulse mean `mu`.
    pub fn rate_at(&self, mu: f64) -> Result<f64> {
        let (lo, hi) = self.mu_bounds;
        if !(mu >= lo && mu <= hi) {
            return Err(Error::Domain {
                name: "mu",
                value: mu,
                domain: "[mu_lo, mu_hi]",
            });
        }
        let epsilon = self.family.source(mu)?.no_count(self.channel.eta)?;
        let p = self.nbar / mu;
        match self.scheme {
            Scheme::Ppm => ppm_rate(p, epsilon),
            Scheme::Ook => {
                let (q1, q0) = ook_click_probs(epsilon, self.channel.dark_prob)?;
                ook_mutual_info(p, q1, q0)
            }
        }
    }

    fn scan_options(&self) -> ScanOptions {
        ScanOptions {
            points: PRESCAN_POINTS,
            per_unit: match self.family {
                SourceFamily::Poisson => None,
                SourceFamily::FockMixture => Some(FOCK_POINTS_PER_UNIT),
            },
        }
    }
}

pub fn optimize_rate(problem: &OptimizeProblem) -> Result<RateResult> {
    let eta_nbar = problem.channel.eta * problem.nbar;
    if eta_nbar <= 0.0 {
        return Err(Error::Domain {
            name: "eta",
            value: problem.channel.eta,
            domain: "(0, 1] for a photon information efficiency",
        });
    }
    let (lo, hi) = problem.mu_bounds;
    let (opt_mu, mi_per_bin) = maximize_scalar_with(
        |mu| problem.rate_at(mu).unwrap_or(f64::NAN),
        lo,
        hi,
        problem.tol,
        problem.scan_options(),
    )?;
    Ok(RateResult {
        mi_per_bin,
        pie: mi_per_bin / eta_nbar,
        opt_mu,
        opt_inv_p: opt_mu / problem.nbar,
    })
}

/// Gain of the Fock-mixture family over Poissonian pulses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Enhancement {
    /// Optimized Fock-mixture rate over optimized Poissonian rate.
    pub ratio: f64,
    /// Optimal `mu` of the Fock-mixture family.
    pub fock_mu_opt: f64,
}

impl Enhancement {
    /// Whether single-photon pulses are optimal for the Fock family.
    pub fn single_photon_optimal(&self) -> bool {
        (self.fock_mu_opt - 1.0).abs() <= 1e-6
    }
}

/// Ratio of the optimized Fock-mixture rate to the optimized Poissonian rate
/// for a dark-count-free detector.
pub fn enhancement_ratio(scheme: Scheme, nbar: f64, eta: f64) -> Result<Enhancement> {
    let channel = ChannelParams::lossy(eta)?;
    let fock = optimize_rate(&OptimizeProblem::new(scheme, SourceFamily::FockMixture, nbar, channel)?)?;
    let poisson = optimize_rate(&OptimizeProblem::new(scheme, SourceFamily::Poisson, nbar, channel)?)?;
    if !(poisson.mi_per_bin > 0.0) {
        return Err(Error::DegenerateBaseline(poisson.mi_per_bin));
    }
    Ok(Enhancement {
        ratio: fock.mi_per_bin / poisson.mi_per_bin,
        fock_mu_opt: fock.opt_mu,
    })
}
