//! Shannon mutual information of the OOK and PPM channels, in bits.

use std::fmt;
use std::str::FromStr;

use crate::error::{check_probability, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// On-off keying: every bin independently carries a pulse with
    /// probability `p`.
    Ook,
    /// Pulse-position modulation: one pulse per frame of `1/p` bins.
    Ppm,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Ook => f.write_str("ook"),
            Scheme::Ppm => f.write_str("ppm"),
        }
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ook" => Ok(Scheme::Ook),
            "ppm" => Ok(Scheme::Ppm),
            other => Err(format!("unknown scheme '{other}'")),
        }
    }
}

/// A modulation scheme together with its pulse probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulationPoint {
    pub scheme: Scheme,
    pulse_prob: f64,
}

impl ModulationPoint {
    pub fn new(scheme: Scheme, pulse_prob: f64) -> Result<Self> {
        let upper = match scheme {
            Scheme::Ook => 1.0,
            Scheme::Ppm => 0.5,
        };
        let ok = match scheme {
            Scheme::Ook => pulse_prob > 0.0 && pulse_prob < upper,
            Scheme::Ppm => pulse_prob > 0.0 && pulse_prob <= upper,
        };
        if !ok {
            return Err(Error::Domain {
                name: "pulse_prob",
                value: pulse_prob,
                domain: match scheme {
                    Scheme::Ook => "(0, 1)",
                    Scheme::Ppm => "(0, 1/2]",
                },
            });
        }
        Ok(ModulationPoint { scheme, pulse_prob })
    }

    pub fn pulse_prob(&self) -> f64 {
        self.pulse_prob
    }

    /// Sequence length `1/p`, treated as a continuous quantity.
    pub fn frame_len(&self) -> f64 {
        1.0 / self.pulse_prob
    }

    /// Mutual information per bin when the pulse is missed with probability
    /// `epsilon` and empty bins click with probability `dark_prob`.
    ///
    /// PPM ignores `dark_prob`.
    pub fn mutual_info(&self, epsilon: f64, dark_prob: f64) -> Result<f64> {
        match self.scheme {
            Scheme::Ppm => ppm_rate(self.pulse_prob, epsilon),
            Scheme::Ook => {
                let (q1, q0) = ook_click_probs(epsilon, dark_prob)?;
                ook_mutual_info(self.pulse_prob, q1, q0)
            }
        }
    }
}

/// Optimized rate at a given average photon number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateResult {
    /// Mutual information, bits per bin.
    pub mi_per_bin: f64,
    /// Photon information efficiency, bits per detected photon.
    pub pie: f64,
    /// Optimal mean photon number of the non-zero pulse.
    pub opt_mu: f64,
    /// Optimal `1/p`.
    pub opt_inv_p: f64,
}

/// `x log2 x` with the convention `0 log 0 = 0`.
fn xlog2x(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

pub fn binary_entropy(q: f64) -> Result<f64> {
    check_probability("q", q)?;
    Ok(-xlog2x(q) - xlog2x(1.0 - q))
}

/// Mutual information of the binary asymmetric channel with input "pulse"
/// sent with probability `p`, where a pulse clicks with probability
/// `click_given_pulse` and an empty bin with probability `click_given_empty`.
pub fn ook_mutual_info(p: f64, click_given_pulse: f64, click_given_empty: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain {
            name: "p",
            value: p,
            domain: "(0, 1)",
        });
    }
    let q1 = check_probability("click_given_pulse", click_given_pulse)?;
    let q0 = check_probability("click_given_empty", click_given_empty)?;
    let q_mean = p * q1 + (1.0 - p) * q0;
    let mi = binary_entropy(q_mean)? - p * binary_entropy(q1)? - (1.0 - p) * binary_entropy(q0)?;
    // Concavity makes this non-negative; rounding can leave a tiny negative.
    Ok(mi.max(0.0))
}

/// Click probabilities `(pulse, empty)` for an independent dark-count process
/// on every bin: a pulse stays silent only if both the signal and the dark
/// process are silent.
pub fn ook_click_probs(epsilon: f64, dark_prob: f64) -> Result<(f64, f64)> {
    check_probability("epsilon", epsilon)?;
    check_probability("dark_prob", dark_prob)?;
    Ok((1.0 - epsilon * (1.0 - dark_prob), dark_prob))
}

/// Per-bin rate of a `1/p`-ary erasure channel with erasure probability
/// `epsilon`: `p (1 - epsilon) log2(1/p)`.
pub fn ppm_rate(p: f64, epsilon: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain {
            name: "p",
            value: p,
            domain: "(0, 1)",
        });
    }
    check_probability("epsilon", epsilon)?;
    Ok(-p * (1.0 - epsilon) * p.log2())
}

/// Bits per output photon at the capacity of a single-mode lossy bosonic
/// channel with mean output photon number `eta_nbar`.
pub fn capacity_pie(eta_nbar: f64) -> Result<f64> {
    if !(eta_nbar > 0.0 && eta_nbar.is_finite()) {
        return Err(Error::Domain {
            name: "eta_nbar",
            value: eta_nbar,
            domain: "(0, inf)",
        });
    }
    let x = eta_nbar;
    Ok(-x.log2() + (1.0 + 1.0 / x) * x.ln_1p() / std::f64::consts::LN_2)
}
