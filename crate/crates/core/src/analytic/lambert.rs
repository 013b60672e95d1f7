//! Principal branch of the Lambert W function on the real axis.

use std::f64::consts::E;

use crate::error::{Error, Result};

/// `-1/e`, the branch point of `W`.
pub const BRANCH_POINT: f64 = -1.0 / E;

const MAX_ITER: usize = 64;

/// Beyond this argument `w e^w` is evaluated in log form to avoid overflow.
const LOG_FORM_ABOVE: f64 = 1e100;

/// Principal branch `W0(x)`, the solution `w >= -1` of `w e^w = x`.
///
/// Seeds come from the branch-point series, a log-based approximation for
/// moderate arguments, or the asymptotic expansion for large ones; Halley's
/// iteration then polishes the seed to rounding level.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() || x < BRANCH_POINT {
        return Err(Error::Domain {
            name: "x",
            value: x,
            domain: "[-1/e, inf)",
        });
    }
    if x == BRANCH_POINT {
        return Ok(-1.0);
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        return Ok(f64::INFINITY);
    }

    if x < -0.25 {
        let p = (2.0 * E.mul_add(x, 1.0)).max(0.0).sqrt();
        let series = branch_series(p);
        // The series alone is accurate to ~p^5 there; Halley's denominator
        // degenerates as w -> -1.
        if p < 1e-3 {
            return Ok(series);
        }
        return Ok(halley(x, series));
    }

    if x > LOG_FORM_ABOVE {
        return Ok(newton_log_form(x, asymptotic_seed(x)));
    }

    let seed = if x > E {
        asymptotic_seed(x)
    } else {
        let l = x.ln_1p();
        l * (1.0 - (l.ln_1p()) / (2.0 + l))
    };
    Ok(halley(x, seed))
}

/// `W0` about the branch point in powers of `p = sqrt(2 (e x + 1))`.
fn branch_series(p: f64) -> f64 {
    const C: [f64; 6] = [
        -1.0,
        1.0,
        -1.0 / 3.0,
        11.0 / 72.0,
        -43.0 / 540.0,
        769.0 / 17280.0,
    ];
    C.iter().rev().fold(0.0, |acc, c| acc * p + c)
}

fn asymptotic_seed(x: f64) -> f64 {
    let l1 = x.ln();
    let l2 = l1.ln();
    l1 - l2 + l2 / l1
}

fn halley(x: f64, mut w: f64) -> f64 {
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        if f == 0.0 {
            break;
        }
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let next = w - f / denom;
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * next.abs().max(1e-300);
        w = next;
        if done {
            break;
        }
    }
    w
}

/// Newton on `w + ln w - ln x = 0`, valid for large `x`.
fn newton_log_form(x: f64, mut w: f64) -> f64 {
    let lx = x.ln();
    for _ in 0..MAX_ITER {
        let next = w - (w + w.ln() - lx) / (1.0 + 1.0 / w);
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * next;
        w = next;
        if done {
            break;
        }
    }
    w
}
