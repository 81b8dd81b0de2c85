//! Standard normal tail `Q(x) = P(N(0,1) > x)` and its inverse.

use crate::error::{ensure_probability, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Upper tail of the standard normal, via the complementary error function.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// `x` such that `Q(x) = p`, for `0 < p < 1`.
///
/// Bisection narrows a bracket on `[-40, 40]`, then safeguarded Newton steps
/// on `Q(x) - p` (derivative `-φ(x)`) polish the root.
pub fn q_inverse(p: f64) -> Result<f64> {
    ensure_probability("tail probability", p)?;
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    // Q is decreasing: Q(lo) > p > Q(hi).
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if q_function(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..100 {
        let f = q_function(x) - p;
        if f > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let dens = normal_pdf(x);
        let mut next = x + f / dens;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        let done = (next - x).abs() <= 1e-15 * x.abs().max(1.0);
        x = next;
        if done {
            break;
        }
    }
    Ok(x)
}
