//! Special functions used by the count-distribution formulas.
//!
//! Everything here works on plain `f64` through `libm`, so it is usable
//! without the standard library.

use crate::error::{domain, Result};

const MAX_ITER: usize = 10_000;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;

/// Natural log of the gamma function for `a > 0`.
#[inline]
pub fn ln_gamma(a: f64) -> f64 {
    libm::lgamma(a)
}

/// `ln k!`
#[inline]
pub fn ln_factorial(k: u64) -> f64 {
    ln_gamma(k as f64 + 1.0)
}

/// Regularized lower incomplete gamma function
/// `γ(x, a) = (1/Γ(a)) ∫₀ˣ t^(a−1) e^(−t) dt`.
///
/// Note the argument order: the integration limit comes first and the shape
/// second, matching how the count formulas are written.
pub fn regularized_lower_incomplete_gamma(x: f64, a: f64) -> Result<f64> {
    Ok(libm::exp(ln_regularized_lower_incomplete_gamma(x, a)?))
}

/// Natural log of [`regularized_lower_incomplete_gamma`], accurate even when
/// the value itself underflows.
pub fn ln_regularized_lower_incomplete_gamma(x: f64, a: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(domain!("incomplete gamma shape must be positive and finite, got {a}"));
    }
    if !(x >= 0.0) || x.is_nan() {
        return Err(domain!("incomplete gamma argument must be non-negative, got {x}"));
    }
    if x == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    if x < a + 1.0 {
        Ok(ln_lower_series(x, a))
    } else {
        // P = 1 − Q with Q small here, so ln1p keeps full precision.
        let ln_q = ln_upper_continued_fraction(x, a);
        Ok(libm::log1p(-libm::exp(ln_q)))
    }
}

/// `ln P(a, x)` from the series `x^a e^(−x) / Γ(a+1) · Σ xⁿ / ((a+1)…(a+n))`.
fn ln_lower_series(x: f64, a: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut denom = a;
    for _ in 0..MAX_ITER {
        denom += 1.0;
        term *= x / denom;
        sum += term;
        if term < sum * EPS {
            break;
        }
    }
    a * libm::log(x) - x - ln_gamma(a + 1.0) + libm::log(sum)
}

/// `ln Q(a, x)` by the modified Lentz continued fraction.
fn ln_upper_continued_fraction(x: f64, a: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    a * libm::log(x) - x - ln_gamma(a) + libm::log(h)
}

/// `(e^w − 1) / w`, equal to 1 at `w = 0`.
pub(crate) fn expm1_over(w: f64) -> f64 {
    if w.abs() < 1e-5 {
        1.0 + w / 2.0 + w * w / 6.0
    } else {
        libm::expm1(w) / w
    }
}

/// `(e^(−z) − 1 + z) / z² = Σₙ (−z)ⁿ / (n+2)!`
pub(crate) fn decay_mean_kernel(z: f64) -> f64 {
    if z < 1.0 {
        alternating_tail_series(z, 2)
    } else {
        (libm::expm1(-z) + z) / (z * z)
    }
}

/// `Σₙ (−z)ⁿ / (n+3)! = (1 − 2·decay_mean_kernel(z)) / (2z)`
pub(crate) fn decay_second_moment_kernel(z: f64) -> f64 {
    if z < 1.0 {
        alternating_tail_series(z, 3)
    } else {
        (1.0 - 2.0 * decay_mean_kernel(z)) / (2.0 * z)
    }
}

/// `Σₙ (−z)ⁿ / (n+offset)!` for small non-negative `z`.
fn alternating_tail_series(z: f64, offset: u32) -> f64 {
    let mut term = 1.0;
    for j in 2..=offset {
        term /= j as f64;
    }
    let mut sum = term;
    for n in 1..64u32 {
        term *= -z / (n + offset) as f64;
        sum += term;
        if term.abs() < EPS * sum.abs() {
            break;
        }
    }
    sum
}
