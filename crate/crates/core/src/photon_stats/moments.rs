use super::FluorescenceParams;
use crate::error::Result;
use crate::special::{decay_mean_kernel, decay_second_moment_kernel};

/// Low-order moments of the decayed-dark count (noise excluded).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FactorialMoments {
    /// `M[k] = G'(1)`
    pub mean: f64,
    /// `M[k(k−1)] = G''(1)`
    pub second_factorial: f64,
    /// `G''(1) + G'(1) − G'(1)²`
    pub variance: f64,
}

/// Closed-form mean, second factorial moment and variance.
///
/// With `z = λt`:
/// `M[k] = λ_B t − (λ_B/λ)(1 − e^(−z))` and
/// `M[k(k−1)] = (λ_B t)² {1 − (2/z)[1 − (1 − e^(−z))/z]}`.
/// Both are evaluated through series kernels so the `λ → 0` limit does not
/// cancel catastrophically.
pub fn factorial_moments(params: &FluorescenceParams) -> Result<FactorialMoments> {
    params.validate()?;
    let z = params.decay_exposure();
    let bright_mean = params.bright_mean();
    let mean = bright_mean * z * decay_mean_kernel(z);
    let second_factorial = bright_mean * bright_mean * 2.0 * z * decay_second_moment_kernel(z);
    Ok(FactorialMoments {
        mean,
        second_factorial,
        variance: second_factorial + mean - mean * mean,
    })
}
