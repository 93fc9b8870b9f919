use alloc::vec::Vec;

use super::{CountDistribution, FluorescenceParams, Truncation};
use crate::error::{domain, Result};
use crate::special::{ln_factorial, ln_gamma, ln_regularized_lower_incomplete_gamma};

/// Below this value of `|λ_B − λ|·t` the decayed-dark pmf is summed as a power
/// series instead of through the incomplete gamma function, whose closed form
/// divides by `((λ_B − λ)t)^(k+1)`.
pub const DEGENERATE_GAP: f64 = 1e-6;

/// Whether the bright-state count includes detector noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BrightChannel {
    /// Poisson with mean `λ_B·t` only.
    #[default]
    FluorescenceOnly,
    /// Poisson with mean `(λ_B + λ_D)·t`.
    WithBackground,
}

/// Poisson probability `meanᵏ e^(−mean) / k!`, evaluated in the log domain.
pub fn poisson_pmf(k: u64, mean: f64) -> Result<f64> {
    if !(mean >= 0.0) || !mean.is_finite() {
        return Err(domain!("Poisson mean must be finite and non-negative, got {mean}"));
    }
    Ok(poisson_unchecked(k, mean))
}

fn poisson_unchecked(k: u64, mean: f64) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    libm::exp(k as f64 * libm::log(mean) - mean - ln_factorial(k))
}

/// Count distribution of a bright ion over one detection window.
pub fn bright_distribution(
    params: &FluorescenceParams,
    channel: BrightChannel,
    truncation: &Truncation,
) -> Result<CountDistribution> {
    params.validate()?;
    truncation.validate()?;
    let mean = match channel {
        BrightChannel::FluorescenceOnly => params.bright_mean(),
        BrightChannel::WithBackground => params.bright_mean() + params.background_mean(),
    };
    let cap = truncation.cap(mean);
    let mut pmf = Vec::new();
    let mut cumulative = 0.0;
    for k in 0..=cap {
        let p = poisson_unchecked(k as u64, mean);
        pmf.push(p);
        cumulative += p;
        // Stop only past the mode so a far-off bulk is not mistaken for convergence.
        if k as f64 >= mean && cumulative >= 1.0 - truncation.tolerance {
            break;
        }
    }
    CountDistribution::from_pmf(pmf)
}

/// Probability that a dark ion yields `k` fluorescence photons, noise excluded.
///
/// The level decays at an exponentially distributed time `t₁` and then emits
/// Poisson photons at rate `λ_B` for the remaining `t − t₁`; with probability
/// `e^(−λt)` it survives the whole window and contributes a point mass at
/// `k = 0`. Integrating over `t₁` gives, with `x = (λ_B − λ)t`,
///
/// ```text
/// P(k) = λt e^(−λt) (λ_B t)ᵏ / x^(k+1) · γ(x, k+1) + e^(−λt) δ_{k0}
/// ```
///
/// where `γ` is the regularized lower incomplete gamma function. For
/// `λ > λ_B` (negative `x`) and for `|x| <` [`DEGENERATE_GAP`] the same
/// quantity is evaluated through equivalent forms that stay well conditioned.
pub fn dark_decay_pmf(k: u64, params: &FluorescenceParams) -> Result<f64> {
    params.validate()?;
    Ok(dark_decay_unchecked(k, params))
}

fn dark_decay_unchecked(k: u64, params: &FluorescenceParams) -> f64 {
    let survival_mass = libm::exp(-params.decay_exposure());
    let point_mass = if k == 0 { survival_mass } else { 0.0 };
    if params.decay_rate == 0.0 {
        return point_mass;
    }
    decayed_component(k, params) + point_mass
}

/// The integral term: photons from a level that decayed inside the window.
fn decayed_component(k: u64, params: &FluorescenceParams) -> f64 {
    let t = params.detection_time;
    let lambda_t = params.decay_exposure();
    let bright_mean = params.bright_mean();
    let gap = (params.bright_rate - params.decay_rate) * t;
    let kf = k as f64;
    let ln_common = libm::log(lambda_t) + kf * libm::log(bright_mean);

    let ln_value = if gap.abs() < DEGENERATE_GAP {
        // λt e^(−λ_B t) (λ_B t)ᵏ Σ_m x^m / (m+k+1)!
        ln_common - bright_mean - ln_gamma(kf + 2.0) + libm::log(scaled_series(k, gap))
    } else if gap > 0.0 {
        let ln_gamma_inc = ln_regularized_lower_incomplete_gamma(gap, kf + 1.0)
            .expect("positive gap and shape are inside the incomplete gamma domain");
        ln_common - lambda_t - (kf + 1.0) * libm::log(gap) + ln_gamma_inc
    } else {
        // λt e^(−λ_B t) (λ_B t)ᵏ / k! · ∫₀¹ (1−u)ᵏ e^(−yu) du with y = −x > 0
        ln_common - bright_mean - ln_factorial(k) + libm::log(decay_weight_integral(k, -gap))
    };
    libm::exp(ln_value)
}

/// `(k+1)! Σ_m x^m / (m+k+1)!` for small `|x|`.
fn scaled_series(k: u64, x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..200u64 {
        term *= x / (m + k + 1) as f64;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// `J_k(y) = ∫₀¹ (1−u)ᵏ e^(−yu) du` for `y > 0`.
///
/// Upward recursion `J_j = (1 − j·J_{j−1}) / y` is stable while `j < y`; past
/// that the alternating series `Σ_m (−y)^m k!/(m+k+1)!` has decreasing terms.
fn decay_weight_integral(k: u64, y: f64) -> f64 {
    let kf = k as f64;
    if kf < y {
        let mut j_value = -libm::expm1(-y) / y;
        for j in 1..=k {
            j_value = (1.0 - j as f64 * j_value) / y;
        }
        j_value
    } else {
        let mut term = 1.0 / (kf + 1.0);
        let mut sum = term;
        for m in 1..100_000u64 {
            term *= -y / (kf + 1.0 + m as f64);
            sum += term;
            if term.abs() <= 1e-17 * sum.abs() {
                break;
            }
        }
        sum
    }
}

/// Count distribution of a dark ion including detector noise: the decayed-dark
/// pmf convolved with Poisson noise of mean `λ_D·t`.
pub fn dark_distribution(params: &FluorescenceParams, truncation: &Truncation) -> Result<CountDistribution> {
    params.validate()?;
    truncation.validate()?;
    let noise_mean = params.background_mean();
    let cap = truncation.cap(params.bright_mean() + noise_mean);
    let noise: Vec<f64> = (0..=cap as u64).map(|k| poisson_unchecked(k, noise_mean)).collect();
    let mut decay = Vec::with_capacity(cap + 1);
    let mut pmf = Vec::new();
    let mut cumulative = 0.0;
    for k in 0..=cap {
        decay.push(dark_decay_unchecked(k as u64, params));
        let p: f64 = (0..=k).map(|j| noise[j] * decay[k - j]).sum();
        pmf.push(p);
        cumulative += p;
        if cumulative >= 1.0 - truncation.tolerance {
            break;
        }
    }
    CountDistribution::from_pmf(pmf)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(t: f64, lambda: f64, lambda_b: f64, lambda_d: f64) -> FluorescenceParams {
        FluorescenceParams::new(t, lambda, lambda_b, lambda_d).unwrap()
    }

    #[test]
    fn poisson_trivial_cases() {
        assert_eq!(poisson_pmf(0, 0.0).unwrap(), 1.0);
        assert_eq!(poisson_pmf(3, 0.0).unwrap(), 0.0);
        let p = poisson_pmf(0, 25.0).unwrap();
        assert!((p - libm::exp(-25.0)).abs() <= 1e-15 * p);
        assert!(poisson_pmf(1, -1.0).is_err());
    }

    #[test]
    fn poisson_large_mean_is_finite() {
        let p = poisson_pmf(10_000, 10_000.0).unwrap();
        // Stirling: 1/sqrt(2πm)
        let approx = 1.0 / libm::sqrt(2.0 * core::f64::consts::PI * 1e4);
        assert!((p / approx - 1.0).abs() < 1e-4);
    }

    #[test]
    fn no_decay_means_no_fluorescence() {
        let p = params(1.0, 0.0, 25.0, 0.2);
        assert_eq!(dark_decay_pmf(0, &p).unwrap(), 1.0);
        assert_eq!(dark_decay_pmf(4, &p).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_branch_is_continuous() {
        // Just inside and just outside the series threshold must agree.
        for k in [0u64, 1, 5, 20] {
            let inside = dark_decay_pmf(k, &params(1.0, 3.0 - 0.5 * DEGENERATE_GAP, 3.0, 0.0)).unwrap();
            let outside = dark_decay_pmf(k, &params(1.0, 3.0 - 2.0 * DEGENERATE_GAP, 3.0, 0.0)).unwrap();
            assert!((inside / outside - 1.0).abs() < 1e-5, "k={k}: {inside} vs {outside}");
        }
        for k in [0u64, 1, 5, 20] {
            let below = dark_decay_pmf(k, &params(1.0, 3.0 + 0.5 * DEGENERATE_GAP, 3.0, 0.0)).unwrap();
            let above = dark_decay_pmf(k, &params(1.0, 3.0 + 2.0 * DEGENERATE_GAP, 3.0, 0.0)).unwrap();
            assert!((below / above - 1.0).abs() < 1e-5, "k={k}: {below} vs {above}");
        }
    }

    #[test]
    fn fast_decay_branches_sum_to_one() {
        let p = params(1.0, 1000.0, 25.0, 0.0);
        let total: f64 = (0..400).map(|k| dark_decay_pmf(k, &p).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12, "total {total}");
    }

    #[test]
    fn bright_fig3_normalization() {
        let d = bright_distribution(&FluorescenceParams::poorly_resolved(), BrightChannel::default(), &Truncation::default())
            .unwrap();
        let total: f64 = d.pmf().iter().sum();
        assert!((total + d.tail_mass() - 1.0).abs() < 1e-12);
        assert!(d.tail_mass() <= 1e-12);
    }

    #[test]
    fn zero_bright_rate_is_rejected() {
        assert!(FluorescenceParams::new(1.0, 0.001, 0.0, 0.2).is_err());
    }

    #[test]
    fn background_channel_shifts_mean() {
        let p = FluorescenceParams::well_resolved();
        let d = bright_distribution(&p, BrightChannel::WithBackground, &Truncation::default()).unwrap();
        assert!((d.mean() - 25.2).abs() < 1e-9);
    }
}
