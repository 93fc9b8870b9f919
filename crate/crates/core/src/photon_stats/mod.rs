//! Photon-count statistics of fluorescence readout.
//!
//! A bright ion (`|0⟩`) scatters photons on the cycling transition and the
//! detector registers a Poisson number of them with mean `λ_B·t`. A dark ion
//! (`|1⟩`) emits nothing until its metastable level decays (rate `λ`, so
//! `T₁ = 1/λ`) at a random time `t₁`, after which it fluoresces for the rest of
//! the window. Dark and background counts (rate `λ_D`) add an independent
//! Poisson contribution. Thresholding the count at `k₀` turns these two
//! distributions into the readout error probabilities `p₁₀` and `p₀₁`.

mod distribution;
mod generating;
mod moments;
mod pmf;
mod threshold;

pub use distribution::{CountDistribution, Truncation};
pub use generating::generating_function;
pub use moments::{factorial_moments, FactorialMoments};
pub use pmf::{
    bright_distribution, dark_decay_pmf, dark_distribution, poisson_pmf, BrightChannel,
    DEGENERATE_GAP,
};
pub use threshold::{choose_threshold, error_rates, ReadoutErrorModel, ThresholdChoice};

use crate::error::{domain, Result};

/// Physical parameters of one detection window.
///
/// Rates are in inverse time units, counts per unit time for the two
/// photon sources; only the products with `detection_time` matter.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FluorescenceParams {
    /// Detection time `t`.
    #[cfg_attr(feature = "serde", serde(rename = "t"))]
    pub detection_time: f64,
    /// Decay rate `λ = 1/T₁` of the dark (metastable) level.
    #[cfg_attr(feature = "serde", serde(rename = "lambda"))]
    pub decay_rate: f64,
    /// Detected fluorescence rate `λ_B` of the bright level.
    #[cfg_attr(feature = "serde", serde(rename = "lambda_b"))]
    pub bright_rate: f64,
    /// Dark plus background count rate `λ_D` of the detector.
    #[cfg_attr(feature = "serde", serde(rename = "lambda_d"))]
    pub background_rate: f64,
}

impl FluorescenceParams {
    pub fn new(detection_time: f64, decay_rate: f64, bright_rate: f64, background_rate: f64) -> Result<Self> {
        let params = Self {
            detection_time,
            decay_rate,
            bright_rate,
            background_rate,
        };
        params.validate()?;
        Ok(params)
    }

    /// Settings of the well-resolved readout example: `t = 1, λ = 0.001, λ_D = 0.2, λ_B = 25`.
    pub fn well_resolved() -> Self {
        Self {
            detection_time: 1.0,
            decay_rate: 0.001,
            bright_rate: 25.0,
            background_rate: 0.2,
        }
    }

    /// Settings of the poorly resolved readout example: `t = 1, λ = 0.05, λ_D = 0.05, λ_B = 3`.
    pub fn poorly_resolved() -> Self {
        Self {
            detection_time: 1.0,
            decay_rate: 0.05,
            bright_rate: 3.0,
            background_rate: 0.05,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.detection_time > 0.0) || !self.detection_time.is_finite() {
            return Err(domain!("detection time t must be positive, got {}", self.detection_time));
        }
        if !(self.decay_rate >= 0.0) || !self.decay_rate.is_finite() {
            return Err(domain!("decay rate lambda must be non-negative, got {}", self.decay_rate));
        }
        if !(self.bright_rate > 0.0) || !self.bright_rate.is_finite() {
            return Err(domain!("bright rate lambda_b must be positive, got {}", self.bright_rate));
        }
        if !(self.background_rate >= 0.0) || !self.background_rate.is_finite() {
            return Err(domain!(
                "background rate lambda_d must be non-negative, got {}",
                self.background_rate
            ));
        }
        Ok(())
    }

    /// True when the dark level outlives the bright photon interval, `λ < λ_B`.
    ///
    /// Parameters outside this regime are still evaluated exactly; they only
    /// describe an unusable readout.
    pub fn is_physical_regime(&self) -> bool {
        self.decay_rate < self.bright_rate
    }

    /// Mean bright count `λ_B·t`.
    pub fn bright_mean(&self) -> f64 {
        self.bright_rate * self.detection_time
    }

    /// Mean noise count `λ_D·t`.
    pub fn background_mean(&self) -> f64 {
        self.background_rate * self.detection_time
    }

    /// `λ·t`, the expected number of dark-level decays within the window.
    pub fn decay_exposure(&self) -> f64 {
        self.decay_rate * self.detection_time
    }
}
