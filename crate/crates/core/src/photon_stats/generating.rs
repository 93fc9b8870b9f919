use super::FluorescenceParams;
use crate::error::{domain, Result};
use crate::special::expm1_over;

/// Probability generating function `G(z) = Σ P(k) zᵏ` of the dark-ion count.
///
/// Without noise this is
/// `e^(−λt) + λt e^(−λt) · (e^(wt) − 1)/(wt)` with `w = λ − λ_B(1 − z)`;
/// with `include_noise` the independent background factor `e^(−λ_D t (1 − z))`
/// multiplies it. `G(1) = 1` in both cases.
pub fn generating_function(z: f64, params: &FluorescenceParams, include_noise: bool) -> Result<f64> {
    if !(0.0..=1.0).contains(&z) {
        return Err(domain!("generating function argument must lie in [0, 1], got {z}"));
    }
    params.validate()?;
    if z == 1.0 {
        return Ok(1.0);
    }
    let t = params.detection_time;
    let lambda_t = params.decay_exposure();
    let survival = libm::exp(-lambda_t);
    let exponent = (params.decay_rate - params.bright_rate * (1.0 - z)) * t;
    let decay = survival + lambda_t * survival * expm1_over(exponent);
    let noise = if include_noise {
        libm::exp(-params.background_mean() * (1.0 - z))
    } else {
        1.0
    };
    Ok(decay * noise)
}
