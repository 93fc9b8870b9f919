use alloc::format;
use alloc::vec::Vec;

use super::CountDistribution;
use crate::error::{domain, Error, Result};

/// Threshold readout and its two misidentification probabilities.
///
/// A count `k ≥ k0` is read as outcome "0" (bright), `k < k0` as "1" (dark).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReadoutErrorModel {
    pub k0: u64,
    /// Probability of reading "1" when the ion is in `|0⟩`.
    pub p10: f64,
    /// Probability of reading "0" when the ion is in `|1⟩`.
    pub p01: f64,
}

impl ReadoutErrorModel {
    pub fn new(k0: u64, p10: f64, p01: f64) -> Result<Self> {
        let model = Self { k0, p10, p01 };
        model.validate()?;
        Ok(model)
    }

    /// Checks that both error probabilities lie in `[0, 1)` and `p10 + p01 < 1`,
    /// so the readout still carries information.
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p10", self.p10), ("p01", self.p01)] {
            if !(0.0..1.0).contains(&p) {
                return Err(domain!("{name} must lie in [0, 1), got {p}"));
            }
        }
        if self.p10 + self.p01 >= 1.0 {
            return Err(domain!(
                "p10 + p01 = {} leaves the readout uninformative",
                self.p10 + self.p01
            ));
        }
        Ok(())
    }
}

/// Outcome of the threshold search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdChoice {
    pub k0: u64,
    /// Every upward crossing found up to the bright mode, ascending.
    pub crossings: Vec<u64>,
}

impl ThresholdChoice {
    /// The curves crossed more than once before the bright mode.
    pub fn is_ambiguous(&self) -> bool {
        self.crossings.len() > 1
    }
}

/// Picks the count at which the bright curve rises above the dark one.
///
/// An upward crossing is a `k ≥ 1` with `P_B(k) ≥ P_D(k)` and
/// `P_B(k−1) < P_D(k−1)`; equality counts as bright so ties fall to the
/// smaller `k`. The search runs up to the bright mode and keeps the last
/// crossing found there; more than one is reported through
/// [`ThresholdChoice::is_ambiguous`].
pub fn choose_threshold(bright: &CountDistribution, dark: &CountDistribution) -> Result<ThresholdChoice> {
    let limit = bright.mode().max(1).min(bright.k_max().max(dark.k_max()));
    let mut crossings = Vec::new();
    for k in 1..=limit {
        let below_before = bright.prob(k - 1) < dark.prob(k - 1);
        let above_now = bright.prob(k) >= dark.prob(k);
        if below_before && above_now {
            crossings.push(k as u64);
        }
    }
    match crossings.last() {
        Some(&k0) => Ok(ThresholdChoice { k0, crossings }),
        None => Err(Error::Indistinguishable(format!(
            "no upward crossing of the bright over the dark pmf for 1 <= k <= {limit}"
        ))),
    }
}

/// Misidentification probabilities for threshold `k0`:
/// `p10 = Σ_{k<k0} P_B(k)` and `p01 = 1 − Σ_{k<k0} P_D(k)` (so the dark tail
/// beyond the table is counted).
pub fn error_rates(bright: &CountDistribution, dark: &CountDistribution, k0: u64) -> ReadoutErrorModel {
    let k = usize::try_from(k0).unwrap_or(usize::MAX);
    let p10 = bright.mass_below(k).min(1.0);
    let p01 = (1.0 - dark.mass_below(k)).clamp(0.0, 1.0);
    ReadoutErrorModel { k0, p10, p01 }
}
