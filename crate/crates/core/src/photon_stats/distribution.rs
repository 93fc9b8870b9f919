use alloc::vec::Vec;

use crate::error::{domain, Result};

/// How far a count distribution is tabulated.
///
/// The table stops at the first `k` whose cumulative mass reaches
/// `1 − tolerance`, but never beyond `max(min_cap, ⌈mean + sigmas·√mean⌉)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    pub tolerance: f64,
    pub min_cap: usize,
    pub sigmas: f64,
}

impl Default for Truncation {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            min_cap: 200,
            sigmas: 20.0,
        }
    }
}

impl Truncation {
    /// Largest `k` that may be tabulated for a distribution with the given mean.
    pub fn cap(&self, mean: f64) -> usize {
        let spread = libm::ceil(mean + self.sigmas * libm::sqrt(mean.max(0.0)));
        self.min_cap.max(spread as usize)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(domain!("truncation tolerance must lie in (0, 1), got {}", self.tolerance));
        }
        Ok(())
    }
}

/// Probability mass function over photon counts `k = 0..=k_max`, with the mass
/// of all larger counts kept as `tail_mass`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountDistribution {
    pmf: Vec<f64>,
    tail_mass: f64,
}

impl CountDistribution {
    /// Wraps a tabulated pmf; the tail mass is whatever the table leaves out of unit total.
    pub fn from_pmf(pmf: Vec<f64>) -> Result<Self> {
        if pmf.is_empty() {
            return Err(domain!("a count distribution needs at least the k = 0 entry"));
        }
        if let Some((k, p)) = pmf.iter().enumerate().find(|(_, p)| !(0.0..=1.0).contains(*p)) {
            return Err(domain!("pmf entry at k = {k} is {p}, outside [0, 1]"));
        }
        let total: f64 = pmf.iter().sum();
        if total > 1.0 + 1e-12 {
            return Err(domain!("pmf sums to {total}, above 1"));
        }
        let tail_mass = (1.0 - total).max(0.0);
        Ok(Self { pmf, tail_mass })
    }

    pub fn k_max(&self) -> usize {
        self.pmf.len() - 1
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// `P(k)`, zero beyond the tabulated range.
    pub fn prob(&self, k: usize) -> f64 {
        self.pmf.get(k).copied().unwrap_or(0.0)
    }

    /// `Σ_{j<k} P(j)`.
    pub fn mass_below(&self, k: usize) -> f64 {
        self.pmf.iter().take(k).sum()
    }

    /// Mean of the tabulated part.
    pub fn mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }

    /// Variance of the tabulated part.
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        let second: f64 = self.pmf.iter().enumerate().map(|(k, p)| (k * k) as f64 * p).sum();
        second - mean * mean
    }

    /// Smallest `k` of maximal probability.
    pub fn mode(&self) -> usize {
        let mut best = 0;
        for (k, &p) in self.pmf.iter().enumerate() {
            if p > self.pmf[best] {
                best = k;
            }
        }
        best
    }
}
