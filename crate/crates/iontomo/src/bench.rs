//! End-to-end experiments: the readout distribution study and the ensemble
//! tomography benchmark comparing fuzzy and standard reconstruction.

use std::path::{Path, PathBuf};

use iontomo_core::measurement::{pauli_protocol_per_qubit, simulate_record, FuzzyQubitPovm};
use iontomo_core::photon_stats::{
    bright_distribution, choose_threshold, dark_distribution, error_rates, BrightChannel, FluorescenceParams,
    ReadoutErrorModel, Truncation,
};
use iontomo_core::quantum::{haar_random_pure_state, DensityMatrix};
use iontomo_core::seed::{Purpose, SeedSchedule};
use iontomo_core::tomography::{infidelity, reconstruct, MeasurementModel, ReconstructionConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::{csv_string, format_sig, write_file, write_json, DistributionTable};

/// Bright and dark count tables, the chosen threshold and its error rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionStudy {
    pub params: FluorescenceParams,
    pub bright_channel: BrightChannel,
    pub bright: DistributionTable,
    pub dark: DistributionTable,
    /// Upward crossings of the bright over the dark curve; `k0` is the last.
    pub crossings: Vec<u64>,
    pub error_model: ReadoutErrorModel,
}

impl DistributionStudy {
    pub fn is_ambiguous(&self) -> bool {
        self.crossings.len() > 1
    }

    /// One row per count: `k, p_bright, p_dark`.
    pub fn to_csv(&self, digits: usize) -> Result<String> {
        let k_max = self.bright.k_max.max(self.dark.k_max);
        let entry = |pmf: &[f64], k: usize| format_sig(pmf.get(k).copied().unwrap_or(0.0), digits);
        csv_string(
            &["k", "p_bright", "p_dark"],
            (0..=k_max).map(|k| vec![k.to_string(), entry(&self.bright.pmf, k), entry(&self.dark.pmf, k)]),
        )
    }
}

pub fn run_distribution_study(params: &FluorescenceParams, channel: BrightChannel) -> Result<DistributionStudy> {
    let truncation = Truncation::default();
    let bright = bright_distribution(params, channel, &truncation)?;
    let dark = dark_distribution(params, &truncation)?;
    let choice = choose_threshold(&bright, &dark)?;
    let error_model = error_rates(&bright, &dark, choice.k0);
    error_model.validate()?;
    Ok(DistributionStudy {
        params: *params,
        bright_channel: channel,
        bright: DistributionTable::new(&bright, *params),
        dark: DistributionTable::new(&dark, *params),
        crossings: choice.crossings,
        error_model,
    })
}

/// Error rates at a threshold, chosen automatically unless `k0` is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRateReport {
    pub params: FluorescenceParams,
    pub bright_channel: BrightChannel,
    pub k0: u64,
    pub p10: f64,
    pub p01: f64,
    /// Empty when the threshold was supplied.
    pub crossings: Vec<u64>,
}

impl ErrorRateReport {
    pub fn to_csv(&self, digits: usize) -> Result<String> {
        csv_string(
            &["k0", "p10", "p01"],
            [vec![self.k0.to_string(), format_sig(self.p10, digits), format_sig(self.p01, digits)]],
        )
    }
}

pub fn readout_error_rates(
    params: &FluorescenceParams,
    channel: BrightChannel,
    k0: Option<u64>,
) -> Result<ErrorRateReport> {
    let truncation = Truncation::default();
    let bright = bright_distribution(params, channel, &truncation)?;
    let dark = dark_distribution(params, &truncation)?;
    let (k0, crossings) = match k0 {
        Some(k0) => (k0, Vec::new()),
        None => {
            let choice = choose_threshold(&bright, &dark)?;
            (choice.k0, choice.crossings)
        }
    };
    let model = error_rates(&bright, &dark, k0);
    Ok(ErrorRateReport {
        params: *params,
        bright_channel: channel,
        k0,
        p10: model.p10,
        p01: model.p01,
        crossings,
    })
}

/// How `BenchmarkConfig::shots` is spread over the `3ⁿ` measurement settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShotsMode {
    /// `shots` is the total per state, split as `⌊shots/3ⁿ⌋` per setting.
    #[default]
    Total,
    /// `shots` per setting.
    PerBasis,
}

/// Where the readout error probabilities come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorSource {
    /// The same `(p10, p01)` on every qubit.
    Direct { p10: f64, p01: f64 },
    /// A separate readout model per qubit.
    PerQubit(Vec<FuzzyQubitPovm>),
    /// Derived from the photon statistics at the automatically chosen threshold.
    Fluorescence {
        params: FluorescenceParams,
        #[serde(default)]
        bright_channel: BrightChannel,
    },
}

impl ErrorSource {
    /// Readout POVMs for each of `n_qubits` qubits.
    pub fn povms(&self, n_qubits: usize) -> Result<Vec<FuzzyQubitPovm>> {
        let povms = self.unchecked_povms(n_qubits)?;
        // Λ₀ and Λ₁ become proportional at p10 + p01 = 1 and the counts say nothing.
        if let Some(p) = povms.iter().find(|p| p.p10 + p.p01 >= 1.0) {
            return Err(Error::Config(format!(
                "p10 + p01 must be below 1, got {} + {}",
                p.p10, p.p01
            )));
        }
        Ok(povms)
    }

    fn unchecked_povms(&self, n_qubits: usize) -> Result<Vec<FuzzyQubitPovm>> {
        match self {
            ErrorSource::Direct { p10, p01 } => Ok(vec![FuzzyQubitPovm::new(*p10, *p01)?; n_qubits]),
            ErrorSource::PerQubit(povms) => {
                if povms.len() != n_qubits {
                    return Err(Error::Config(format!(
                        "{} per-qubit readout models for {n_qubits} qubits",
                        povms.len()
                    )));
                }
                povms
                    .iter()
                    .map(|p| Ok(FuzzyQubitPovm::new(p.p10, p.p01)?))
                    .collect()
            }
            ErrorSource::Fluorescence { params, bright_channel } => {
                let study = run_distribution_study(params, *bright_channel)?;
                Ok(vec![FuzzyQubitPovm::from_error_model(&study.error_model)?; n_qubits])
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub n_qubits: usize,
    pub n_states: usize,
    pub shots: u64,
    pub shots_mode: ShotsMode,
    pub error_source: ErrorSource,
    pub master_seed: u64,
    /// Reconstruction rank; `None` is full rank.
    pub rank: Option<usize>,
    /// Leave states with a non-converged reconstruction out of the summaries.
    pub exclude_nonconverged: bool,
    /// Where the JSON report (and its CSV companion) are written, if anywhere.
    pub output_path: Option<PathBuf>,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            n_qubits: 2,
            n_states: 200,
            shots: 1_000_000,
            shots_mode: ShotsMode::Total,
            error_source: ErrorSource::Direct { p10: 0.1, p01: 0.1 },
            master_seed: 0,
            rank: Some(1),
            exclude_nonconverged: false,
            output_path: None,
        }
    }
}

impl BenchmarkConfig {
    pub fn settings(&self) -> u64 {
        3u64.pow(self.n_qubits as u32)
    }

    pub fn shots_per_basis(&self) -> u64 {
        match self.shots_mode {
            ShotsMode::Total => self.shots / self.settings(),
            ShotsMode::PerBasis => self.shots,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=8).contains(&self.n_qubits) {
            return Err(Error::Config(format!("n_qubits must lie in 1..=8, got {}", self.n_qubits)));
        }
        if self.n_states == 0 {
            return Err(Error::Config("n_states must be at least 1".into()));
        }
        if self.shots_per_basis() == 0 {
            return Err(Error::Config(format!(
                "{} shots leave no shot for each of the {} settings",
                self.shots,
                self.settings()
            )));
        }
        if let Some(rank) = self.rank {
            let dim = 1usize << self.n_qubits;
            if rank == 0 || rank > dim {
                return Err(Error::Config(format!("rank must lie in 1..={dim}, got {rank}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateOutcome {
    pub index: u64,
    /// Item seed of this state's streams under the master seed.
    pub seed: u64,
    pub infidelity_standard: f64,
    pub infidelity_fuzzy: f64,
    pub converged_standard: bool,
    pub converged_fuzzy: bool,
    pub iterations_standard: usize,
    pub iterations_fuzzy: usize,
    /// Observed outcomes the standard model assigns (near) zero probability.
    pub floored_standard: usize,
}

impl StateOutcome {
    pub fn converged(&self) -> bool {
        self.converged_standard && self.converged_fuzzy
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfidelitySummary {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub q10: f64,
    pub q25: f64,
    pub q75: f64,
    pub q90: f64,
    pub min: f64,
    pub max: f64,
}

impl InfidelitySummary {
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Config("no infidelities left to summarize".into()));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        // Linear interpolation between order statistics.
        let quantile = |q: f64| {
            let pos = q * (sorted.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
        };
        Ok(Self {
            count: sorted.len(),
            mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
            median: quantile(0.5),
            q10: quantile(0.1),
            q25: quantile(0.25),
            q75: quantile(0.75),
            q90: quantile(0.9),
            min: sorted[0],
            max: sorted[sorted.len() - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub config: BenchmarkConfig,
    /// Readout model of each qubit.
    pub readout: Vec<FuzzyQubitPovm>,
    pub shots_per_basis: u64,
    pub states: Vec<StateOutcome>,
    pub fuzzy: InfidelitySummary,
    pub standard: InfidelitySummary,
    /// Mean standard-model infidelity over mean fuzzy-model infidelity;
    /// absent when the fuzzy mean is exactly zero.
    pub ratio: Option<f64>,
    /// States where at least one reconstruction missed its stopping criteria.
    pub non_converged: usize,
    /// States left out of the summaries.
    pub excluded: usize,
}

impl BenchmarkReport {
    /// One row per state: `index, seed, infidelity_standard, infidelity_fuzzy`.
    pub fn to_csv(&self, digits: usize) -> Result<String> {
        csv_string(
            &["index", "seed", "infidelity_standard", "infidelity_fuzzy"],
            self.states.iter().map(|s| {
                vec![
                    s.index.to_string(),
                    s.seed.to_string(),
                    format_sig(s.infidelity_standard, digits),
                    format_sig(s.infidelity_fuzzy, digits),
                ]
            }),
        )
    }
}

fn benchmark_state(
    index: u64,
    schedule: &SeedSchedule,
    povms: &[FuzzyQubitPovm],
    config: &BenchmarkConfig,
) -> Result<StateOutcome> {
    let seed = schedule.item_seed(index);
    let psi = haar_random_pure_state(config.n_qubits, &mut SeedSchedule::stream(seed, Purpose::StateGeneration))?;
    let protocol = pauli_protocol_per_qubit(povms, config.shots_per_basis())?;
    let record = simulate_record(
        &DensityMatrix::from_pure(&psi),
        &protocol,
        &mut SeedSchedule::stream(seed, Purpose::Sampling),
    )?;
    let solve = |model| {
        let rc = ReconstructionConfig {
            rank: config.rank,
            ..ReconstructionConfig::with_model(model)
        };
        reconstruct(&record, &protocol, &rc)
    };
    let fuzzy = solve(MeasurementModel::Fuzzy)?;
    let standard = solve(MeasurementModel::Standard)?;
    Ok(StateOutcome {
        index,
        seed,
        infidelity_standard: infidelity(&standard, &psi)?,
        infidelity_fuzzy: infidelity(&fuzzy, &psi)?,
        converged_standard: standard.converged,
        converged_fuzzy: fuzzy.converged,
        iterations_standard: standard.iterations,
        iterations_fuzzy: fuzzy.iterations,
        floored_standard: standard.floored_outcomes,
    })
}

/// Reconstructs `n_states` Haar-random pure states from fuzzy-readout data
/// under both measurement models.
///
/// State `i` draws its state and its counts from streams keyed by
/// `item_seed(i)`, so its outcome does not depend on `n_states` or on the
/// order in which states are processed.
pub fn run_tomography_benchmark(config: &BenchmarkConfig) -> Result<BenchmarkReport> {
    config.validate()?;
    let povms = config.error_source.povms(config.n_qubits)?;
    let schedule = SeedSchedule::new(config.master_seed);
    let states = (0..config.n_states as u64)
        .into_par_iter()
        .map(|i| benchmark_state(i, &schedule, &povms, config))
        .collect::<Result<Vec<_>>>()?;

    let non_converged = states.iter().filter(|s| !s.converged()).count();
    let kept: Vec<&StateOutcome> = states
        .iter()
        .filter(|s| !config.exclude_nonconverged || s.converged())
        .collect();
    let fuzzy = InfidelitySummary::new(&kept.iter().map(|s| s.infidelity_fuzzy).collect::<Vec<_>>())?;
    let standard = InfidelitySummary::new(&kept.iter().map(|s| s.infidelity_standard).collect::<Vec<_>>())?;
    let ratio = (fuzzy.mean > 0.0).then(|| standard.mean / fuzzy.mean);
    let report = BenchmarkReport {
        config: config.clone(),
        readout: povms,
        shots_per_basis: config.shots_per_basis(),
        excluded: states.len() - kept.len(),
        states,
        fuzzy,
        standard,
        ratio,
        non_converged,
    };
    if let Some(path) = &config.output_path {
        write_report(path, &report, 17)?;
    }
    Ok(report)
}

/// Writes the JSON report to `path` and the per-state CSV, with `digits`
/// significant digits, next to it.
pub fn write_report(path: &Path, report: &BenchmarkReport, digits: usize) -> Result<()> {
    write_json(path, report)?;
    write_file(&path.with_extension("csv"), report.to_csv(digits)?.as_bytes())
}

/// The same benchmark with `shots` read as a total and as a per-setting count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotsModeComparison {
    pub total: BenchmarkReport,
    pub per_basis: BenchmarkReport,
}

impl ShotsModeComparison {
    /// Per-state CSV of both reports with a leading `shots_mode` column.
    pub fn to_csv(&self, digits: usize) -> Result<String> {
        let rows = [("total", &self.total), ("per_basis", &self.per_basis)]
            .into_iter()
            .flat_map(|(mode, report)| {
                report.states.iter().map(move |s| {
                    vec![
                        mode.to_string(),
                        s.index.to_string(),
                        s.seed.to_string(),
                        format_sig(s.infidelity_standard, digits),
                        format_sig(s.infidelity_fuzzy, digits),
                    ]
                })
            });
        csv_string(
            &["shots_mode", "index", "seed", "infidelity_standard", "infidelity_fuzzy"],
            rows,
        )
    }
}

impl ShotsModeComparison {
    /// Writes the JSON comparison to `path` and the per-state CSV next to it.
    pub fn write(&self, path: &Path, digits: usize) -> Result<()> {
        write_json(path, self)?;
        write_file(&path.with_extension("csv"), self.to_csv(digits)?.as_bytes())
    }
}

pub fn run_both_shots_modes(config: &BenchmarkConfig) -> Result<ShotsModeComparison> {
    let with_mode = |shots_mode| BenchmarkConfig {
        shots_mode,
        output_path: None,
        ..config.clone()
    };
    let comparison = ShotsModeComparison {
        total: run_tomography_benchmark(&with_mode(ShotsMode::Total))?,
        per_basis: run_tomography_benchmark(&with_mode(ShotsMode::PerBasis))?,
    };
    if let Some(path) = &config.output_path {
        comparison.write(path, 17)?;
    }
    Ok(comparison)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(master_seed: u64, n_states: usize) -> BenchmarkConfig {
        BenchmarkConfig {
            n_qubits: 1,
            n_states,
            shots: 3000,
            master_seed,
            ..BenchmarkConfig::default()
        }
    }

    #[test]
    fn summary_quantiles() {
        let s = InfidelitySummary::new(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!(s.median, 2.5);
        assert_eq!(s.min, 1.0);
        assert_eq!(s.max, 4.0);
        assert_eq!(s.mean, 2.5);
        assert!((s.q25 - 1.75).abs() < 1e-15);
    }

    #[test]
    fn per_state_results_do_not_depend_on_ensemble_size() {
        let a = run_tomography_benchmark(&small(9, 3)).unwrap();
        let b = run_tomography_benchmark(&small(9, 6)).unwrap();
        assert_eq!(a.states[..], b.states[..3]);
    }

    #[test]
    fn too_few_total_shots_are_rejected() {
        let config = BenchmarkConfig {
            shots: 8,
            ..BenchmarkConfig::default()
        };
        assert!(matches!(config.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn fluorescence_source_uses_the_chosen_threshold() {
        let source = ErrorSource::Fluorescence {
            params: FluorescenceParams::poorly_resolved(),
            bright_channel: BrightChannel::FluorescenceOnly,
        };
        let povms = source.povms(2).unwrap();
        assert_eq!(povms.len(), 2);
        assert!((povms[0].p10 - 0.0497871).abs() < 1e-6);
        assert!((povms[1].p01 - 0.0806290).abs() < 1e-6);
    }

    #[test]
    fn silent_detector_gives_no_false_bright() {
        let params = FluorescenceParams::new(1.0, 0.0, 25.0, 0.0).unwrap();
        let study = run_distribution_study(&params, BrightChannel::FluorescenceOnly).unwrap();
        assert_eq!(study.error_model.p01, 0.0);
        assert_eq!(study.error_model.k0, 1);
    }
}
