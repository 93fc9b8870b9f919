//! Maximum-likelihood density-matrix reconstruction.
//!
//! The estimate is parameterized by its root factor, `ρ = AA†/tr(AA†)` with
//! `A` a `d × r` complex matrix, which keeps every iterate positive and unit
//! trace. The log-likelihood of a count record is
//! `Σ_rows Σ_i n_i log tr(ρΛ_i)`, where the operators `Λ_i` are either the
//! fuzzy readout operators the data were taken with ([`MeasurementModel::Fuzzy`])
//! or the ideal rotated projectors ([`MeasurementModel::Standard`]).
//!
//! Two ascent iterations are available. [`Solver::Newton`] takes modified
//! Newton steps in the entries of `A` and converges quickly even when the
//! optimum is rank deficient. [`Solver::FixedPoint`] is the diluted fixed-point
//! map `A ← A + ε(R/N − I)A`, `R = Σ n_i Λ_i / tr(ρΛ_i)`; it is cheap per step
//! but slows down sharply near rank-deficient optima. Both accept a step only
//! if the likelihood does not decrease.
//!
//! A reconstruction of rank `r < d` first solves the full-rank problem and
//! starts from its `r` leading eigenvectors.

mod objective;
mod solver;

use alloc::vec::Vec;

pub use objective::PROBABILITY_FLOOR;

use crate::error::{domain, Error, Result};
use crate::measurement::{expectation, CountRecord, FuzzyQubitPovm, ProtocolRow};
use crate::quantum::{fidelity, CMatrix, DensityMatrix, PureState};
use objective::{Objective, Outcome};
use solver::{leading_factor, Stopping, Trajectory};

/// Newton is used up to this many real parameters (`2·d·r`); larger problems
/// fall back to the fixed-point iteration.
pub const NEWTON_MAX_PARAMETERS: usize = 1024;

/// Measurement operators assumed during reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MeasurementModel {
    /// The fuzzy operators the data were generated with.
    Fuzzy,
    /// Ideal projectors in the same bases, ignoring readout errors.
    Standard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Solver {
    /// Newton for problems up to [`NEWTON_MAX_PARAMETERS`], fixed point above.
    #[default]
    Auto,
    Newton,
    FixedPoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReconstructionConfig {
    pub model: MeasurementModel,
    pub max_iterations: usize,
    /// Stop once the log-likelihood gain per iteration drops below this
    /// times the number of shots...
    pub convergence_tol: f64,
    /// ...and the trace distance between iterates below this.
    pub step_tol: f64,
    /// Rank of the factor `A`; `None` means full rank.
    pub rank: Option<usize>,
    pub solver: Solver,
    /// Keep the per-iteration log-likelihood of the final stage.
    pub record_history: bool,
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        Self {
            model: MeasurementModel::Fuzzy,
            max_iterations: 5000,
            convergence_tol: 1e-10,
            step_tol: 1e-9,
            rank: None,
            solver: Solver::Auto,
            record_history: false,
        }
    }
}

impl ReconstructionConfig {
    pub fn with_model(model: MeasurementModel) -> Self {
        Self {
            model,
            ..Self::default()
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(domain!("max_iterations must be at least 1"));
        }
        if !(self.convergence_tol > 0.0) || !(self.step_tol > 0.0) {
            return Err(domain!("convergence tolerances must be positive"));
        }
        if let Some(rank) = self.rank {
            if rank == 0 || rank > dim {
                return Err(domain!("rank must lie in 1..={dim}, got {rank}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    pub rho_hat: DensityMatrix,
    pub log_likelihood: f64,
    /// Iterations over all stages.
    pub iterations: usize,
    pub converged: bool,
    /// Observed outcomes whose model probability sits at [`PROBABILITY_FLOOR`].
    pub floored_outcomes: usize,
    /// Per-iteration log-likelihood of the final stage, when requested.
    pub history: Vec<f64>,
}

/// Rows carrying the operators of `model`: the protocol's own for the fuzzy
/// model, ideal projectors in the same bases for the standard model.
pub fn model_protocol(protocol: &[ProtocolRow], model: MeasurementModel) -> Result<Vec<ProtocolRow>> {
    match model {
        MeasurementModel::Fuzzy => Ok(protocol.to_vec()),
        MeasurementModel::Standard => protocol
            .iter()
            .map(|row| {
                let ideal = alloc::vec![FuzzyQubitPovm::ideal(); row.n_qubits()];
                ProtocolRow::new(row.bases(), &ideal, row.shots())
            })
            .collect(),
    }
}

fn check_shapes(record: &CountRecord, protocol: &[ProtocolRow]) -> Result<usize> {
    let first = protocol.first().ok_or_else(|| domain!("empty protocol"))?;
    let dim = first.dim();
    if protocol.iter().any(|r| r.dim() != dim) {
        return Err(domain!("protocol rows act on different dimensions"));
    }
    record.validate(protocol)?;
    Ok(dim)
}

/// `Σ_rows Σ_i n_i log max(tr(ρΛ_i), 1e-15)` over the given rows' operators.
pub fn log_likelihood(rho: &DensityMatrix, record: &CountRecord, protocol: &[ProtocolRow]) -> Result<f64> {
    let dim = check_shapes(record, protocol)?;
    if rho.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: rho.dim(),
        });
    }
    let mut total = 0.0;
    for (row, counts) in protocol.iter().zip(&record.counts) {
        for (op, &n) in row.operators().iter().zip(counts) {
            if n > 0 {
                let p = expectation(rho.matrix(), op).max(PROBABILITY_FLOOR);
                total += n as f64 * libm::log(p);
            }
        }
    }
    Ok(total)
}

fn build_objective(record: &CountRecord, rows: &[ProtocolRow], dim: usize) -> Objective {
    let outcomes = rows
        .iter()
        .zip(&record.counts)
        .flat_map(|(row, counts)| {
            row.operators()
                .iter()
                .zip(counts)
                .filter(|(_, &n)| n > 0)
                .map(|(op, &n)| Outcome {
                    op: op.clone(),
                    count: n as f64,
                })
        })
        .collect();
    Objective::new(outcomes, dim)
}

fn run(objective: &Objective, start: CMatrix, config: &ReconstructionConfig, record: bool) -> Trajectory {
    let stopping = Stopping {
        max_iterations: config.max_iterations,
        gain_per_shot: config.convergence_tol,
        step: config.step_tol,
    };
    let parameters = 2 * start.nrows() * start.ncols();
    let use_newton = match config.solver {
        Solver::Newton => true,
        Solver::FixedPoint => false,
        Solver::Auto => parameters <= NEWTON_MAX_PARAMETERS,
    };
    if use_newton {
        solver::newton(objective, start, stopping, record)
    } else {
        solver::fixed_point(objective, start, stopping, record)
    }
}

/// Maximum-likelihood estimate of the state behind `record`.
///
/// `protocol` is the protocol the data were taken with; `config.model`
/// decides whether its fuzzy operators or the ideal projectors are assumed.
/// Failure to meet the stopping thresholds within `max_iterations` is not an
/// error: the last iterate is returned with `converged = false`.
pub fn reconstruct(
    record: &CountRecord,
    protocol: &[ProtocolRow],
    config: &ReconstructionConfig,
) -> Result<ReconstructionResult> {
    let dim = check_shapes(record, protocol)?;
    config.validate(dim)?;
    if record.total_shots() == 0 {
        return Err(domain!("count record is empty"));
    }
    let rows = model_protocol(protocol, config.model)?;
    let objective = build_objective(record, &rows, dim);
    let rank = config.rank.unwrap_or(dim);

    let full = run(&objective, CMatrix::identity(dim, dim), config, config.record_history && rank == dim);
    let trajectory = if rank == dim {
        full
    } else {
        let warm = DensityMatrix::from_factor(&full.factor)?;
        let mut reduced = run(&objective, leading_factor(&warm, rank), config, config.record_history);
        reduced.iterations += full.iterations;
        reduced
    };

    let rho_hat = DensityMatrix::from_factor(&trajectory.factor)?;
    let floored_outcomes = objective.evaluate(&trajectory.factor).floored;
    Ok(ReconstructionResult {
        rho_hat,
        log_likelihood: trajectory.value,
        iterations: trajectory.iterations,
        converged: trajectory.converged,
        floored_outcomes,
        history: trajectory.history,
    })
}

/// `1 − ⟨ψ|ρ̂|ψ⟩`, clamped to `[0, 1]`.
pub fn infidelity(result: &ReconstructionResult, true_state: &PureState) -> Result<f64> {
    state_infidelity(&result.rho_hat, true_state)
}

pub fn state_infidelity(rho: &DensityMatrix, true_state: &PureState) -> Result<f64> {
    Ok((1.0 - fidelity(rho, true_state)?).clamp(0.0, 1.0))
}

/// Test hooks for the likelihood gradient.
#[doc(hidden)]
pub mod internals {
    use super::*;
    use nalgebra::DVector;

    /// Log-likelihood and its gradient at the factor given by real parameters `x`.
    pub fn value_and_gradient(
        record: &CountRecord,
        protocol: &[ProtocolRow],
        x: &DVector<f64>,
        rows: usize,
        cols: usize,
    ) -> Result<(f64, DVector<f64>)> {
        let dim = check_shapes(record, protocol)?;
        let objective = build_objective(record, protocol, dim);
        let factor = objective::from_real(x, rows, cols);
        let eval = objective.evaluate(&factor);
        let gradient = objective.gradient(&factor, &eval);
        Ok((eval.value, gradient))
    }

    pub fn value_at(record: &CountRecord, protocol: &[ProtocolRow], x: &DVector<f64>, rows: usize, cols: usize) -> Result<f64> {
        let dim = check_shapes(record, protocol)?;
        let objective = build_objective(record, protocol, dim);
        Ok(objective.value(&objective::from_real(x, rows, cols)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::{outcome_probabilities, pauli_protocol, simulate_record};
    use crate::quantum::haar_random_pure_state;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn certain_outcomes_have_zero_log_likelihood() {
        let rows = pauli_protocol(1, &FuzzyQubitPovm::ideal(), 10).unwrap();
        let zero = DensityMatrix::from_pure(&PureState::basis(1, 0).unwrap());
        // X and Y rows are 50/50 for |0⟩, so only fill the Z row with certain outcomes.
        let rows_z = vec![rows[2].clone()];
        let record = CountRecord { counts: vec![vec![10, 0]] };
        assert_eq!(log_likelihood(&zero, &record, &rows_z).unwrap(), 0.0);
        let empty_rows = pauli_protocol(1, &FuzzyQubitPovm::ideal(), 0);
        assert!(empty_rows.is_err());
    }

    #[test]
    fn mismatched_record_is_rejected() {
        let rows = pauli_protocol(1, &FuzzyQubitPovm::ideal(), 4).unwrap();
        let record = CountRecord { counts: vec![vec![4, 0], vec![2, 2]] };
        let config = ReconstructionConfig::default();
        assert!(reconstruct(&record, &rows, &config).is_err());
        let rho = DensityMatrix::maximally_mixed(2).unwrap();
        let ok = CountRecord { counts: vec![vec![4, 0], vec![2, 2], vec![1, 3]] };
        assert!(log_likelihood(&rho, &ok, &rows).is_err());
    }

    #[test]
    fn bad_config_is_rejected() {
        let rows = pauli_protocol(1, &FuzzyQubitPovm::ideal(), 4).unwrap();
        let record = CountRecord { counts: vec![vec![4, 0], vec![2, 2], vec![1, 3]] };
        for config in [
            ReconstructionConfig { rank: Some(3), ..Default::default() },
            ReconstructionConfig { rank: Some(0), ..Default::default() },
            ReconstructionConfig { max_iterations: 0, ..Default::default() },
            ReconstructionConfig { convergence_tol: 0.0, ..Default::default() },
        ] {
            assert!(reconstruct(&record, &rows, &config).is_err());
        }
    }

    #[test]
    fn maximally_mixed_estimate_infidelity() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let psi = haar_random_pure_state(2, &mut rng).unwrap();
        let result = ReconstructionResult {
            rho_hat: DensityMatrix::maximally_mixed(2).unwrap(),
            log_likelihood: 0.0,
            iterations: 0,
            converged: true,
            floored_outcomes: 0,
            history: Vec::new(),
        };
        assert!((infidelity(&result, &psi).unwrap() - 0.75).abs() < 1e-12);
        let exact = ReconstructionResult {
            rho_hat: DensityMatrix::from_pure(&psi),
            ..result
        };
        assert!(infidelity(&exact, &psi).unwrap() < 1e-12);
    }

    #[test]
    fn single_qubit_fuzzy_reconstruction_is_close() {
        let mut rng = ChaCha20Rng::seed_from_u64(17);
        let psi = haar_random_pure_state(1, &mut rng).unwrap();
        let rho = DensityMatrix::from_pure(&psi);
        let rows = pauli_protocol(1, &FuzzyQubitPovm::new(0.1, 0.05).unwrap(), 100_000).unwrap();
        let record = simulate_record(&rho, &rows, &mut rng).unwrap();
        for solver in [Solver::Newton, Solver::FixedPoint] {
            let config = ReconstructionConfig {
                solver,
                record_history: true,
                max_iterations: 20_000,
                ..Default::default()
            };
            let result = reconstruct(&record, &rows, &config).unwrap();
            assert!(infidelity(&result, &psi).unwrap() < 1e-2, "{solver:?}");
            assert!(result.history.windows(2).all(|w| w[1] >= w[0]));
            let direct = log_likelihood(&result.rho_hat, &record, &rows).unwrap();
            assert!((direct - result.log_likelihood).abs() < 1e-6 * direct.abs());
        }
        let p = outcome_probabilities(&rho, &rows[0]).unwrap();
        assert_eq!(p.len(), 2);
    }
}
