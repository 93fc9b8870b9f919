use alloc::vec::Vec;

use nalgebra::{DVector, SymmetricEigen};

use super::objective::{from_real, to_real, Objective};
use crate::quantum::{hermitian_eigen, CMatrix, DensityMatrix};

/// Stopping thresholds shared by both iterations.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Stopping {
    pub max_iterations: usize,
    /// Log-likelihood gain per shot below which an iteration counts as stalled.
    pub gain_per_shot: f64,
    /// Trace-distance step below which an iteration counts as stalled.
    pub step: f64,
}

pub(crate) struct Trajectory {
    pub factor: CMatrix,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<f64>,
}

/// Smallest step fraction tried by the backtracking searches.
const MIN_STEP_FRACTION: f64 = 1e-14;

fn normalized(mut factor: CMatrix) -> CMatrix {
    let norm = factor.norm();
    factor.unscale_mut(norm);
    factor
}

fn density_of(factor: &CMatrix) -> CMatrix {
    let mut m = factor * factor.adjoint();
    let tr = m.trace().re;
    m.unscale_mut(tr);
    m
}

fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let (values, _) = hermitian_eigen(&(a - b));
    0.5 * values.iter().map(|v| v.abs()).sum::<f64>()
}

/// Shared driver: `propose` returns the next factor (already known to not
/// decrease the likelihood) and its value, or `None` when no ascent step exists.
fn iterate<F>(objective: &Objective, start: CMatrix, stopping: Stopping, record: bool, mut propose: F) -> Trajectory
where
    F: FnMut(&CMatrix, f64) -> Option<(CMatrix, f64)>,
{
    let shots = objective.total_count().max(1.0);
    let mut factor = normalized(start);
    let mut value = objective.value(&factor);
    let mut rho = density_of(&factor);
    let mut history = Vec::new();
    if record {
        history.push(value);
    }
    for iteration in 1..=stopping.max_iterations {
        let Some((next, next_value)) = propose(&factor, value) else {
            // No ascent direction left at working precision.
            return Trajectory {
                factor,
                value,
                iterations: iteration - 1,
                converged: true,
                history,
            };
        };
        debug_assert!(
            next_value >= value - 1e-9 * value.abs().max(1.0),
            "log-likelihood decreased from {value} to {next_value}"
        );
        let next = normalized(next);
        let next_rho = density_of(&next);
        let gain = next_value - value;
        let step = trace_distance(&rho, &next_rho);
        factor = next;
        value = next_value;
        rho = next_rho;
        if record {
            history.push(value);
        }
        if gain < stopping.gain_per_shot * shots && step < stopping.step {
            return Trajectory {
                factor,
                value,
                iterations: iteration,
                converged: true,
                history,
            };
        }
    }
    Trajectory {
        factor,
        value,
        iterations: stopping.max_iterations,
        converged: false,
        history,
    }
}

/// Diluted fixed-point iteration of the likelihood stationarity condition
/// `R ρ = N ρ`: `A ← A + ε (R/N − I) A`, with `ε = 1` (the undiluted map)
/// halved until the likelihood does not decrease.
pub(crate) fn fixed_point(objective: &Objective, start: CMatrix, stopping: Stopping, record: bool) -> Trajectory {
    iterate(objective, start, stopping, record, |factor, value| {
        let eval = objective.evaluate(factor);
        if eval.active_count <= 0.0 {
            return None;
        }
        let direction = (&eval.r_operator * factor).unscale(eval.active_count) - factor;
        let mut eps = 1.0;
        while eps >= MIN_STEP_FRACTION {
            let candidate = factor + direction.scale(eps);
            let candidate_value = objective.value(&candidate);
            if candidate_value >= value {
                return Some((candidate, candidate_value));
            }
            eps *= 0.5;
        }
        None
    })
}

/// Newton ascent on the real parameters of `A`.
///
/// The Hessian's eigenvalues are replaced by their magnitudes (floored at
/// `1e-9·N`) so the step always points uphill, then a backtracking search
/// halves it until the likelihood does not decrease.
pub(crate) fn newton(objective: &Objective, start: CMatrix, stopping: Stopping, record: bool) -> Trajectory {
    let rows = start.nrows();
    let cols = start.ncols();
    iterate(objective, start, stopping, record, |factor, value| {
        let eval = objective.evaluate(factor);
        if eval.active_count <= 0.0 {
            return None;
        }
        let gradient = objective.gradient(factor, &eval);
        let hessian = objective.hessian(factor, &eval);
        let eig = SymmetricEigen::new(-hessian);
        let floor = 1e-9 * eval.active_count;
        let projected = eig.eigenvectors.transpose() * &gradient;
        let scaled = DVector::from_iterator(
            projected.len(),
            projected.iter().zip(eig.eigenvalues.iter()).map(|(p, e)| p / e.abs().max(floor)),
        );
        let delta = &eig.eigenvectors * scaled;
        let x = to_real(factor);
        let mut t = 1.0;
        while t >= MIN_STEP_FRACTION {
            let candidate = from_real(&(&x + delta.scale(t)), rows, cols);
            let candidate_value = objective.value(&candidate);
            if candidate_value >= value && candidate_value.is_finite() {
                return Some((candidate, candidate_value));
            }
            t *= 0.5;
        }
        None
    })
}

/// Factor of rank `rank` built from the leading eigenpairs of `rho`.
pub(crate) fn leading_factor(rho: &DensityMatrix, rank: usize) -> CMatrix {
    let (values, vectors) = rho.eigen();
    let d = values.len();
    CMatrix::from_fn(d, rank, |r, c| {
        let idx = d - 1 - c;
        vectors[(r, idx)].scale(libm::sqrt(values[idx].max(1e-12)))
    })
}
