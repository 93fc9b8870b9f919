//! Log-likelihood as a function of the root factor `A` of `ρ = AA†/tr(AA†)`.
//!
//! The factor is handled as a real vector `x = [Re vec A; Im vec A]` with
//! columns of `A` stacked. For Hermitian `Λ`, `tr(ΛAA†) = xᵀ Λ_R x` where
//! `Λ_R = [[Re Λ', −Im Λ'], [Im Λ', Re Λ']]` and `Λ' = I_r ⊗ Λ`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::quantum::{CMatrix, C64};

/// Outcome probabilities below this are raised to it before taking the log.
pub const PROBABILITY_FLOOR: f64 = 1e-15;

pub(crate) struct Outcome {
    pub op: CMatrix,
    pub count: f64,
}

/// Observed outcomes with nonzero counts; the others do not enter the likelihood.
pub(crate) struct Objective {
    outcomes: Vec<Outcome>,
    dim: usize,
}

pub(crate) struct Evaluation {
    pub value: f64,
    /// `Σ n_i` over outcomes above the floor.
    pub active_count: f64,
    /// `Σ (n_i / q_i) Λ_i` over outcomes above the floor, `q_i = tr(Λ_i AA†)`.
    pub r_operator: CMatrix,
    pub floored: usize,
}

impl Objective {
    pub fn new(outcomes: Vec<Outcome>, dim: usize) -> Self {
        Self { outcomes, dim }
    }

    pub fn total_count(&self) -> f64 {
        self.outcomes.iter().map(|o| o.count).sum()
    }

    fn unnormalized(&self, factor: &CMatrix, op: &CMatrix) -> f64 {
        let la = op * factor;
        factor.iter().zip(la.iter()).map(|(a, b)| a.re * b.re + a.im * b.im).sum()
    }

    /// Log-likelihood only.
    pub fn value(&self, factor: &CMatrix) -> f64 {
        let s = factor.norm_squared();
        self.outcomes
            .iter()
            .map(|o| o.count * libm::log((self.unnormalized(factor, &o.op) / s).max(PROBABILITY_FLOOR)))
            .sum()
    }

    pub fn evaluate(&self, factor: &CMatrix) -> Evaluation {
        let s = factor.norm_squared();
        let mut value = 0.0;
        let mut active_count = 0.0;
        let mut floored = 0;
        let mut r_operator = CMatrix::zeros(self.dim, self.dim);
        for o in &self.outcomes {
            let q = self.unnormalized(factor, &o.op);
            if q / s > PROBABILITY_FLOOR {
                value += o.count * libm::log(q / s);
                active_count += o.count;
                r_operator += o.op.scale(o.count / q);
            } else {
                value += o.count * libm::log(PROBABILITY_FLOOR);
                floored += 1;
            }
        }
        Evaluation {
            value,
            active_count,
            r_operator,
            floored,
        }
    }

    /// Gradient with respect to the real parameter vector.
    pub fn gradient(&self, factor: &CMatrix, eval: &Evaluation) -> DVector<f64> {
        let s = factor.norm_squared();
        let ra = &eval.r_operator * factor;
        let mut g = to_real(&ra).scale(2.0);
        g.axpy(-2.0 * eval.active_count / s, &to_real(factor), 1.0);
        g
    }

    /// Hessian with respect to the real parameter vector.
    pub fn hessian(&self, factor: &CMatrix, eval: &Evaluation) -> DMatrix<f64> {
        let s = factor.norm_squared();
        let x = to_real(factor);
        let n = x.len();
        let mut h = realify_columnwise(&eval.r_operator, factor.ncols()).scale(2.0);
        for o in &self.outcomes {
            let la = &o.op * factor;
            let q: f64 = factor.iter().zip(la.iter()).map(|(a, b)| a.re * b.re + a.im * b.im).sum();
            if q / s <= PROBABILITY_FLOOR {
                continue;
            }
            let m = to_real(&la);
            h.ger(-4.0 * o.count / (q * q), &m, &m, 1.0);
        }
        let big_n = eval.active_count;
        for i in 0..n {
            h[(i, i)] -= 2.0 * big_n / s;
        }
        h.ger(4.0 * big_n / (s * s), &x, &x, 1.0);
        h
    }
}

pub(crate) fn to_real(a: &CMatrix) -> DVector<f64> {
    let m = a.len();
    let mut x = DVector::zeros(2 * m);
    // nalgebra storage is column-major, which is the stacking order.
    for (idx, z) in a.iter().enumerate() {
        x[idx] = z.re;
        x[m + idx] = z.im;
    }
    x
}

pub(crate) fn from_real(x: &DVector<f64>, rows: usize, cols: usize) -> CMatrix {
    let m = rows * cols;
    CMatrix::from_iterator(rows, cols, (0..m).map(|idx| C64::new(x[idx], x[m + idx])))
}

/// Real form of `I_cols ⊗ op`.
fn realify_columnwise(op: &CMatrix, cols: usize) -> DMatrix<f64> {
    let d = op.nrows();
    let m = d * cols;
    let mut out = DMatrix::zeros(2 * m, 2 * m);
    for c in 0..cols {
        let base = c * d;
        for i in 0..d {
            for j in 0..d {
                let z = op[(i, j)];
                out[(base + i, base + j)] = z.re;
                out[(base + i, m + base + j)] = -z.im;
                out[(m + base + i, base + j)] = z.im;
                out[(m + base + i, m + base + j)] = z.re;
            }
        }
    }
    out
}
