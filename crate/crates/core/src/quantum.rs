//! Dense multi-qubit states and operators.
//!
//! Qubit 0 is the most significant bit of a basis index, so `tensor_product`
//! lists factors in qubit order.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Error, Result};

pub type C64 = nalgebra::Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const NORM_TOL: f64 = 1e-12;
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_FLOOR: f64 = -1e-9;
pub const UNITARY_TOL: f64 = 1e-10;

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(domain!("dimension {dim} is not a power of two >= 2"));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Normalized state vector on `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
    n_qubits: usize,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let n_qubits = qubits_for_dim(amplitudes.len())?;
        let amplitudes = CVector::from_vec(amplitudes);
        let norm_sqr = amplitudes.norm_squared();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::Invariant(alloc::format!("state norm² is {norm_sqr}, expected 1")));
        }
        Ok(Self { amplitudes, n_qubits })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let mut v = CVector::from_vec(amplitudes);
        let norm = v.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(domain!("cannot normalize a vector of norm {norm}"));
        }
        v.unscale_mut(norm);
        Self::new(v.data.into())
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if n_qubits == 0 || index >= dim {
            return Err(domain!("basis state {index} does not exist on {n_qubits} qubits"));
        }
        let mut v = alloc::vec![C64::new(0.0, 0.0); dim];
        v[index] = C64::new(1.0, 0.0);
        Self::new(v)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    /// `|ψ⟩⟨ψ|`
    pub fn projector(&self) -> CMatrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    n_qubits: usize,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity (down to [`PSD_FLOOR`]).
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(domain!("density matrix must be square, got {}x{}", matrix.nrows(), matrix.ncols()));
        }
        let n_qubits = qubits_for_dim(matrix.nrows())?;
        let asymmetry = (&matrix - matrix.adjoint()).iter().fold(0.0f64, |m, z| m.max(libm::hypot(z.re, z.im)));
        if asymmetry > HERMITIAN_TOL {
            return Err(Error::Invariant(alloc::format!("matrix is not Hermitian (deviation {asymmetry})")));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::Invariant(alloc::format!("trace is {trace}, expected 1")));
        }
        let rho = Self { matrix, n_qubits };
        let min_eig = rho.min_eigenvalue();
        if min_eig < PSD_FLOOR {
            return Err(Error::Invariant(alloc::format!("minimum eigenvalue {min_eig} is negative")));
        }
        Ok(rho)
    }

    /// Builds `A·A† / tr(A·A†)`, positive by construction.
    pub fn from_factor(factor: &CMatrix) -> Result<Self> {
        let mut m = factor * factor.adjoint();
        let trace = m.trace().re;
        if !(trace > 0.0) || !trace.is_finite() {
            return Err(domain!("factor has zero or non-finite Frobenius norm"));
        }
        m.unscale_mut(trace);
        hermitize(&mut m);
        let n_qubits = qubits_for_dim(m.nrows())?;
        Ok(Self { matrix: m, n_qubits })
    }

    pub fn from_pure(state: &PureState) -> Self {
        Self {
            matrix: state.projector(),
            n_qubits: state.n_qubits,
        }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(domain!("need at least one qubit"));
        }
        let dim = 1usize << n_qubits;
        Ok(Self {
            matrix: CMatrix::identity(dim, dim).unscale(dim as f64),
            n_qubits,
        })
    }

    /// Convex combination `w·self + (1 − w)·other`.
    pub fn mix(&self, other: &Self, w: f64) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        if !(0.0..=1.0).contains(&w) {
            return Err(domain!("mixing weight {w} outside [0, 1]"));
        }
        Ok(Self {
            matrix: self.matrix.scale(w) + other.matrix.scale(1.0 - w),
            n_qubits: self.n_qubits,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Eigenvalues in ascending order with matching eigenvectors as columns.
    pub fn eigen(&self) -> (Vec<f64>, CMatrix) {
        hermitian_eigen(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigen().0[0]
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Half the trace norm of the difference.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let diff = &self.matrix - &other.matrix;
        let (values, _) = hermitian_eigen(&diff);
        Ok(0.5 * values.iter().map(|v| v.abs()).sum::<f64>())
    }

    /// Negative eigenvalues clipped to zero and the trace restored.
    ///
    /// Intended for reporting; the solvers never call it.
    pub fn clipped(&self) -> Self {
        let (values, vectors) = self.eigen();
        let clipped: Vec<f64> = values.iter().map(|v| v.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        let diag = CMatrix::from_diagonal(&CVector::from_iterator(
            clipped.len(),
            clipped.iter().map(|v| C64::new(v / total, 0.0)),
        ));
        let mut m = &vectors * diag * vectors.adjoint();
        hermitize(&mut m);
        Self {
            matrix: m,
            n_qubits: self.n_qubits,
        }
    }
}

/// Square matrix with `U†U = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    matrix: CMatrix,
}

impl Unitary {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(domain!("unitary must be square"));
        }
        let dim = matrix.nrows();
        let defect = matrix.adjoint() * &matrix - CMatrix::identity(dim, dim);
        // Spectral norm of the Hermitian defect.
        let (values, _) = hermitian_eigen(&defect);
        let norm = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if norm > UNITARY_TOL {
            return Err(Error::Invariant(alloc::format!("U†U deviates from identity by {norm}")));
        }
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `U† A U`
    pub fn conjugate(&self, op: &CMatrix) -> CMatrix {
        self.matrix.adjoint() * op * &self.matrix
    }
}

/// Draws a pure state from the Haar measure: an i.i.d. standard complex
/// Gaussian vector, normalized.
pub fn haar_random_pure_state<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<PureState> {
    if n_qubits == 0 || n_qubits > 16 {
        return Err(domain!("Haar sampling supports 1..=16 qubits, got {n_qubits}"));
    }
    let dim = 1usize << n_qubits;
    let amplitudes: Vec<C64> = (0..dim)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im)
        })
        .collect();
    PureState::normalized(amplitudes)
}

/// `⟨ψ|ρ|ψ⟩`, clamped to `[0, 1]`.
pub fn fidelity(rho: &DensityMatrix, psi: &PureState) -> Result<f64> {
    if rho.dim() != psi.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: psi.dim(),
        });
    }
    let v = psi.amplitudes();
    let value = (v.adjoint() * rho.matrix() * v)[(0, 0)].re;
    Ok(value.clamp(0.0, 1.0))
}

/// Kronecker product of the factors in list order.
pub fn tensor_product(ops: &[CMatrix]) -> Result<CMatrix> {
    let (first, rest) = ops
        .split_first()
        .ok_or_else(|| domain!("tensor product of an empty list"))?;
    if let Some(bad) = ops.iter().find(|m| !m.is_square()) {
        return Err(domain!("tensor factors must be square, got {}x{}", bad.nrows(), bad.ncols()));
    }
    Ok(rest.iter().fold(first.clone(), |acc, m| acc.kronecker(m)))
}

/// Eigen-decomposition of a Hermitian matrix, ascending eigenvalues.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Replaces `m` by `(m + m†)/2`.
pub(crate) fn hermitize(m: &mut CMatrix) {
    let adj = m.adjoint();
    *m += adj;
    m.scale_mut(0.5);
}

/// Pauli and basis-change matrices on one qubit.
pub mod gates {
    use super::{CMatrix, C64};

    pub fn identity() -> CMatrix {
        CMatrix::identity(2, 2)
    }

    pub fn pauli_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
    }

    pub fn pauli_y() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
    }

    pub fn pauli_z() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
    }

    pub fn hadamard() -> CMatrix {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        CMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)])
    }

    /// `S† = diag(1, −i)`
    pub fn phase_dagger() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0)])
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }
}
