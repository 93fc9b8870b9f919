//! Fuzzy readout operators, the Pauli-basis protocol and count sampling.
//!
//! A threshold readout with error probabilities `p₁₀` (true 0 read as 1) and
//! `p₀₁` (true 1 read as 0) is described by the POVM
//!
//! ```text
//! Λ₀ = (1 − p₁₀)|0⟩⟨0| + p₀₁|1⟩⟨1|
//! Λ₁ = p₁₀|0⟩⟨0| + (1 − p₀₁)|1⟩⟨1|
//! ```
//!
//! Measuring in another basis applies a unitary `U` before readout, which
//! turns each element into `U†ΛU`.
//!
//! Basis conventions, per qubit:
//!
//! | basis | `U`                         | maps to `|0⟩` |
//! |-------|-----------------------------|---------------|
//! | X     | `H`                         | `|+⟩`         |
//! | Y     | `H·S†`, `S† = diag(1, −i)`  | `|+i⟩`        |
//! | Z     | `I`                         | `|0⟩`         |

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{domain, Error, Result};
use crate::photon_stats::ReadoutErrorModel;
use crate::quantum::{gates, hermitize, tensor_product, CMatrix, DensityMatrix, Unitary, C64};

/// Two-outcome readout POVM of one qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FuzzyQubitPovm {
    pub p10: f64,
    pub p01: f64,
}

impl FuzzyQubitPovm {
    pub fn new(p10: f64, p01: f64) -> Result<Self> {
        for (name, p) in [("p10", p10), ("p01", p01)] {
            if !(0.0..1.0).contains(&p) {
                return Err(domain!("{name} must lie in [0, 1), got {p}"));
            }
        }
        Ok(Self { p10, p01 })
    }

    /// Error-free readout: the computational projectors.
    pub fn ideal() -> Self {
        Self { p10: 0.0, p01: 0.0 }
    }

    pub fn from_error_model(model: &ReadoutErrorModel) -> Result<Self> {
        Self::new(model.p10, model.p01)
    }

    /// `[Λ₀, Λ₁]`; the diagonals add to exactly one.
    pub fn elements(&self) -> [CMatrix; 2] {
        let diag = |a: f64, b: f64| {
            CMatrix::from_row_slice(2, 2, &[C64::new(a, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(b, 0.0)])
        };
        [
            diag(1.0 - self.p10, self.p01),
            diag(self.p10, 1.0 - self.p01),
        ]
    }
}

/// Single-qubit measurement basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::X, Basis::Y, Basis::Z];

    /// Rotation applied before a computational-basis readout.
    pub fn unitary(self) -> CMatrix {
        match self {
            Basis::X => gates::hadamard(),
            Basis::Y => gates::hadamard() * gates::phase_dagger(),
            Basis::Z => gates::identity(),
        }
    }

    pub fn label(self) -> char {
        match self {
            Basis::X => 'X',
            Basis::Y => 'Y',
            Basis::Z => 'Z',
        }
    }

    pub fn from_label(c: char) -> Result<Self> {
        match c {
            'X' | 'x' => Ok(Basis::X),
            'Y' | 'y' => Ok(Basis::Y),
            'Z' | 'z' => Ok(Basis::Z),
            other => Err(domain!("unknown basis label {other:?}")),
        }
    }
}

/// Parses a basis string such as `"XZ"`.
pub fn parse_bases(label: &str) -> Result<Vec<Basis>> {
    label.chars().map(Basis::from_label).collect()
}

pub fn bases_label(bases: &[Basis]) -> String {
    bases.iter().map(|b| b.label()).collect()
}

/// One measurement setting: the basis rotation, its `2ⁿ` outcome operators
/// and the number of shots spent on it.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolRow {
    bases: Vec<Basis>,
    unitary: Unitary,
    operators: Vec<CMatrix>,
    shots: u64,
}

impl ProtocolRow {
    /// Builds the row for `bases` (one per qubit) with readout POVMs `povms`
    /// (one per qubit). Outcome `i` has qubit 0 as its most significant bit.
    pub fn new(bases: &[Basis], povms: &[FuzzyQubitPovm], shots: u64) -> Result<Self> {
        if bases.is_empty() {
            return Err(domain!("a protocol row needs at least one qubit"));
        }
        if povms.len() != bases.len() {
            return Err(Error::DimensionMismatch {
                expected: bases.len(),
                found: povms.len(),
            });
        }
        let rotations: Vec<CMatrix> = bases.iter().map(|b| b.unitary()).collect();
        // U†ΛU per qubit, then tensor: identical to conjugating the tensor
        // product by the tensor product of rotations.
        let local: Vec<[CMatrix; 2]> = rotations
            .iter()
            .zip(povms)
            .map(|(u, povm)| {
                povm.elements().map(|lam| {
                    let mut m = u.adjoint() * lam * u;
                    hermitize(&mut m);
                    m
                })
            })
            .collect();
        let n = bases.len();
        let mut operators = Vec::with_capacity(1 << n);
        for outcome in 0..(1usize << n) {
            let factors: Vec<CMatrix> = (0..n)
                .map(|q| local[q][(outcome >> (n - 1 - q)) & 1].clone())
                .collect();
            operators.push(tensor_product(&factors)?);
        }
        let unitary = Unitary::new(tensor_product(&rotations)?)?;
        Ok(Self {
            bases: bases.to_vec(),
            unitary,
            operators,
            shots,
        })
    }

    pub fn bases(&self) -> &[Basis] {
        &self.bases
    }

    pub fn label(&self) -> String {
        bases_label(&self.bases)
    }

    pub fn unitary(&self) -> &Unitary {
        &self.unitary
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn n_qubits(&self) -> usize {
        self.bases.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.bases.len()
    }
}

/// All `3ⁿ` Pauli-basis settings, in lexicographic X < Y < Z order with qubit 0
/// varying slowest, all using the same readout POVM.
pub fn pauli_protocol(n_qubits: usize, povm: &FuzzyQubitPovm, shots_per_basis: u64) -> Result<Vec<ProtocolRow>> {
    if n_qubits == 0 {
        return Err(domain!("protocol needs at least one qubit"));
    }
    pauli_protocol_per_qubit(&vec![*povm; n_qubits], shots_per_basis)
}

/// As [`pauli_protocol`] with a separate readout POVM for every qubit.
pub fn pauli_protocol_per_qubit(povms: &[FuzzyQubitPovm], shots_per_basis: u64) -> Result<Vec<ProtocolRow>> {
    let n = povms.len();
    if n == 0 {
        return Err(domain!("protocol needs at least one qubit"));
    }
    if n > 8 {
        return Err(domain!("Pauli protocol supports at most 8 qubits, got {n}"));
    }
    if shots_per_basis == 0 {
        return Err(domain!("shots per basis must be at least 1"));
    }
    let settings = 3usize.pow(n as u32);
    (0..settings)
        .map(|mut code| {
            let mut bases = vec![Basis::X; n];
            for q in (0..n).rev() {
                bases[q] = Basis::ALL[code % 3];
                code /= 3;
            }
            ProtocolRow::new(&bases, povms, shots_per_basis)
        })
        .collect()
}

/// `Re tr(ρΛ)` for Hermitian `Λ`.
pub(crate) fn expectation(rho: &CMatrix, op: &CMatrix) -> f64 {
    // tr(ρΛ) = Σ_ij ρ_ij Λ_ji
    let mut acc = 0.0;
    for i in 0..rho.nrows() {
        for j in 0..rho.ncols() {
            let a = rho[(i, j)];
            let b = op[(j, i)];
            acc += a.re * b.re - a.im * b.im;
        }
    }
    acc
}

/// Born probabilities `tr(ρΛᵢ)` of one setting, clipped to `[0, 1]`.
pub fn outcome_probabilities(rho: &DensityMatrix, row: &ProtocolRow) -> Result<Vec<f64>> {
    if rho.dim() != row.dim() {
        return Err(Error::DimensionMismatch {
            expected: row.dim(),
            found: rho.dim(),
        });
    }
    Ok(row
        .operators()
        .iter()
        .map(|op| expectation(rho.matrix(), op).clamp(0.0, 1.0))
        .collect())
}

/// Multinomial draw of `shots` outcomes by sequential binomial conditioning.
pub fn sample_counts<R: Rng + ?Sized>(probabilities: &[f64], shots: u64, rng: &mut R) -> Result<Vec<u64>> {
    if probabilities.is_empty() {
        return Err(domain!("empty probability vector"));
    }
    if let Some(p) = probabilities.iter().find(|p| !(**p >= 0.0 && **p <= 1.0)) {
        return Err(domain!("probability {p} outside [0, 1]"));
    }
    let total: f64 = probabilities.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(domain!("probabilities sum to {total}, expected 1"));
    }
    let mut counts = vec![0u64; probabilities.len()];
    let mut remaining = shots;
    let mut remaining_mass = total;
    let last = probabilities.len() - 1;
    for (i, &p) in probabilities.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i == last {
            counts[i] = remaining;
            break;
        }
        let conditional = if remaining_mass > 0.0 { (p / remaining_mass).clamp(0.0, 1.0) } else { 0.0 };
        let draw = Binomial::new(remaining, conditional)
            .map_err(|e| domain!("binomial sampling failed: {e}"))?
            .sample(rng);
        counts[i] = draw;
        remaining -= draw;
        remaining_mass -= p;
    }
    Ok(counts)
}

/// Observed counts per protocol row, one entry per outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CountRecord {
    pub counts: Vec<Vec<u64>>,
}

impl CountRecord {
    /// Checks that the record has one row per setting, `2ⁿ` outcomes per row,
    /// and that each row sums to that setting's shots.
    pub fn validate(&self, protocol: &[ProtocolRow]) -> Result<()> {
        if self.counts.len() != protocol.len() {
            return Err(Error::DimensionMismatch {
                expected: protocol.len(),
                found: self.counts.len(),
            });
        }
        for (row_counts, row) in self.counts.iter().zip(protocol) {
            if row_counts.len() != row.operators().len() {
                return Err(Error::DimensionMismatch {
                    expected: row.operators().len(),
                    found: row_counts.len(),
                });
            }
            let total: u64 = row_counts.iter().sum();
            if total != row.shots() {
                return Err(domain!(
                    "row {} has {total} counts but {} shots",
                    row.label(),
                    row.shots()
                ));
            }
        }
        Ok(())
    }

    pub fn total_shots(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

/// Samples a full record for `rho` under `protocol`.
pub fn simulate_record<R: Rng + ?Sized>(rho: &DensityMatrix, protocol: &[ProtocolRow], rng: &mut R) -> Result<CountRecord> {
    let counts = protocol
        .iter()
        .map(|row| {
            let mut probs = outcome_probabilities(rho, row)?;
            let total: f64 = probs.iter().sum();
            probs.iter_mut().for_each(|p| *p /= total);
            sample_counts(&probs, row.shots(), rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CountRecord { counts })
}
