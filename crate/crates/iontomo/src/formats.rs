//! On-disk layouts: JSON for every report and library value, CSV for tables.
//!
//! JSON numbers are written in shortest round-trip form, so reading a file
//! back gives bit-identical values. CSV and terminal output go through
//! [`format_sig`] with a chosen number of significant digits.

use std::fs;
use std::io::Write;
use std::path::Path;

use iontomo_core::measurement::{parse_bases, CountRecord, FuzzyQubitPovm, ProtocolRow};
use iontomo_core::photon_stats::{CountDistribution, FluorescenceParams};
use iontomo_core::quantum::{C64, CMatrix, DensityMatrix, PureState};
use iontomo_core::tomography::ReconstructionResult;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Count distribution as `{"k_max", "pmf", "tail_mass", "params"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionTable {
    pub k_max: usize,
    pub pmf: Vec<f64>,
    pub tail_mass: f64,
    pub params: FluorescenceParams,
}

impl DistributionTable {
    pub fn new(dist: &CountDistribution, params: FluorescenceParams) -> Self {
        Self {
            k_max: dist.k_max(),
            pmf: dist.pmf().to_vec(),
            tail_mass: dist.tail_mass(),
            params,
        }
    }

    pub fn to_distribution(&self) -> Result<CountDistribution> {
        if self.pmf.len() != self.k_max + 1 {
            return Err(Error::Config(format!(
                "k_max = {} but pmf has {} entries",
                self.k_max,
                self.pmf.len()
            )));
        }
        Ok(CountDistribution::from_pmf(self.pmf.clone())?)
    }
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

/// Density matrix as row-major nested `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrixFile {
    pub n_qubits: usize,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl From<&DensityMatrix> for DensityMatrixFile {
    fn from(rho: &DensityMatrix) -> Self {
        let m = rho.matrix();
        Self {
            n_qubits: rho.n_qubits(),
            matrix: (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| pair(m[(i, j)])).collect())
                .collect(),
        }
    }
}

impl DensityMatrixFile {
    pub fn to_density_matrix(&self) -> Result<DensityMatrix> {
        let dim = 1usize << self.n_qubits;
        if self.matrix.len() != dim || self.matrix.iter().any(|row| row.len() != dim) {
            return Err(Error::Config(format!(
                "density matrix for {} qubits must be {dim}x{dim}",
                self.n_qubits
            )));
        }
        let m = CMatrix::from_fn(dim, dim, |i, j| {
            let [re, im] = self.matrix[i][j];
            C64::new(re, im)
        });
        Ok(DensityMatrix::new(m)?)
    }
}

/// Pure state as a list of `[re, im]` amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PureStateFile {
    pub n_qubits: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

impl From<&PureState> for PureStateFile {
    fn from(psi: &PureState) -> Self {
        Self {
            n_qubits: psi.n_qubits(),
            amplitudes: psi.amplitudes().iter().map(|&z| pair(z)).collect(),
        }
    }
}

impl PureStateFile {
    pub fn to_state(&self) -> Result<PureState> {
        if self.amplitudes.len() != 1 << self.n_qubits {
            return Err(Error::Config(format!(
                "{} amplitudes do not fit {} qubits",
                self.amplitudes.len(),
                self.n_qubits
            )));
        }
        Ok(PureState::new(
            self.amplitudes.iter().map(|&[re, im]| C64::new(re, im)).collect(),
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowCounts {
    pub basis: String,
    pub counts: Vec<u64>,
}

/// Count record of a Pauli-basis experiment with one readout model shared by
/// all qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountRecordFile {
    pub rows: Vec<RowCounts>,
    pub shots_per_basis: u64,
    pub error_model: FuzzyQubitPovm,
}

impl CountRecordFile {
    pub fn new(record: &CountRecord, protocol: &[ProtocolRow], error_model: FuzzyQubitPovm) -> Result<Self> {
        record.validate(protocol)?;
        let shots_per_basis = protocol.first().map_or(0, |row| row.shots());
        if protocol.iter().any(|row| row.shots() != shots_per_basis) {
            return Err(Error::Config("rows differ in their number of shots".into()));
        }
        Ok(Self {
            rows: protocol
                .iter()
                .zip(&record.counts)
                .map(|(row, counts)| RowCounts {
                    basis: row.label(),
                    counts: counts.clone(),
                })
                .collect(),
            shots_per_basis,
            error_model,
        })
    }

    /// Rebuilds the record together with the protocol it was taken under.
    pub fn to_parts(&self) -> Result<(CountRecord, Vec<ProtocolRow>)> {
        let protocol = self
            .rows
            .iter()
            .map(|row| {
                let bases = parse_bases(&row.basis)?;
                let povms = vec![self.error_model; bases.len()];
                ProtocolRow::new(&bases, &povms, self.shots_per_basis)
            })
            .collect::<iontomo_core::Result<Vec<_>>>()?;
        let record = CountRecord {
            counts: self.rows.iter().map(|row| row.counts.clone()).collect(),
        };
        record.validate(&protocol)?;
        Ok((record, protocol))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionFile {
    pub rho_hat: DensityMatrixFile,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    pub floored_outcomes: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub history: Vec<f64>,
}

impl From<&ReconstructionResult> for ReconstructionFile {
    fn from(result: &ReconstructionResult) -> Self {
        Self {
            rho_hat: (&result.rho_hat).into(),
            log_likelihood: result.log_likelihood,
            iterations: result.iterations,
            converged: result.converged,
            floored_outcomes: result.floored_outcomes,
            history: result.history.clone(),
        }
    }
}

impl ReconstructionFile {
    pub fn to_result(&self) -> Result<ReconstructionResult> {
        Ok(ReconstructionResult {
            rho_hat: self.rho_hat.to_density_matrix()?,
            log_likelihood: self.log_likelihood,
            iterations: self.iterations,
            converged: self.converged,
            floored_outcomes: self.floored_outcomes,
            history: self.history.clone(),
        })
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = to_json(value)?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json(&text)
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(bytes).map_err(|e| Error::io(path, e))
}

/// Builds a CSV document from a header and string rows.
pub fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(&row)?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Config(e.to_string()))
}

/// `x` rounded to `digits` significant digits, `%g`-style: positional for
/// exponents in `[-4, digits)`, scientific with a two-digit exponent otherwise.
pub fn format_sig(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if (-4..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        format!("{:.*}", decimals, x)
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    }
}
