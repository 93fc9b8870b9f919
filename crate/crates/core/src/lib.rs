#![no_std]
//! Readout statistics and fuzzy-measurement tomography for fluorescent ion qubits.
//!
//! * [`photon_stats`] models the photon counts of bright and dark ions and
//!   turns a count threshold into readout error probabilities.
//! * [`quantum`] holds dense multi-qubit states, density matrices and helpers.
//! * [`measurement`] builds fuzzy POVMs and the Pauli-basis protocol and
//!   samples measurement records.
//! * [`tomography`] reconstructs density matrices by maximum likelihood under
//!   either the fuzzy or the ideal-projector measurement model.
//!
//! The crate is `no_std` and only needs `alloc`.

// `!(x > 0.0)` is how parameter checks reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod measurement;
pub mod photon_stats;
pub mod quantum;
pub mod seed;
pub mod special;
pub mod tomography;

pub use error::{Error, Result};
