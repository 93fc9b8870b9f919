//! Readout-statistics studies, tomography benchmarks and the `iontomo` CLI,
//! built on the numerics in [`iontomo_core`].
//!
//! - [`bench`] runs the distribution study (count tables, threshold, error
//!   rates) and the ensemble benchmark of fuzzy against standard
//!   reconstruction, parallel over states.
//! - [`formats`] holds the JSON and CSV layouts.
//! - [`cli`] is the argument parser and dispatcher behind the binary.

pub mod bench;
pub mod cli;
pub mod error;
pub mod formats;

pub use error::{Error, Result};
