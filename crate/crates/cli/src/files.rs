//! JSON state and observable files.
//!
//! ```json
//! { "dim": 2, "amplitudes": [[1, 0], [0, 0]] }
//! { "dim": 2, "matrix": [[0, 0], [1, 0], [1, 0], [0, 0]], "label": "σx" }
//! ```
//!
//! Complex numbers are `[re, im]` pairs; matrices are row-major. State
//! amplitudes are rescaled to unit norm on load.

use std::path::Path;

use serde::Deserialize;
use tsvsim::hilbert::spectral_decompose;
use tsvsim::{LinearOperator, Observable, StateVector, C64};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    dim: usize,
    amplitudes: Vec<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObservableFile {
    dim: usize,
    matrix: Vec<[f64; 2]>,
    #[serde(default)]
    label: Option<String>,
}

fn complex(pairs: &[[f64; 2]]) -> Vec<C64> {
    pairs.iter().map(|&[re, im]| C64::new(re, im)).collect()
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

pub fn parse_state(text: &str) -> Result<StateVector, CliError> {
    let file: StateFile =
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("invalid state file: {e}")))?;
    if file.amplitudes.len() != file.dim {
        return Err(CliError::Usage(format!(
            "state declares dim {} but has {} amplitudes",
            file.dim,
            file.amplitudes.len()
        )));
    }
    StateVector::normalized(complex(&file.amplitudes)).map_err(|e| CliError::Usage(format!("invalid state: {e}")))
}

pub fn parse_observable(text: &str) -> Result<Observable, CliError> {
    let file: ObservableFile =
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("invalid observable file: {e}")))?;
    let op = LinearOperator::from_row_major(file.dim, complex(&file.matrix))
        .map_err(|e| CliError::Usage(format!("invalid observable: {e}")))?;
    spectral_decompose(&op, file.label.unwrap_or_else(|| "A".into()))
        .map_err(|e| CliError::Usage(format!("invalid observable: {e}")))
}

pub fn load_state(path: &Path) -> Result<StateVector, CliError> {
    parse_state(&read(path)?)
}

pub fn load_observable(path: &Path) -> Result<Observable, CliError> {
    parse_observable(&read(path)?)
}
