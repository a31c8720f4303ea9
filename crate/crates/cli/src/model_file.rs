//! Saved models.
//!
//! A model file is a JSON document holding the typed formula, the encoding
//! learned at fit time, the fitted numbers and the rows used for fitting.
//! Loading refits on the stored rows and checks the result against the stored
//! coefficients, so a file edited by hand cannot silently disagree with
//! itself.

use std::path::Path;

use serde::{Deserialize, Serialize};
use tilde_core::design::EncodingState;
use tilde_core::expr::parse_model;
use tilde_core::infer::FitResult;
use tilde_core::table::DataTable;

use crate::{io_error, write_json, CliError, Result};

pub const FORMAT_TAG: &str = "tilde-model/1";

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    format: String,
    formula: String,
    encoding: EncodingState,
    labels: Vec<String>,
    coefficients: Vec<f64>,
    cov_unscaled: Vec<Vec<f64>>,
    sse: f64,
    n: usize,
    rank: usize,
    df_resid: usize,
    dropped_rows: usize,
    data: DataTable,
}

pub fn save(fit: &FitResult, path: &Path) -> Result<()> {
    let cov = fit.cov_unscaled();
    let file = ModelFile {
        format: FORMAT_TAG.to_string(),
        formula: fit.spec().to_formula(),
        encoding: fit.encoding().clone(),
        labels: fit.labels().to_vec(),
        coefficients: fit.coefficients().to_vec(),
        cov_unscaled: (0..cov.nrows())
            .map(|i| cov.row(i).iter().copied().collect())
            .collect(),
        sse: fit.sse(),
        n: fit.n(),
        rank: fit.rank(),
        df_resid: fit.df_resid(),
        dropped_rows: fit.dropped_rows(),
        data: fit.data().clone(),
    };
    write_json(path, &file)
}

pub fn load(path: &Path) -> Result<FitResult> {
    let bad = |message: String| CliError::ModelFile {
        path: path.display().to_string(),
        message,
    };
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let file: ModelFile = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    if file.format != FORMAT_TAG {
        return Err(bad(format!("unsupported format `{}`", file.format)));
    }
    let spec = parse_model(&file.formula)?;
    let fit = FitResult::build(spec, file.encoding, file.data, file.dropped_rows)?;
    if fit.labels() != file.labels.as_slice() || fit.n() != file.n || fit.rank() != file.rank {
        return Err(bad("stored design does not match the formula".into()));
    }
    let consistent = fit
        .coefficients()
        .iter()
        .zip(&file.coefficients)
        .all(|(a, b)| (a - b).abs() <= 1e-9 * (1.0 + b.abs()));
    if !consistent || file.coefficients.len() != fit.coefficients().len() {
        return Err(bad("stored coefficients do not match the stored data".into()));
    }
    Ok(fit)
}
