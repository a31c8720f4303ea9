//! Fitting a model to data and everything computed from the fit: coefficient
//! inference, prediction intervals, R², information criteria and residual
//! diagnostics.

mod diagnostics;
pub mod dist;
mod ols;
pub mod report;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::design::{build_matrix, fit_encoding, response_vector, DesignMatrix, EncodingState};
use crate::error::{Error, Result};
use crate::expr::ModelSpec;
use crate::table::DataTable;

pub use diagnostics::{
    partial_regression, partial_regression_all, residual_diagnostics, residual_vs_predictor, Histogram,
    PartialRegression, ResidualDiagnostics,
};
pub use dist::{f_cdf, f_sf, normal_quantile, student_t_cdf, student_t_two_sided_p, t_quantile};
pub use ols::{least_squares, ols_fit, OlsFit};

/// A fitted linear model. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    spec: ModelSpec,
    encoding: EncodingState,
    data: DataTable,
    design: DesignMatrix,
    response: Vec<f64>,
    ols: OlsFit,
    dropped_rows: usize,
}

/// Fits `spec` to `table`.
///
/// Only the columns the formula mentions are kept, and rows with a missing
/// cell in any of them are dropped before encoding.
pub fn fit(spec: &ModelSpec, table: &DataTable) -> Result<FitResult> {
    let names: Vec<String> = spec.variable_names().into_iter().collect();
    let selected = table.select(&names)?;
    let kept = selected.complete_rows(&names)?;
    let data = selected.take_rows(&kept);
    let dropped = table.nrows() - kept.len();
    if data.nrows() == 0 {
        return Err(Error::EmptyInput("no complete rows for the model's variables".into()));
    }
    let encoding = fit_encoding(spec, &data).map_err(|e| remap_row(e, &kept))?;
    FitResult::build(spec.clone(), encoding, data, dropped).map_err(|e| remap_row(e, &kept))
}

/// Rewrites a row index in `err` from the cleaned table back to the input.
fn remap_row(err: Error, kept: &[usize]) -> Error {
    let map = |row: usize| kept.get(row).copied().unwrap_or(row);
    match err {
        Error::MissingValue { variable, row } => Error::MissingValue { variable, row: map(row) },
        Error::UnseenLevel { variable, level, row } => Error::UnseenLevel {
            variable,
            level,
            row: map(row),
        },
        Error::Domain {
            transform,
            variable,
            row,
            value,
        } => Error::Domain {
            transform,
            variable,
            row: map(row),
            value,
        },
        other => other,
    }
}

impl FitResult {
    /// Fits `spec` on an already cleaned table with a known encoding.
    pub fn build(spec: ModelSpec, encoding: EncodingState, data: DataTable, dropped_rows: usize) -> Result<Self> {
        let design = build_matrix(&spec, &data, &encoding)?;
        let response = response_vector(&spec, &data, &encoding)?;
        let ols = ols_fit(&design, &response)?;
        if ols.rank >= design.nrows() {
            return Err(Error::TooFewObservations {
                n: design.nrows(),
                p: ols.rank,
            });
        }
        Ok(FitResult {
            spec,
            encoding,
            data,
            design,
            response,
            ols,
            dropped_rows,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn encoding(&self) -> &EncodingState {
        &self.encoding
    }

    /// The rows and columns the model was fitted on.
    pub fn data(&self) -> &DataTable {
        &self.data
    }

    pub fn design(&self) -> &DesignMatrix {
        &self.design
    }

    pub fn labels(&self) -> &[String] {
        self.design.labels()
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.ols.coefficients
    }

    pub fn coefficient(&self, label: &str) -> Option<f64> {
        self.design.column_index(label).map(|j| self.ols.coefficients[j])
    }

    pub fn cov_unscaled(&self) -> &DMatrix<f64> {
        &self.ols.cov_unscaled
    }

    pub fn sse(&self) -> f64 {
        self.ols.sse
    }

    pub fn n(&self) -> usize {
        self.response.len()
    }

    pub fn rank(&self) -> usize {
        self.ols.rank
    }

    pub fn df_resid(&self) -> usize {
        self.n() - self.rank()
    }

    /// Unbiased error variance estimate `sse / df_resid`.
    pub fn sigma2(&self) -> f64 {
        self.sse() / self.df_resid() as f64
    }

    pub fn fitted(&self) -> &[f64] {
        &self.ols.fitted
    }

    pub fn residuals(&self) -> &[f64] {
        &self.ols.residuals
    }

    /// Rows of the input table dropped for missing values.
    pub fn dropped_rows(&self) -> usize {
        self.dropped_rows
    }

    /// Total sum of squares: about the mean with an intercept, about zero
    /// without one.
    pub fn ss_total(&self) -> f64 {
        if self.spec.has_intercept() {
            let mean = self.response.iter().sum::<f64>() / self.n() as f64;
            self.response.iter().map(|y| (y - mean).powi(2)).sum()
        } else {
            self.response.iter().map(|y| y * y).sum()
        }
    }

    /// Number of design columns other than the intercept.
    pub fn model_df(&self) -> usize {
        self.design.ncols() - usize::from(self.design.intercept().is_some())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientRow {
    pub label: String,
    pub estimate: f64,
    pub std_error: f64,
    /// `None` when the standard error is zero.
    pub t: Option<f64>,
    pub p: Option<f64>,
    pub ci_lower: f64,
    pub ci_upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientTable {
    pub alpha: f64,
    pub df_resid: usize,
    pub rows: Vec<CoefficientRow>,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfDomain(format!("alpha must be in (0, 1), got {alpha}")))
    }
}

pub fn coefficient_table(f: &FitResult, alpha: f64) -> Result<CoefficientTable> {
    check_alpha(alpha)?;
    let df = f.df_resid() as f64;
    let tq = t_quantile(1.0 - alpha / 2.0, df)?;
    let sigma2 = f.sigma2();
    let mut rows = Vec::with_capacity(f.coefficients().len());
    for (j, (label, &b)) in f.labels().iter().zip(f.coefficients()).enumerate() {
        let se = (sigma2 * f.cov_unscaled()[(j, j)]).max(0.0).sqrt();
        let (t, p) = if se > 0.0 {
            let t = b / se;
            (Some(t), Some(student_t_two_sided_p(t, df)?))
        } else {
            (None, None)
        };
        rows.push(CoefficientRow {
            label: label.clone(),
            estimate: b,
            std_error: se,
            t,
            p,
            ci_lower: b - tq * se,
            ci_upper: b + tq * se,
        });
    }
    Ok(CoefficientTable {
        alpha,
        df_resid: f.df_resid(),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "alpha", rename_all = "lowercase")]
pub enum Interval {
    None,
    Confidence(f64),
    Prediction(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PredictionRow {
    pub fit: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Predictions {
    /// The response as written in the model, e.g. `Log(SalePrice)`.
    pub label: String,
    pub interval: Interval,
    pub rows: Vec<PredictionRow>,
}

/// `Xβ`, shared by fitting and prediction so both agree to the last bit.
pub(crate) fn linear_predictor(x: &DMatrix<f64>, beta: &[f64]) -> Vec<f64> {
    (x * DVector::from_column_slice(beta)).iter().copied().collect()
}

/// Predicts the (possibly transformed) response for each row of `table`
/// using the training encoding.
pub fn predict(f: &FitResult, table: &DataTable, interval: Interval) -> Result<Predictions> {
    let x = build_matrix(f.spec(), table, f.encoding())?;
    let fits = linear_predictor(x.values(), f.coefficients());
    let label = f.spec().response().to_string();
    let (alpha, extra) = match interval {
        Interval::None => {
            let rows = fits
                .into_iter()
                .map(|fit| PredictionRow {
                    fit,
                    lower: None,
                    upper: None,
                })
                .collect();
            return Ok(Predictions { label, interval, rows });
        }
        Interval::Confidence(a) => (a, 0.0),
        Interval::Prediction(a) => (a, 1.0),
    };
    check_alpha(alpha)?;
    let tq = t_quantile(1.0 - alpha / 2.0, f.df_resid() as f64)?;
    let sigma = f.sigma2().sqrt();
    let cov = f.cov_unscaled();
    let rows = fits
        .into_iter()
        .enumerate()
        .map(|(i, fit)| {
            let x0 = x.values().row(i);
            let q = (x0 * cov * x0.transpose())[(0, 0)].max(0.0);
            let half = tq * sigma * (extra + q).sqrt();
            PredictionRow {
                fit,
                lower: Some(fit - half),
                upper: Some(fit + half),
            }
        })
        .collect();
    Ok(Predictions { label, interval, rows })
}

/// `1 − sse/ss_total`. Without an intercept the total sum of squares is
/// taken about zero, so the value is not comparable to the centered one.
pub fn r_squared(f: &FitResult, adjusted: bool) -> Result<f64> {
    let ss_total = f.ss_total();
    if ss_total <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let r2 = 1.0 - f.sse() / ss_total;
    if !adjusted {
        return Ok(r2);
    }
    let n = f.n() as f64;
    let base = if f.spec().has_intercept() { n - 1.0 } else { n };
    Ok(1.0 - (1.0 - r2) * base / f.df_resid() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InformationCriteria {
    pub log_likelihood: f64,
    pub aic: f64,
    pub bic: f64,
}

/// Gaussian log-likelihood at the maximum-likelihood variance `sse/n`; the
/// parameter count includes the variance.
pub fn information_criteria_from(sse: f64, n: usize, rank: usize) -> Result<InformationCriteria> {
    if sse <= 0.0 {
        return Err(Error::PerfectFit);
    }
    let n = n as f64;
    let k = (rank + 1) as f64;
    let log_likelihood = -0.5 * n * ((2.0 * std::f64::consts::PI).ln() + (sse / n).ln() + 1.0);
    Ok(InformationCriteria {
        log_likelihood,
        aic: 2.0 * k - 2.0 * log_likelihood,
        bic: k * n.ln() - 2.0 * log_likelihood,
    })
}

pub fn information_criteria(f: &FitResult) -> Result<InformationCriteria> {
    information_criteria_from(f.sse(), f.n(), f.rank())
}
