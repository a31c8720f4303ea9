//! F-tests: the omnibus test with one partial test per term, and the
//! comparison of two nested fits.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::infer::report::{format_number, render_rows};
use crate::infer::{f_sf, least_squares, FitResult};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnovaRow {
    pub label: String,
    pub df: usize,
    pub ss_error: Option<f64>,
    pub ss_regression: Option<f64>,
    pub f: Option<f64>,
    pub p: Option<f64>,
}

/// Test rows followed by a final `Error` row that only carries the residual
/// degrees of freedom.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnovaTable {
    pub rows: Vec<AnovaRow>,
}

impl AnovaTable {
    pub fn row(&self, label: &str) -> Option<&AnovaRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn render_text(&self) -> String {
        let header: Vec<String> = ["", "DF", "SS Err.", "SS Reg.", "F", "p"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let opt = |x: Option<f64>| x.map(format_number).unwrap_or_default();
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.label.clone(),
                    r.df.to_string(),
                    opt(r.ss_error),
                    opt(r.ss_regression),
                    opt(r.f),
                    opt(r.p),
                ]
            })
            .collect();
        render_rows(&header, &rows)
    }
}

/// `F = ((sse_reduced − sse_full)/df)/(sse_full/df_resid)` with its upper-tail
/// p-value. Rounding can push the numerator slightly negative; it is clamped.
fn f_test(sse_reduced: f64, sse_full: f64, df: usize, df_resid: usize) -> Result<(f64, f64)> {
    let num = ((sse_reduced - sse_full) / df as f64).max(0.0);
    let den = sse_full / df_resid as f64;
    let f = if num == 0.0 { 0.0 } else { num / den };
    Ok((f, f_sf(f, df as f64, df_resid as f64)?))
}

fn error_row(df_resid: usize) -> AnovaRow {
    AnovaRow {
        label: "Error".to_string(),
        df: df_resid,
        ss_error: None,
        ss_regression: None,
        f: None,
        p: None,
    }
}

/// Omnibus F-test of all non-intercept columns, then one row per term that
/// refits the model without that term's columns.
pub fn anova_single(f: &FitResult) -> Result<AnovaTable> {
    if !f.spec().has_intercept() {
        return Err(Error::NoIntercept);
    }
    let df_model = f.model_df();
    if df_model == 0 {
        return Err(Error::InvalidModel("intercept-only model has no terms to test".into()));
    }
    let sse = f.sse();
    let ss_total = f.ss_total();
    let df_resid = f.df_resid();
    let (global_f, global_p) = f_test(ss_total, sse, df_model, df_resid)?;
    let mut rows = vec![AnovaRow {
        label: "Global Test".to_string(),
        df: df_model,
        ss_error: Some(sse),
        ss_regression: Some(ss_total - sse),
        f: Some(global_f),
        p: Some(global_p),
    }];

    let x = f.design().values();
    for term in f.spec().explanatory().canonical_terms() {
        let group = f
            .design()
            .group(term)
            .ok_or_else(|| Error::InvalidModel(format!("no columns for term {term}")))?;
        let keep: Vec<usize> = (0..x.ncols()).filter(|j| !group.columns.contains(j)).collect();
        let labels: Vec<String> = keep.iter().map(|&j| f.labels()[j].clone()).collect();
        let reduced = least_squares(&x.select_columns(&keep), f.response(), &labels)?;
        let df = group.columns.len();
        let (stat, p) = f_test(reduced.sse, sse, df, df_resid)?;
        rows.push(AnovaRow {
            label: format!("- {}", term.label()),
            df,
            ss_error: Some(reduced.sse),
            ss_regression: Some(ss_total - reduced.sse),
            f: Some(stat),
            p: Some(p),
        });
    }
    rows.push(error_row(df_resid));
    Ok(AnovaTable { rows })
}

/// Partial F-test of `reduced` against `full`. Both must be fitted to the
/// same response on the same rows, and every term of `reduced` must appear
/// in `full`.
pub fn anova_nested(full: &FitResult, reduced: &FitResult) -> Result<AnovaTable> {
    if full.spec().response() != reduced.spec().response() {
        return Err(Error::NotNested(format!(
            "responses differ: {} vs {}",
            full.spec().response(),
            reduced.spec().response()
        )));
    }
    if full.n() != reduced.n() {
        return Err(Error::DimensionMismatch(format!(
            "models were fitted on {} and {} rows",
            full.n(),
            reduced.n()
        )));
    }
    let mut extra: Vec<String> = reduced
        .spec()
        .explanatory()
        .canonical_terms()
        .into_iter()
        .filter(|t| !full.spec().explanatory().contains(t))
        .map(|t| t.label())
        .collect();
    if reduced.spec().has_intercept() && !full.spec().has_intercept() {
        extra.insert(0, "1".to_string());
    }
    if !extra.is_empty() {
        return Err(Error::NotNested(format!(
            "reduced model has terms absent from the full model: {}",
            extra.join(", ")
        )));
    }
    if full.rank() == reduced.rank() {
        return Err(Error::IdenticalModels);
    }
    let ss_total = full.ss_total();
    let df = full.rank() - reduced.rank();
    let (stat, p) = f_test(reduced.sse(), full.sse(), df, full.df_resid())?;
    let rows = vec![
        AnovaRow {
            label: "Full Model".to_string(),
            df: full.model_df(),
            ss_error: Some(full.sse()),
            ss_regression: Some(ss_total - full.sse()),
            f: None,
            p: None,
        },
        AnovaRow {
            label: "- Reduced Model".to_string(),
            df,
            ss_error: Some(reduced.sse()),
            ss_regression: Some(ss_total - reduced.sse()),
            f: Some(stat),
            p: Some(p),
        },
        error_row(full.df_resid()),
    ];
    Ok(AnovaTable { rows })
}
