//! Residual panels, residual-versus-predictor pairs and partial regression.

use nalgebra::DMatrix;
use serde::Serialize;

use super::{least_squares, normal_quantile, FitResult};
use crate::design::INTERCEPT_LABEL;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    /// `bins + 1` increasing edges; the last bin is closed on the right.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualDiagnostics {
    /// (theoretical normal quantile, sorted residual)
    pub qq: Vec<(f64, f64)>,
    pub histogram: Histogram,
    pub fitted_vs_residual: Vec<(f64, f64)>,
    pub order_vs_residual: Vec<(f64, f64)>,
}

pub fn residual_diagnostics(f: &FitResult) -> Result<ResidualDiagnostics> {
    let e = f.residuals();
    let n = e.len();
    let mut sorted = e.to_vec();
    sorted.sort_by(f64::total_cmp);
    let qq = sorted
        .iter()
        .enumerate()
        .map(|(i, &r)| Ok((normal_quantile((i as f64 + 0.5) / n as f64)?, r)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ResidualDiagnostics {
        qq,
        histogram: histogram(e),
        fitted_vs_residual: f.fitted().iter().copied().zip(e.iter().copied()).collect(),
        order_vs_residual: e.iter().enumerate().map(|(i, &r)| (i as f64, r)).collect(),
    })
}

/// Sturges' rule: `⌈log₂ n⌉ + 1` equal-width bins over the data range.
pub(crate) fn histogram(values: &[f64]) -> Histogram {
    let n = values.len().max(1);
    let bins = (n as f64).log2().ceil() as usize + 1;
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if !lo.is_finite() {
        (-0.5, 0.5)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    };
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins)
        .map(|i| if i == bins { hi } else { lo + width * i as f64 })
        .collect();
    let mut counts = vec![0; bins];
    for &v in values {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    Histogram { edges, counts }
}

/// Pairs of (raw predictor value, residual) for a quantitative variable that
/// appears on the explanatory side.
pub fn residual_vs_predictor(f: &FitResult, variable: &str) -> Result<Vec<(f64, f64)>> {
    if !f.spec().explanatory().variable_names().contains(variable) {
        return Err(Error::UnknownVariable(variable.to_string()));
    }
    let col = f.data().column(variable)?;
    let x = col.as_numeric().ok_or_else(|| Error::ColumnType {
        variable: variable.to_string(),
        expected: "numeric".into(),
        found: col.kind_name().into(),
    })?;
    if f.encoding().categorical(variable).is_some() {
        return Err(Error::ColumnType {
            variable: variable.to_string(),
            expected: "quantitative".into(),
            found: "categorical".into(),
        });
    }
    Ok(x.iter().copied().zip(f.residuals().iter().copied()).collect())
}

/// Added-variable data for one design column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartialRegression {
    pub label: String,
    /// Residuals of the column regressed on all other columns.
    pub x: Vec<f64>,
    /// Residuals of the response regressed on all other columns.
    pub y: Vec<f64>,
    /// Least-squares slope through the origin of `y` on `x`; equals the
    /// column's coefficient in the full fit.
    pub slope: f64,
}

/// Partial regression for the design column labeled `label` (for a plain
/// quantitative main effect the label is the variable name).
pub fn partial_regression(f: &FitResult, label: &str) -> Result<PartialRegression> {
    let j = f
        .design()
        .column_index(label)
        .filter(|_| label != INTERCEPT_LABEL)
        .ok_or_else(|| Error::UnknownVariable(label.to_string()))?;
    let x = f.design().values();
    let others: Vec<usize> = (0..x.ncols()).filter(|&k| k != j).collect();
    let rest = x.select_columns(&others);
    let rest_labels: Vec<String> = others.iter().map(|&k| f.labels()[k].clone()).collect();
    let xj: Vec<f64> = x.column(j).iter().copied().collect();
    let ex = residualize(&rest, &xj, &rest_labels)?;
    let ey = residualize(&rest, f.response(), &rest_labels)?;
    let sxx: f64 = ex.iter().map(|v| v * v).sum();
    let sxy: f64 = ex.iter().zip(&ey).map(|(a, b)| a * b).sum();
    Ok(PartialRegression {
        label: label.to_string(),
        x: ex,
        y: ey,
        slope: sxy / sxx,
    })
}

/// One partial regression per non-intercept design column.
pub fn partial_regression_all(f: &FitResult) -> Result<Vec<PartialRegression>> {
    f.labels()
        .iter()
        .filter(|l| *l != INTERCEPT_LABEL)
        .map(|l| partial_regression(f, l))
        .collect()
}

fn residualize(x: &DMatrix<f64>, v: &[f64], labels: &[String]) -> Result<Vec<f64>> {
    Ok(least_squares(x, v, labels)?.residuals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_model;
    use crate::infer::fit;
    use crate::table::{Column, DataTable};

    fn fit_xy(formula: &str, cols: Vec<(&str, Vec<f64>)>) -> FitResult {
        let t = DataTable::from_columns(cols.into_iter().map(|(n, v)| (n, Column::numeric(v)))).unwrap();
        fit(&parse_model(formula).unwrap(), &t).unwrap()
    }

    #[test]
    fn sturges_bins() {
        let values: Vec<f64> = (0..100).map(f64::from).collect();
        let h = histogram(&values);
        assert_eq!(h.counts.len(), 8);
        assert_eq!(h.counts.iter().sum::<usize>(), 100);
        assert_eq!(h.edges.first(), Some(&0.0));
        assert_eq!(h.edges.last(), Some(&99.0));
        let flat = histogram(&[0.0; 5]);
        assert_eq!(flat.counts.iter().sum::<usize>(), 5);
    }

    #[test]
    fn exact_fit_has_flat_qq() {
        let f = fit_xy("y ~ x", vec![("x", vec![0.0, 1.0, 2.0, 3.0]), ("y", vec![1.0, 3.0, 5.0, 7.0])]);
        let d = residual_diagnostics(&f).unwrap();
        assert!(d.qq.iter().all(|(_, r)| r.abs() < 1e-12));
        assert!(d.qq.windows(2).all(|w| w[0].0 < w[1].0));
        assert_eq!(d.order_vs_residual.len(), 4);
    }

    #[test]
    fn single_predictor_partial_plot_is_centered_scatter() {
        let x = vec![1.0, 2.0, 4.0, 7.0, 8.0];
        let y = vec![2.0, 2.5, 5.0, 6.5, 9.0];
        let f = fit_xy("y ~ x", vec![("x", x.clone()), ("y", y.clone())]);
        let pr = partial_regression(&f, "x").unwrap();
        let xm = x.iter().sum::<f64>() / 5.0;
        let ym = y.iter().sum::<f64>() / 5.0;
        for i in 0..5 {
            assert!((pr.x[i] - (x[i] - xm)).abs() < 1e-12);
            assert!((pr.y[i] - (y[i] - ym)).abs() < 1e-12);
        }
        assert!((pr.slope - f.coefficient("x").unwrap()).abs() < 1e-12);
        assert!(matches!(partial_regression(&f, "z"), Err(Error::UnknownVariable(_))));
        assert!(matches!(partial_regression(&f, "Intercept"), Err(Error::UnknownVariable(_))));
    }

    #[test]
    fn residual_vs_predictor_pairs_raw_values() {
        let f = fit_xy(
            "y ~ Log(x)",
            vec![("x", vec![1.0, 2.0, 4.0, 7.0]), ("y", vec![0.1, 0.8, 1.3, 2.0])],
        );
        let pairs = residual_vs_predictor(&f, "x").unwrap();
        assert_eq!(pairs[2].0, 4.0);
        assert_eq!(pairs[2].1, f.residuals()[2]);
        assert!(residual_vs_predictor(&f, "y").is_err());
    }
}
