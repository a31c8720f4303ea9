//! Least squares through a Householder QR factorization.

use nalgebra::{DMatrix, DVector};

use crate::design::DesignMatrix;
use crate::error::{Error, Result};

/// Column `j` counts as dependent when its distance from the span of the
/// earlier columns is below this fraction of its own norm.
const RANK_TOLERANCE: f64 = 1e-10;

/// Numeric output of a least-squares solve.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    /// `(XᵀX)⁻¹`.
    pub cov_unscaled: DMatrix<f64>,
    pub sse: f64,
    pub rank: usize,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
}

/// Solves `min ‖y − Xβ‖²` for a design matrix.
pub fn ols_fit(x: &DesignMatrix, y: &[f64]) -> Result<OlsFit> {
    least_squares(x.values(), y, x.labels())
}

/// Same as [`ols_fit`] on a bare matrix. `labels` name the columns in error
/// messages. Zero columns are allowed and give `sse = Σy²`.
pub fn least_squares(x: &DMatrix<f64>, y: &[f64], labels: &[String]) -> Result<OlsFit> {
    let (n, p) = x.shape();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "design has {n} rows but response has {}",
            y.len()
        )));
    }
    if p == 0 {
        return Ok(OlsFit {
            coefficients: Vec::new(),
            cov_unscaled: DMatrix::zeros(0, 0),
            sse: y.iter().map(|v| v * v).sum(),
            rank: 0,
            fitted: vec![0.0; n],
            residuals: y.to_vec(),
        });
    }
    if n <= p {
        return Err(Error::TooFewObservations { n, p });
    }

    let qr = x.clone().qr();
    let r = qr.r();
    for j in 0..p {
        let norm = x.column(j).norm();
        if norm == 0.0 || r[(j, j)].abs() <= RANK_TOLERANCE * norm {
            return Err(Error::RankDeficient(dependent_set(&r, j, norm, labels)));
        }
    }

    let mut qty = DVector::from_column_slice(y);
    qr.q_tr_mul(&mut qty);
    let rhs = qty.rows(0, p).into_owned();
    let beta = r
        .solve_upper_triangular(&rhs)
        .ok_or_else(|| Error::RankDeficient(labels.to_vec()))?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or_else(|| Error::RankDeficient(labels.to_vec()))?;
    let cov = &r_inv * r_inv.transpose();
    // symmetrize away rounding noise
    let cov_unscaled = (&cov + cov.transpose()) * 0.5;

    let fitted_v = x * &beta;
    let fitted: Vec<f64> = fitted_v.iter().copied().collect();
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(yi, fi)| yi - fi).collect();
    let sse = residuals.iter().map(|e| e * e).sum();
    Ok(OlsFit {
        coefficients: beta.iter().copied().collect(),
        cov_unscaled,
        sse,
        rank: p,
        fitted,
        residuals,
    })
}

/// Names column `j` together with the earlier columns it is a combination of.
fn dependent_set(r: &DMatrix<f64>, j: usize, norm: f64, labels: &[String]) -> Vec<String> {
    let label = |i: usize| labels.get(i).cloned().unwrap_or_else(|| format!("column {i}"));
    if norm == 0.0 || j == 0 {
        return vec![label(j)];
    }
    let head = r.view((0, 0), (j, j)).into_owned();
    let target = r.view((0, j), (j, 1)).into_owned();
    let mut names = Vec::new();
    if let Some(c) = head.solve_upper_triangular(&target) {
        let scale = c.amax();
        for (i, ci) in c.iter().enumerate() {
            if ci.abs() > 1e-8 * scale {
                names.push(label(i));
            }
        }
    }
    names.push(label(j));
    names
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_intercept(xs: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(xs.len(), 2, |i, j| if j == 0 { 1.0 } else { xs[i] })
    }

    fn labels(p: usize) -> Vec<String> {
        (0..p).map(|i| format!("x{i}")).collect()
    }

    #[test]
    fn exact_line() {
        let f = least_squares(&with_intercept(&[0.0, 1.0, 2.0]), &[1.0, 3.0, 5.0], &labels(2)).unwrap();
        assert!((f.coefficients[0] - 1.0).abs() < 1e-12);
        assert!((f.coefficients[1] - 2.0).abs() < 1e-12);
        assert!(f.sse < 1e-24);
    }

    #[test]
    fn matches_closed_form_simple_regression() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [2.0, 3.0, 5.0, 4.0];
        let f = least_squares(&with_intercept(&xs), &ys, &labels(2)).unwrap();
        let xbar = xs.iter().sum::<f64>() / 4.0;
        let ybar = ys.iter().sum::<f64>() / 4.0;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
        let b1 = sxy / sxx;
        let b0 = ybar - b1 * xbar;
        assert!((f.coefficients[0] - b0).abs() < 1e-12 && (b0 - 1.5).abs() < 1e-12);
        assert!((f.coefficients[1] - b1).abs() < 1e-12 && (b1 - 0.8).abs() < 1e-12);
        // (XᵀX)⁻¹ for simple regression
        assert!((f.cov_unscaled[(1, 1)] - 1.0 / sxx).abs() < 1e-12);
        assert!((f.cov_unscaled[(0, 0)] - (0.25 + xbar * xbar / sxx)).abs() < 1e-12);
    }

    #[test]
    fn constant_response_gives_the_mean() {
        let x = DMatrix::from_element(5, 1, 1.0);
        let f = least_squares(&x, &[4.5; 5], &labels(1)).unwrap();
        assert!((f.coefficients[0] - 4.5).abs() < 1e-12);
    }

    #[test]
    fn rank_deficiency_names_the_columns() {
        let x = DMatrix::from_row_slice(4, 3, &[1.0, 1.0, 2.0, 1.0, 2.0, 3.0, 1.0, 3.0, 4.0, 1.0, 5.0, 6.0]);
        match least_squares(&x, &[1.0, 2.0, 3.0, 5.0], &labels(3)) {
            Err(Error::RankDeficient(cols)) => assert_eq!(cols, ["x0", "x1", "x2"]),
            other => panic!("{other:?}"),
        }
        let zero = DMatrix::from_fn(4, 2, |_, j| if j == 0 { 1.0 } else { 0.0 });
        match least_squares(&zero, &[1.0, 2.0, 3.0, 5.0], &labels(2)) {
            Err(Error::RankDeficient(cols)) => assert_eq!(cols, ["x1"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn needs_more_rows_than_columns() {
        let x = with_intercept(&[1.0, 2.0]);
        assert!(matches!(
            least_squares(&x, &[1.0, 2.0], &labels(2)),
            Err(Error::TooFewObservations { n: 2, p: 2 })
        ));
    }

    #[test]
    fn residuals_are_orthogonal_to_columns() {
        let xs = [0.3, 1.7, 2.2, 3.9, 4.1, 5.5];
        let ys = [1.0, 2.5, 2.0, 4.4, 3.9, 6.1];
        let x = with_intercept(&xs);
        let f = least_squares(&x, &ys, &labels(2)).unwrap();
        let e = DVector::from_vec(f.residuals.clone());
        let ynorm = DVector::from_column_slice(&ys).norm();
        for j in 0..2 {
            assert!(x.column(j).dot(&e).abs() < 1e-8 * ynorm);
        }
    }
}
