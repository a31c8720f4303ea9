//! Student-t, F and normal distribution functions.
//!
//! t and F probabilities go through the regularized incomplete beta function,
//! evaluating whichever tail is small directly so that tiny p-values keep
//! their relative precision.

use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::beta::checked_beta_reg;

use crate::error::{Error, Result};

fn check_df(name: &str, df: f64) -> Result<()> {
    if df.is_finite() && df > 0.0 {
        Ok(())
    } else {
        Err(Error::OutOfDomain(format!("{name} must be positive and finite, got {df}")))
    }
}

fn beta_reg(a: f64, b: f64, x: f64) -> Result<f64> {
    checked_beta_reg(a, b, x.clamp(0.0, 1.0)).map_err(|e| Error::OutOfDomain(e.to_string()))
}

/// `P(T <= -|t|)`.
fn t_lower_tail(t: f64, df: f64) -> Result<f64> {
    if t.is_infinite() {
        return Ok(0.0);
    }
    let x = df / (df + t * t);
    Ok(0.5 * beta_reg(0.5 * df, 0.5, x)?)
}

pub fn student_t_cdf(t: f64, df: f64) -> Result<f64> {
    check_df("df", df)?;
    if t.is_nan() {
        return Err(Error::OutOfDomain("t is NaN".into()));
    }
    let tail = t_lower_tail(t, df)?;
    Ok(if t <= 0.0 { tail } else { 1.0 - tail })
}

/// Two-sided p-value `P(|T| >= |t|)`.
pub fn student_t_two_sided_p(t: f64, df: f64) -> Result<f64> {
    check_df("df", df)?;
    if t.is_nan() {
        return Err(Error::OutOfDomain("t is NaN".into()));
    }
    Ok((2.0 * t_lower_tail(t, df)?).min(1.0))
}

/// Inverse of [`student_t_cdf`] by bracketing and bisection.
pub fn t_quantile(p: f64, df: f64) -> Result<f64> {
    check_df("df", df)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::OutOfDomain(format!("probability must be in (0, 1), got {p}")));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    // solve on the lower tail, where the cdf is computed without cancellation
    let target = p.min(1.0 - p);
    let mut lo = -1.0;
    while t_lower_tail(lo, df)? > target {
        lo *= 2.0;
        if lo < -1e300 {
            return Err(Error::OutOfDomain(format!("quantile {p} out of range for df {df}")));
        }
    }
    let mut hi = if lo == -1.0 { 0.0 } else { lo / 2.0 };
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if t_lower_tail(mid, df)? > target {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    let q = 0.5 * (lo + hi);
    Ok(if p < 0.5 { q } else { -q })
}

pub fn f_cdf(x: f64, d1: f64, d2: f64) -> Result<f64> {
    check_df("d1", d1)?;
    check_df("d2", d2)?;
    if x.is_nan() {
        return Err(Error::OutOfDomain("x is NaN".into()));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    beta_reg(0.5 * d1, 0.5 * d2, d1 * x / (d1 * x + d2))
}

/// Upper tail `P(F >= x)`, the p-value of an F test.
pub fn f_sf(x: f64, d1: f64, d2: f64) -> Result<f64> {
    check_df("d1", d1)?;
    check_df("d2", d2)?;
    if x.is_nan() {
        return Err(Error::OutOfDomain("x is NaN".into()));
    }
    if x <= 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    beta_reg(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * x))
}

pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::OutOfDomain(format!("probability must be in (0, 1), got {p}")));
    }
    Ok(Normal::standard().inverse_cdf(p))
}
