//! Aligned plain-text rendering of result tables.

use super::{CoefficientTable, Predictions};

/// Four significant digits, switching to exponent notation for very large or
/// very small magnitudes.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-3..6).contains(&mag) {
        return format!("{x:.3e}");
    }
    let decimals = (3 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

fn format_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), format_number)
}

/// Lays out rows under a header with right-aligned columns, except the first
/// which is left-aligned.
pub fn render_rows(header: &[String], rows: &[Vec<String>]) -> String {
    let ncol = header.len();
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let mut s = String::new();
        for (i, cell) in cells.iter().enumerate().take(ncol) {
            let pad = widths[i] - cell.chars().count();
            if i == 0 {
                s.push_str(cell);
                s.push_str(&" ".repeat(pad));
            } else {
                s.push_str("  ");
                s.push_str(&" ".repeat(pad));
                s.push_str(cell);
            }
        }
        s.trim_end().to_string()
    };
    let mut out = line(header);
    out.push('\n');
    for row in rows {
        out.push_str(&line(row));
        out.push('\n');
    }
    out
}

fn pct(x: f64) -> String {
    let s = format!("{:.2}", x * 100.0);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    format!("{s}%")
}

impl CoefficientTable {
    pub fn render_text(&self) -> String {
        let lo = pct(self.alpha / 2.0);
        let hi = pct(1.0 - self.alpha / 2.0);
        let header: Vec<String> = ["", "Coefficients", "SE", "t", "p"]
            .iter()
            .map(|s| s.to_string())
            .chain([format!("{lo} CI"), format!("{hi} CI")])
            .collect();
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.label.clone(),
                    format_number(r.estimate),
                    format_number(r.std_error),
                    format_opt(r.t),
                    format_opt(r.p),
                    format_number(r.ci_lower),
                    format_number(r.ci_upper),
                ]
            })
            .collect();
        render_rows(&header, &rows)
    }
}

impl Predictions {
    pub fn render_text(&self) -> String {
        let has_bounds = self.rows.iter().any(|r| r.lower.is_some());
        let mut header = vec![String::new(), format!("Predicted {}", self.label)];
        if has_bounds {
            header.push("Lower".into());
            header.push("Upper".into());
        }
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut row = vec![i.to_string(), format_number(r.fit)];
                if has_bounds {
                    row.push(format_opt(r.lower));
                    row.push(format_opt(r.upper));
                }
                row
            })
            .collect();
        render_rows(&header, &rows)
    }
}
