//! Self-contained SVG output for [`PlotSpec`]s, plus a JSON file with every
//! series' numbers next to it.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::plot::{Panel, PlotSpec, Series, SeriesKind};
use crate::{write_atomic, write_json, Result};

const PANEL_W: f64 = 520.0;
const PANEL_H: f64 = 380.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 56.0;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

/// Roughly five round-numbered ticks covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    if span <= 0.0 || !span.is_finite() {
        return vec![lo];
    }
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let start = (lo / step).ceil() as i64;
    let end = (hi / step).floor() as i64;
    (start..=end).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e6).contains(&a) {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.04 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

fn bar_width(s: &Series) -> f64 {
    s.x.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min).min(1.0e300)
}

fn panel_extent(panel: &Panel) -> ((f64, f64), (f64, f64)) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for s in &panel.series {
        xs.extend(&s.x);
        ys.extend(&s.y);
        if let Some(l) = &s.lower {
            ys.extend(l);
        }
        if let Some(u) = &s.upper {
            ys.extend(u);
        }
        if s.kind == SeriesKind::Bars {
            ys.push(0.0);
            let w = if s.x.len() > 1 { bar_width(s) } else { 1.0 };
            xs.extend(s.x.iter().map(|x| x - w / 2.0));
            xs.extend(s.x.iter().map(|x| x + w / 2.0));
        }
    }
    let x = match &panel.x_categories {
        Some(c) => (-0.5, c.len() as f64 - 0.5),
        None => extent(xs.into_iter()),
    };
    (x, extent(ys.into_iter()))
}

fn draw_panel(out: &mut String, panel: &Panel, ox: f64, oy: f64) {
    let ((x0, x1), (y0, y1)) = panel_extent(panel);
    let w = PANEL_W - MARGIN_L - MARGIN_R;
    let h = PANEL_H - MARGIN_T - MARGIN_B;
    let left = ox + MARGIN_L;
    let top = oy + MARGIN_T;
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * w;
    let sy = |y: f64| top + h - (y - y0) / (y1 - y0) * h;

    let _ = writeln!(
        out,
        r##"<rect x="{left:.2}" y="{top:.2}" width="{w:.2}" height="{h:.2}" fill="white" stroke="#444"/>"##
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">{}</text>"#,
        left + w / 2.0,
        oy + 22.0,
        escape(&panel.title)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">{}</text>"#,
        left + w / 2.0,
        top + h + 42.0,
        escape(&panel.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="{0:.2}" y="{1:.2}" text-anchor="middle" font-size="12" transform="rotate(-90 {0:.2} {1:.2})">{2}</text>"#,
        ox + 16.0,
        top + h / 2.0,
        escape(&panel.y_label)
    );

    match &panel.x_categories {
        Some(cats) => {
            for (i, c) in cats.iter().enumerate() {
                let x = sx(i as f64);
                let _ = writeln!(
                    out,
                    r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle" font-size="11">{}</text>"#,
                    top + h + 16.0,
                    escape(c)
                );
            }
        }
        None => {
            for t in ticks(x0, x1) {
                let x = sx(t);
                let _ = writeln!(
                    out,
                    r##"<line x1="{x:.2}" y1="{top:.2}" x2="{x:.2}" y2="{:.2}" stroke="#eee"/><text x="{x:.2}" y="{:.2}" text-anchor="middle" font-size="11">{}</text>"##,
                    top + h,
                    top + h + 16.0,
                    tick_label(t)
                );
            }
        }
    }
    for t in ticks(y0, y1) {
        let y = sy(t);
        let _ = writeln!(
            out,
            r##"<line x1="{left:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#eee"/><text x="{:.2}" y="{:.2}" text-anchor="end" font-size="11">{}</text>"##,
            left + w,
            left - 6.0,
            y + 4.0,
            tick_label(t)
        );
    }

    // bands underneath, then bars and lines, points on top
    let order = [SeriesKind::Band, SeriesKind::Bars, SeriesKind::Line, SeriesKind::Points];
    for kind in order {
        for s in panel.series.iter().filter(|s| s.kind == kind) {
            draw_series(out, s, &sx, &sy);
        }
    }

    for (i, s) in panel.series.iter().enumerate() {
        let y = top + 14.0 + 14.0 * i as f64;
        let x = left + 8.0;
        let _ = writeln!(
            out,
            r#"<rect x="{x:.2}" y="{:.2}" width="10" height="10" fill="{}" fill-opacity="{}"/><text x="{:.2}" y="{:.2}" font-size="10">{}</text>"#,
            y - 9.0,
            s.color,
            if s.kind == SeriesKind::Band { 0.25 } else { 1.0 },
            x + 14.0,
            y,
            escape(&s.label)
        );
    }
}

fn draw_series(out: &mut String, s: &Series, sx: &dyn Fn(f64) -> f64, sy: &dyn Fn(f64) -> f64) {
    let finite = |x: f64, y: f64| x.is_finite() && y.is_finite();
    match s.kind {
        SeriesKind::Points => {
            for (&x, &y) in s.x.iter().zip(&s.y).filter(|(x, y)| finite(**x, **y)) {
                let _ = writeln!(
                    out,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{}"/>"#,
                    sx(x),
                    sy(y),
                    s.color
                );
            }
        }
        SeriesKind::Line => {
            let pts: Vec<String> = s
                .x
                .iter()
                .zip(&s.y)
                .filter(|(x, y)| finite(**x, **y))
                .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
                pts.join(" "),
                s.color
            );
        }
        SeriesKind::Band => {
            let (Some(lo), Some(hi)) = (&s.lower, &s.upper) else { return };
            let mut pts: Vec<String> = Vec::new();
            for i in 0..s.x.len() {
                if finite(s.x[i], hi[i]) {
                    pts.push(format!("{:.2},{:.2}", sx(s.x[i]), sy(hi[i])));
                }
            }
            for i in (0..s.x.len()).rev() {
                if finite(s.x[i], lo[i]) {
                    pts.push(format!("{:.2},{:.2}", sx(s.x[i]), sy(lo[i])));
                }
            }
            let _ = writeln!(
                out,
                r#"<polygon points="{}" fill="{}" fill-opacity="0.2" stroke="none"/>"#,
                pts.join(" "),
                s.color
            );
        }
        SeriesKind::Bars => {
            let bw = if s.x.len() > 1 { bar_width(s) } else { 1.0 };
            for (&x, &y) in s.x.iter().zip(&s.y) {
                let (l, r) = (sx(x - bw / 2.0), sx(x + bw / 2.0));
                let (t, b) = (sy(y), sy(0.0));
                let _ = writeln!(
                    out,
                    r#"<rect x="{l:.2}" y="{t:.2}" width="{:.2}" height="{:.2}" fill="{}" stroke="white"/>"#,
                    (r - l).max(0.0),
                    (b - t).max(0.0),
                    s.color
                );
            }
        }
    }
}

/// Renders the plot as an SVG string. Four panels go in a 2×2 grid, fewer in
/// a row.
pub fn to_svg(spec: &PlotSpec) -> String {
    let n = spec.panels.len().max(1);
    let cols = if n == 4 { 2 } else { n };
    let rows = n.div_ceil(cols);
    let width = PANEL_W * cols as f64;
    let height = PANEL_H * rows as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, panel) in spec.panels.iter().enumerate() {
        let ox = PANEL_W * (i % cols) as f64;
        let oy = PANEL_H * (i / cols) as f64;
        draw_panel(&mut out, panel, ox, oy);
    }
    out.push_str("</svg>\n");
    out
}

/// Path of the data file written beside an SVG.
pub fn data_path(svg_path: &Path) -> PathBuf {
    svg_path.with_extension("json")
}

/// Writes the SVG to `path` and the plot's data to the same name with a
/// `.json` extension. Returns the data file path.
pub fn render_svg(spec: &PlotSpec, path: &Path) -> Result<PathBuf> {
    write_atomic(path, to_svg(spec).as_bytes())?;
    let data = data_path(path);
    write_json(&data, spec)?;
    Ok(data)
}
