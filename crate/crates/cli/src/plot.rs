//! Choosing and computing plots for a fitted model.
//!
//! Everything here produces plain data ([`PlotSpec`]); drawing happens in
//! [`crate::svg`]. Fitted curves are always computed by calling `predict` on
//! a generated grid, so the numbers in a plot's data file are exactly what
//! the model predicts.

use serde::Serialize;
use tilde_core::design::{inverse_transform, TransformStatistics};
use tilde_core::expr::{Expression, TransformKind, Variable};
use tilde_core::infer::{
    partial_regression, predict, residual_diagnostics, residual_vs_predictor, FitResult, Interval, PartialRegression,
};
use tilde_core::table::{Column, DataTable};

use crate::{CliError, Result};

/// Number of points on a fitted curve.
pub const GRID_POINTS: usize = 100;

const PALETTE: [&str; 8] = [
    "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    ScatterCurve,
    Interaction,
    GroupedLines,
    ResidualPanels,
    TransformedPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    Points,
    Line,
    /// `y` is the center line; `lower`/`upper` bound the shaded region.
    Band,
    /// Histogram bars centered at `x` with heights `y`.
    Bars,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub label: String,
    pub kind: SeriesKind,
    pub color: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<Vec<f64>>,
}

impl Series {
    fn new(label: impl Into<String>, kind: SeriesKind, color: &str, x: Vec<f64>, y: Vec<f64>) -> Self {
        Series {
            label: label.into(),
            kind,
            color: color.to_string(),
            x,
            y,
            lower: None,
            upper: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Tick labels for a categorical x-axis placed at 0, 1, 2, ...
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_categories: Option<Vec<String>>,
    pub series: Vec<Series>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "alpha", rename_all = "lowercase")]
pub enum Band {
    Confidence(f64),
    Prediction(f64),
}

impl Band {
    fn interval(self) -> Interval {
        match self {
            Band::Confidence(a) => Interval::Confidence(a),
            Band::Prediction(a) => Interval::Prediction(a),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Band::Confidence(_) => "confidence",
            Band::Prediction(_) => "prediction",
        }
    }

    fn alpha(self) -> f64 {
        match self {
            Band::Confidence(a) | Band::Prediction(a) => a,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotSpec {
    pub kind: PlotKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band: Option<Band>,
    pub panels: Vec<Panel>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl PlotSpec {
    pub fn series_count(&self) -> usize {
        self.panels.iter().map(|p| p.series.len()).sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlotOptions {
    pub band: Option<Band>,
    pub x_var: Option<String>,
    pub transformed_y_space: bool,
}

/// Variable names on the explanatory side in order of first appearance.
fn variables_in_order(e: &Expression, out: &mut Vec<String>) {
    for term in e.terms() {
        for f in term.factors() {
            match f.variable() {
                Variable::Quantitative(n) | Variable::Untyped(n) | Variable::Categorical { name: n, .. } => {
                    if !out.contains(n) {
                        out.push(n.clone());
                    }
                }
                Variable::Transformed { inner, .. } => variables_in_order(inner, out),
            }
        }
    }
}

enum Layout {
    /// Quantitative x-axis, one curve per combination of `groups` levels.
    Curve { x: String, groups: Vec<String> },
    /// First categorical on the x-axis, one line per combination of the rest.
    Interaction { x: String, groups: Vec<String> },
}

fn layout(f: &FitResult, x_var: Option<&str>) -> Result<Layout> {
    let mut vars = Vec::new();
    variables_in_order(f.spec().explanatory(), &mut vars);
    let (cats, quants): (Vec<String>, Vec<String>) =
        vars.into_iter().partition(|v| f.encoding().categorical(v).is_some());
    if let Some(x) = x_var {
        if !quants.iter().any(|q| q == x) {
            return Err(CliError::Usage(format!(
                "--x-var `{x}` is not a quantitative variable of the model"
            )));
        }
        return Ok(Layout::Curve {
            x: x.to_string(),
            groups: cats,
        });
    }
    match quants.len() {
        0 if cats.is_empty() => Err(CliError::Usage("model has no explanatory variables to plot".into())),
        0 => Ok(Layout::Interaction {
            x: cats[0].clone(),
            groups: cats[1..].to_vec(),
        }),
        1 => Ok(Layout::Curve {
            x: quants[0].clone(),
            groups: cats,
        }),
        _ => Err(CliError::Usage(format!(
            "ambiguous x-axis: pass --x-var with one of {}",
            quants.join(", ")
        ))),
    }
}

/// How to map transformed-space values back to the original response.
#[derive(Clone)]
enum ResponseMap {
    Identity(String),
    Invert {
        raw: String,
        kind: TransformKind,
        stats: Option<TransformStatistics>,
    },
    /// No usable inverse; the reason goes into a warning.
    Opaque(String),
}

fn response_map(f: &FitResult) -> ResponseMap {
    let resp = f.spec().response();
    let single = |e: &Expression| -> Option<Variable> {
        match e.terms() {
            [t] => match t.factors() {
                [fac] if fac.power() == 1 => Some(fac.variable().clone()),
                _ => None,
            },
            _ => None,
        }
    };
    match single(resp) {
        Some(Variable::Quantitative(n) | Variable::Untyped(n)) => ResponseMap::Identity(n),
        Some(Variable::Transformed { kind, inner }) => match single(&inner) {
            Some(Variable::Quantitative(n) | Variable::Untyped(n)) if kind.is_invertible() => ResponseMap::Invert {
                raw: n,
                kind,
                stats: f.encoding().statistics(kind, &inner),
            },
            _ if !kind.is_invertible() => ResponseMap::Opaque(format!(
                "response transformation {} has no inverse; plotting the transformed space only",
                kind.name()
            )),
            _ => ResponseMap::Opaque(format!(
                "response `{resp}` cannot be mapped back to a single variable; plotting the transformed space only"
            )),
        },
        _ => ResponseMap::Opaque(format!(
            "response `{resp}` cannot be mapped back to a single variable; plotting the transformed space only"
        )),
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Space {
    Original,
    Transformed,
}

fn numeric(f: &FitResult, name: &str) -> Result<Vec<f64>> {
    let col = f.data().column(name)?;
    col.as_numeric()
        .map(<[f64]>::to_vec)
        .ok_or_else(|| CliError::Usage(format!("`{name}` is not numeric")))
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Evenly spaced grid from the observed minimum to the observed maximum.
pub fn grid(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..GRID_POINTS)
        .map(|i| {
            if i == GRID_POINTS - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (GRID_POINTS - 1) as f64
            }
        })
        .collect()
}

/// All combinations of levels of `vars`, later variables varying fastest.
fn level_combinations(f: &FitResult, vars: &[String]) -> Vec<Vec<(String, String)>> {
    let mut combos: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for v in vars {
        let levels = f.encoding().categorical(v).map(|c| c.levels.clone()).unwrap_or_default();
        combos = combos
            .into_iter()
            .flat_map(|c| {
                levels.iter().map(move |l| {
                    let mut next = c.clone();
                    next.push((v.clone(), l.clone()));
                    next
                })
            })
            .collect();
    }
    combos
}

fn combo_label(combo: &[(String, String)]) -> String {
    combo
        .iter()
        .map(|(v, l)| format!("{v}={l}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Table of `n` rows for prediction: the given columns, other quantitative
/// variables at their training means and categoricals fixed per `combo`.
fn prediction_table(
    f: &FitResult,
    n: usize,
    fixed: Vec<(String, Column)>,
    combo: &[(String, String)],
) -> Result<DataTable> {
    let mut vars = Vec::new();
    variables_in_order(f.spec().explanatory(), &mut vars);
    let mut cols = fixed;
    for v in vars {
        if cols.iter().any(|(n, _)| *n == v) {
            continue;
        }
        if let Some((_, level)) = combo.iter().find(|(name, _)| *name == v) {
            cols.push((v, Column::text(vec![level.clone(); n])));
        } else if let Some(enc) = f.encoding().categorical(&v) {
            cols.push((v, Column::text(vec![enc.baseline.clone(); n])));
        } else {
            let m = mean(&numeric(f, &v)?);
            cols.push((v, Column::numeric(vec![m; n])));
        }
    }
    Ok(DataTable::from_columns(cols)?)
}

/// Center line plus optional bounds in the requested space.
struct Curve {
    y: Vec<f64>,
    lower: Option<Vec<f64>>,
    upper: Option<Vec<f64>>,
}

fn predict_curve(f: &FitResult, table: &DataTable, band: Option<Band>, space: Space, map: &ResponseMap) -> Result<Curve> {
    let p = predict(f, table, band.map_or(Interval::None, Band::interval))?;
    let y: Vec<f64> = p.rows.iter().map(|r| r.fit).collect();
    let lower: Option<Vec<f64>> = band.map(|_| p.rows.iter().map(|r| r.lower.unwrap_or(r.fit)).collect());
    let upper: Option<Vec<f64>> = band.map(|_| p.rows.iter().map(|r| r.upper.unwrap_or(r.fit)).collect());
    match (space, map) {
        (Space::Original, ResponseMap::Invert { kind, stats, .. }) => {
            let inv = |v: &[f64]| inverse_transform(*kind, v, *stats);
            let y = inv(&y)?;
            let (lower, upper) = match (lower, upper) {
                (Some(l), Some(u)) => {
                    let (l, u) = (inv(&l)?, inv(&u)?);
                    let lo: Vec<f64> = l.iter().zip(&u).map(|(a, b)| a.min(*b)).collect();
                    let hi: Vec<f64> = l.iter().zip(&u).map(|(a, b)| a.max(*b)).collect();
                    (Some(lo), Some(hi))
                }
                _ => (None, None),
            };
            Ok(Curve { y, lower, upper })
        }
        _ => Ok(Curve { y, lower, upper }),
    }
}

fn observed_response(f: &FitResult, space: Space, map: &ResponseMap) -> Result<(Vec<f64>, String)> {
    match (space, map) {
        (Space::Original, ResponseMap::Invert { raw, .. }) | (Space::Original, ResponseMap::Identity(raw)) => {
            Ok((numeric(f, raw)?, raw.clone()))
        }
        _ => Ok((f.response().to_vec(), f.spec().response().to_string())),
    }
}

fn push_curve(series: &mut Vec<Series>, label: &str, color: &str, x: Vec<f64>, curve: Curve, band: Option<Band>) {
    if let (Some(lower), Some(upper), Some(b)) = (curve.lower, curve.upper, band) {
        series.push(Series {
            label: format!("{} {:.0}% {} band", label, (1.0 - b.alpha()) * 100.0, b.name()),
            kind: SeriesKind::Band,
            color: color.to_string(),
            x: x.clone(),
            y: curve.y.clone(),
            lower: Some(lower),
            upper: Some(upper),
        });
    }
    series.push(Series::new(label, SeriesKind::Line, color, x, curve.y));
}

fn build_panel(f: &FitResult, layout: &Layout, space: Space, map: &ResponseMap, band: Option<Band>) -> Result<Panel> {
    let (observed, y_label) = observed_response(f, space, map)?;
    let title = match space {
        Space::Original => format!("{y_label} (original space)"),
        Space::Transformed => format!("{y_label} (model space)"),
    };
    let suffix = if space == Space::Transformed { " [model space]" } else { "" };
    let mut series = Vec::new();
    match layout {
        Layout::Curve { x, groups } => {
            let xs = numeric(f, x)?;
            let g = grid(&xs);
            let combos = level_combinations(f, groups);
            let grouped = !groups.is_empty();
            for (k, combo) in combos.iter().enumerate() {
                let color = if grouped { PALETTE[k % PALETTE.len()] } else { "black" };
                let rows: Vec<usize> = (0..f.n())
                    .filter(|&r| {
                        combo
                            .iter()
                            .all(|(v, l)| f.data().column(v).map(|c| c.cell(r) == *l).unwrap_or(false))
                    })
                    .collect();
                let name = if grouped { combo_label(combo) } else { String::new() };
                let obs_label = if grouped { format!("observed {name}{suffix}") } else { format!("observed{suffix}") };
                series.push(Series::new(
                    obs_label,
                    SeriesKind::Points,
                    color,
                    rows.iter().map(|&r| xs[r]).collect(),
                    rows.iter().map(|&r| observed[r]).collect(),
                ));
                let table = prediction_table(f, g.len(), vec![(x.clone(), Column::numeric(g.clone()))], combo)?;
                let curve = predict_curve(f, &table, band, space, map)?;
                let fit_label = if grouped { format!("fitted {name}{suffix}") } else { format!("fitted{suffix}") };
                let line_color = if grouped { color } else { "red" };
                push_curve(&mut series, &fit_label, line_color, g.clone(), curve, band);
            }
            Ok(Panel {
                title,
                x_label: x.clone(),
                y_label,
                x_categories: None,
                series,
            })
        }
        Layout::Interaction { x, groups } => {
            let levels = f
                .encoding()
                .categorical(x)
                .map(|c| c.levels.clone())
                .unwrap_or_default();
            let positions: Vec<f64> = (0..levels.len()).map(|i| i as f64).collect();
            let xcol = f.data().column(x)?;
            let obs_x: Vec<f64> = (0..f.n())
                .map(|r| levels.iter().position(|l| *l == xcol.cell(r)).unwrap_or(0) as f64)
                .collect();
            series.push(Series::new(
                format!("observed{suffix}"),
                SeriesKind::Points,
                "black",
                obs_x,
                observed,
            ));
            for (k, combo) in level_combinations(f, groups).iter().enumerate() {
                let color = PALETTE[k % PALETTE.len()];
                let table = prediction_table(f, levels.len(), vec![(x.clone(), Column::text(levels.clone()))], combo)?;
                let curve = predict_curve(f, &table, band, space, map)?;
                let name = if groups.is_empty() { "fitted".to_string() } else { format!("fitted {}", combo_label(combo)) };
                push_curve(&mut series, &format!("{name}{suffix}"), color, positions.clone(), curve, band);
            }
            Ok(Panel {
                title,
                x_label: x.clone(),
                y_label,
                x_categories: Some(levels),
                series,
            })
        }
    }
}

/// Picks the plot for a fitted model: a fitted curve over one quantitative
/// variable (one line per categorical combination), or an interaction plot
/// when every variable is categorical. Original response space by default.
pub fn choose_plot(f: &FitResult, options: &PlotOptions) -> Result<PlotSpec> {
    if options.transformed_y_space {
        return transformed_space_pair(f, options);
    }
    let layout = layout(f, options.x_var.as_deref())?;
    let map = response_map(f);
    let mut warnings = Vec::new();
    let space = match &map {
        ResponseMap::Opaque(w) => {
            warnings.push(w.clone());
            Space::Transformed
        }
        _ => Space::Original,
    };
    let panel = build_panel(f, &layout, space, &map, options.band)?;
    Ok(PlotSpec {
        kind: base_kind(&layout),
        band: options.band,
        panels: vec![panel],
        warnings,
    })
}

fn base_kind(layout: &Layout) -> PlotKind {
    match layout {
        Layout::Curve { groups, .. } if groups.is_empty() => PlotKind::ScatterCurve,
        Layout::Curve { .. } => PlotKind::GroupedLines,
        Layout::Interaction { .. } => PlotKind::Interaction,
    }
}

/// Side-by-side original-space and model-space panels. Falls back to the
/// model space alone, with a warning, when the response has no inverse.
pub fn transformed_space_pair(f: &FitResult, options: &PlotOptions) -> Result<PlotSpec> {
    let layout = layout(f, options.x_var.as_deref())?;
    let map = response_map(f);
    if let ResponseMap::Opaque(w) = &map {
        let panel = build_panel(f, &layout, Space::Transformed, &map, options.band)?;
        return Ok(PlotSpec {
            kind: base_kind(&layout),
            band: options.band,
            panels: vec![panel],
            warnings: vec![w.clone()],
        });
    }
    let original = build_panel(f, &layout, Space::Original, &map, options.band)?;
    let transformed = build_panel(f, &layout, Space::Transformed, &map, options.band)?;
    Ok(PlotSpec {
        kind: PlotKind::TransformedPair,
        band: options.band,
        panels: vec![original, transformed],
        warnings: Vec::new(),
    })
}

/// The four residual panels: normal Q-Q, histogram, residuals against fitted
/// values and residuals in row order.
pub fn residual_panels(f: &FitResult) -> Result<PlotSpec> {
    let d = residual_diagnostics(f)?;
    let (qx, qy): (Vec<f64>, Vec<f64>) = d.qq.iter().copied().unzip();
    let sd = (f.residuals().iter().map(|e| e * e).sum::<f64>() / f.df_resid() as f64).sqrt();
    let ends = [
        qx.first().copied().unwrap_or(0.0),
        qx.last().copied().unwrap_or(0.0),
    ];
    let qq = Panel {
        title: "Normal Q-Q".into(),
        x_label: "Theoretical quantile".into(),
        y_label: "Residual".into(),
        x_categories: None,
        series: vec![
            Series::new("Q-Q residuals", SeriesKind::Points, "black", qx, qy),
            Series::new("Q-Q reference", SeriesKind::Line, "red", ends.to_vec(), ends.iter().map(|q| q * sd).collect()),
        ],
    };
    let centers: Vec<f64> = d.histogram.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let hist = Panel {
        title: "Histogram of residuals".into(),
        x_label: "Residual".into(),
        y_label: "Count".into(),
        x_categories: None,
        series: vec![Series::new(
            "residual counts",
            SeriesKind::Bars,
            "#1f77b4",
            centers,
            d.histogram.counts.iter().map(|&c| c as f64).collect(),
        )],
    };
    let scatter = |title: &str, x_label: &str, label: &str, zero: &str, pairs: Vec<(f64, f64)>| {
        let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Panel {
            title: title.into(),
            x_label: x_label.into(),
            y_label: "Residual".into(),
            x_categories: None,
            series: vec![
                Series::new(label, SeriesKind::Points, "black", x, y),
                Series::new(zero, SeriesKind::Line, "red", vec![lo, hi], vec![0.0, 0.0]),
            ],
        }
    };
    Ok(PlotSpec {
        kind: PlotKind::ResidualPanels,
        band: None,
        panels: vec![
            qq,
            hist,
            scatter("Residuals vs fitted", "Fitted value", "fitted vs residual", "zero (fitted)", d.fitted_vs_residual),
            scatter("Residuals vs order", "Row", "order vs residual", "zero (order)", d.order_vs_residual),
        ],
        warnings: Vec::new(),
    })
}

/// Residuals against one quantitative predictor.
pub fn residual_plot(f: &FitResult, variable: &str) -> Result<PlotSpec> {
    let (x, y): (Vec<f64>, Vec<f64>) = residual_vs_predictor(f, variable)?.into_iter().unzip();
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(PlotSpec {
        kind: PlotKind::ScatterCurve,
        band: None,
        panels: vec![Panel {
            title: format!("Residuals vs {variable}"),
            x_label: variable.to_string(),
            y_label: "Residual".into(),
            x_categories: None,
            series: vec![
                Series::new("residuals", SeriesKind::Points, "black", x, y),
                Series::new("zero", SeriesKind::Line, "red", vec![lo, hi], vec![0.0, 0.0]),
            ],
        }],
        warnings: Vec::new(),
    })
}

/// Added-variable plot for one design column, with the slope line.
pub fn partial_regression_plot(f: &FitResult, label: &str) -> Result<PlotSpec> {
    let pr: PartialRegression = partial_regression(f, label)?;
    let lo = pr.x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = pr.x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(PlotSpec {
        kind: PlotKind::ScatterCurve,
        band: None,
        panels: vec![Panel {
            title: format!("Partial regression: {label}"),
            x_label: format!("{label} | others"),
            y_label: format!("{} | others", f.spec().response()),
            x_categories: None,
            series: vec![
                Series::new("partial residuals", SeriesKind::Points, "black", pr.x.clone(), pr.y.clone()),
                Series::new(
                    format!("slope {}", pr.slope),
                    SeriesKind::Line,
                    "red",
                    vec![lo, hi],
                    vec![lo * pr.slope, hi * pr.slope],
                ),
            ],
        }],
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use tilde_core::expr::parse_model;
    use tilde_core::infer::fit;
    use tilde_core::table::ReadOptions;

    const CSV: &str = "\
price,sqft,age,style,fire
100,1.0,10,a,no
130,1.4,12,b,yes
150,1.9,3,a,yes
170,2.2,30,b,no
210,2.8,8,a,no
240,3.1,15,b,yes
260,3.5,22,a,yes
300,4.0,5,b,no
";

    fn model(formula: &str) -> FitResult {
        let data = DataTable::from_reader(CSV.as_bytes(), ReadOptions::default()).unwrap();
        fit(&parse_model(formula).unwrap(), &data).unwrap()
    }

    #[test]
    fn simple_model_gets_scatter_and_red_line() {
        let f = model("price ~ sqft");
        let p = choose_plot(&f, &PlotOptions::default()).unwrap();
        assert_eq!(p.kind, PlotKind::ScatterCurve);
        let s = &p.panels[0].series;
        assert_eq!((s[0].kind, s[0].color.as_str()), (SeriesKind::Points, "black"));
        assert_eq!((s[1].kind, s[1].color.as_str()), (SeriesKind::Line, "red"));
        assert_eq!(s[1].x.len(), GRID_POINTS);
        assert_eq!(s[1].x[0], 1.0);
        assert_eq!(s[1].x[GRID_POINTS - 1], 4.0);
    }

    #[test]
    fn curve_is_the_prediction_on_the_grid() {
        let f = model("price ~ sqft + sqft^2");
        let p = choose_plot(&f, &PlotOptions::default()).unwrap();
        let line = &p.panels[0].series[1];
        let t = DataTable::from_columns([("sqft", Column::numeric(line.x.clone()))]).unwrap();
        let pred = predict(&f, &t, Interval::None).unwrap();
        for (a, b) in pred.rows.iter().zip(&line.y) {
            assert_eq!(a.fit, *b);
        }
    }

    #[test]
    fn categorical_only_models_get_interaction_plots() {
        let f = model("price ~ C(style) + C(fire)");
        let p = choose_plot(&f, &PlotOptions::default()).unwrap();
        assert_eq!(p.kind, PlotKind::Interaction);
        let panel = &p.panels[0];
        assert_eq!(panel.x_categories.as_deref(), Some(&["a".to_string(), "b".to_string()][..]));
        // no interaction term: lines are parallel
        let lines: Vec<&Series> = panel.series.iter().filter(|s| s.kind == SeriesKind::Line).collect();
        assert_eq!(lines.len(), 2);
        let d0 = lines[0].y[1] - lines[0].y[0];
        let d1 = lines[1].y[1] - lines[1].y[0];
        assert!((d0 - d1).abs() < 1e-9);
    }

    #[test]
    fn grouped_lines_with_bands() {
        let f = model("Log(price) ~ sqft * (1 + C(fire))");
        let opts = PlotOptions {
            band: Some(Band::Confidence(0.05)),
            ..Default::default()
        };
        let p = choose_plot(&f, &opts).unwrap();
        assert_eq!(p.kind, PlotKind::GroupedLines);
        let bands: Vec<&Series> = p.panels[0].series.iter().filter(|s| s.kind == SeriesKind::Band).collect();
        assert_eq!(bands.len(), 2);
        for b in bands {
            let (lo, hi) = (b.lower.as_ref().unwrap(), b.upper.as_ref().unwrap());
            for i in 0..b.y.len() {
                assert!(lo[i] <= b.y[i] && b.y[i] <= hi[i]);
            }
        }
        // original space by default
        assert_eq!(p.panels[0].y_label, "price");
    }

    #[test]
    fn two_quantitative_variables_need_x_var() {
        let f = model("price ~ sqft + age");
        assert!(matches!(choose_plot(&f, &PlotOptions::default()), Err(CliError::Usage(_))));
        let opts = PlotOptions {
            x_var: Some("age".into()),
            ..Default::default()
        };
        let p = choose_plot(&f, &opts).unwrap();
        assert_eq!(p.panels[0].x_label, "age");
    }

    #[test]
    fn transformed_pair_and_fallback() {
        let f = model("Log(price) ~ sqft");
        let opts = PlotOptions {
            transformed_y_space: true,
            ..Default::default()
        };
        let p = choose_plot(&f, &opts).unwrap();
        assert_eq!(p.kind, PlotKind::TransformedPair);
        assert_eq!(p.panels[0].y_label, "price");
        assert_eq!(p.panels[1].y_label, "Log(price)");
        let back: Vec<f64> = p.panels[1].series[1].y.iter().map(|v| v.exp()).collect();
        for (a, b) in back.iter().zip(&p.panels[0].series[1].y) {
            assert!((a - b).abs() < 1e-9 * b.abs());
        }

        let plain = transformed_space_pair(&model("price ~ sqft"), &opts).unwrap();
        assert_eq!(plain.panels[0].series[1].y, plain.panels[1].series[1].y);

        let sin = transformed_space_pair(&model("Sin(price) ~ sqft"), &opts).unwrap();
        assert_eq!(sin.panels.len(), 1);
        assert_eq!(sin.warnings.len(), 1);
    }

    #[test]
    fn series_labels_are_unique() {
        let f = model("Log(price) ~ sqft * (1 + C(fire))");
        let opts = PlotOptions {
            band: Some(Band::Prediction(0.1)),
            transformed_y_space: true,
            ..Default::default()
        };
        for p in [choose_plot(&f, &opts).unwrap(), residual_panels(&f).unwrap()] {
            let mut labels: Vec<&str> = p.panels.iter().flat_map(|q| q.series.iter().map(|s| s.label.as_str())).collect();
            let n = labels.len();
            labels.sort();
            labels.dedup();
            assert_eq!(labels.len(), n);
        }
    }
}
