//! Turning a [`ModelSpec`] and a [`DataTable`] into a labeled numeric design
//! matrix.
//!
//! [`fit_encoding`] learns everything that depends on the training data
//! (categorical levels, baselines, centering and scaling statistics, the type
//! of untyped variables). [`build_matrix`] replays that state on any table, so
//! prediction never re-estimates statistics.

use std::collections::BTreeMap;
use std::ops::Range;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Expression, Factor, ModelSpec, Term, TransformKind, Variable};
use crate::table::{Column, ColumnData, DataTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariableType {
    Quantitative,
    Categorical,
}

/// Sorted level list plus the level absorbed by the intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoricalEncoding {
    pub levels: Vec<String>,
    pub baseline: String,
}

impl CategoricalEncoding {
    /// Levels that get an indicator column, in level order.
    pub fn non_baseline(&self) -> impl Iterator<Item = &str> {
        self.levels
            .iter()
            .map(String::as_str)
            .filter(move |l| *l != self.baseline)
    }
}

/// Training statistics for a `Cen(..)` or `Std(..)` site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformStatistics {
    pub mean: f64,
    /// Sample standard deviation; only recorded for `Std`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct StatisticsSite {
    kind: TransformKind,
    inner: Expression,
    #[serde(flatten)]
    stats: TransformStatistics,
}

/// Everything learned from training data that is needed to rebuild columns.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EncodingState {
    categorical: BTreeMap<String, CategoricalEncoding>,
    resolved: BTreeMap<String, VariableType>,
    statistics: Vec<StatisticsSite>,
}

impl EncodingState {
    pub fn categorical(&self, name: &str) -> Option<&CategoricalEncoding> {
        self.categorical.get(name)
    }

    pub fn categorical_variables(&self) -> impl Iterator<Item = (&str, &CategoricalEncoding)> {
        self.categorical.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Type chosen for an untyped variable.
    pub fn resolved_type(&self, name: &str) -> Option<VariableType> {
        self.resolved.get(name).copied()
    }

    pub fn statistics(&self, kind: TransformKind, inner: &Expression) -> Option<TransformStatistics> {
        self.statistics
            .iter()
            .find(|s| s.kind == kind && &s.inner == inner)
            .map(|s| s.stats)
    }

    /// Overrides the baseline of a categorical variable.
    pub fn set_baseline(&mut self, name: &str, level: &str) -> Result<()> {
        let enc = self
            .categorical
            .get_mut(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
        if !enc.levels.iter().any(|l| l == level) {
            return Err(Error::UnknownBaseline {
                variable: name.to_string(),
                level: level.to_string(),
            });
        }
        enc.baseline = level.to_string();
        Ok(())
    }

    /// Whether a factor produces indicator columns under this encoding.
    pub fn is_categorical(&self, variable: &Variable) -> bool {
        match variable {
            Variable::Categorical { .. } => true,
            Variable::Untyped(n) => self.resolved_type(n) == Some(VariableType::Categorical),
            _ => false,
        }
    }
}

/// Columns generated by one term.
#[derive(Debug, Clone, PartialEq)]
pub struct TermGroup {
    pub term: Term,
    pub columns: Range<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    values: DMatrix<f64>,
    labels: Vec<String>,
    groups: Vec<TermGroup>,
    intercept: Option<usize>,
}

impl DesignMatrix {
    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn groups(&self) -> &[TermGroup] {
        &self.groups
    }

    pub fn intercept(&self) -> Option<usize> {
        self.intercept
    }

    pub fn column_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn group(&self, term: &Term) -> Option<&TermGroup> {
        self.groups.iter().find(|g| &g.term == term)
    }
}

pub const INTERCEPT_LABEL: &str = "Intercept";

/// Learns levels, baselines, untyped-variable types and transformation
/// statistics from `table`. Rows with missing cells should already be gone.
pub fn fit_encoding(model: &ModelSpec, table: &DataTable) -> Result<EncodingState> {
    for name in model.variable_names() {
        table.column(&name)?;
    }
    let mut state = EncodingState::default();
    let mut learner = Learner {
        table,
        state: &mut state,
        overrides: BTreeMap::new(),
    };
    learner.expression(model.response())?;
    learner.expression(model.explanatory())?;
    let overrides = std::mem::take(&mut learner.overrides);
    for (name, level) in overrides {
        state.set_baseline(&name, &level)?;
    }
    Ok(state)
}

struct Learner<'a> {
    table: &'a DataTable,
    state: &'a mut EncodingState,
    overrides: BTreeMap<String, String>,
}

impl Learner<'_> {
    fn expression(&mut self, e: &Expression) -> Result<()> {
        for term in e.terms() {
            for f in term.factors() {
                self.variable(f.variable())?;
            }
        }
        Ok(())
    }

    fn variable(&mut self, v: &Variable) -> Result<()> {
        match v {
            Variable::Quantitative(name) => {
                let col = self.table.column(name)?;
                if !col.is_numeric() {
                    return Err(Error::ColumnType {
                        variable: name.clone(),
                        expected: "numeric".into(),
                        found: col.kind_name().into(),
                    });
                }
            }
            Variable::Untyped(name) => {
                let col = self.table.column(name)?;
                let ty = if col.is_numeric() {
                    VariableType::Quantitative
                } else {
                    VariableType::Categorical
                };
                self.state.resolved.insert(name.clone(), ty);
                if ty == VariableType::Categorical {
                    self.levels(name)?;
                }
            }
            Variable::Categorical { name, baseline } => {
                self.levels(name)?;
                if let Some(level) = baseline {
                    match self.overrides.get(name) {
                        Some(prev) if prev != level => {
                            return Err(Error::ConflictingBaseline(name.clone()))
                        }
                        _ => {
                            self.overrides.insert(name.clone(), level.clone());
                        }
                    }
                }
            }
            Variable::Transformed { kind, inner } => {
                self.expression(inner)?;
                if kind.needs_statistics() && self.state.statistics(*kind, inner).is_none() {
                    let values = eval_expression(inner, self.table, self.state)?;
                    let stats = sample_statistics(*kind, &values, inner)?;
                    self.state.statistics.push(StatisticsSite {
                        kind: *kind,
                        inner: (**inner).clone(),
                        stats,
                    });
                }
            }
        }
        Ok(())
    }

    fn levels(&mut self, name: &str) -> Result<()> {
        if self.state.categorical.contains_key(name) {
            return Ok(());
        }
        let col = self.table.column(name)?;
        let mut levels: Vec<String> = (0..col.len())
            .filter(|&r| !col.is_missing(r))
            .map(|r| col.cell(r))
            .collect();
        levels.sort();
        levels.dedup();
        if levels.is_empty() {
            return Err(Error::EmptyInput(format!("categorical `{name}` has no observed levels")));
        }
        let baseline = levels[0].clone();
        self.state
            .categorical
            .insert(name.to_string(), CategoricalEncoding { levels, baseline });
        Ok(())
    }
}

fn sample_statistics(kind: TransformKind, values: &[f64], inner: &Expression) -> Result<TransformStatistics> {
    let n = values.len();
    if n == 0 {
        return Err(Error::EmptyInput(format!("no rows to compute statistics for `{inner}`")));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if kind != TransformKind::Standardize {
        return Ok(TransformStatistics { mean, sd: None });
    }
    if n < 2 {
        return Err(Error::ConstantColumn(inner.to_string()));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    if !(sd > 0.0) {
        return Err(Error::ConstantColumn(inner.to_string()));
    }
    Ok(TransformStatistics { mean, sd: Some(sd) })
}

/// Applies a transformation elementwise. `label` names the variable in
/// domain errors, which report the offending row.
pub fn eval_transform(
    kind: TransformKind,
    x: &[f64],
    stats: Option<TransformStatistics>,
    label: &str,
) -> Result<Vec<f64>> {
    let domain = |row: usize, value: f64| Error::Domain {
        transform: kind.name().to_string(),
        variable: label.to_string(),
        row,
        value,
    };
    let need = || Error::MissingEncoding(format!("{}({label})", kind.name()));
    match kind {
        TransformKind::Log | TransformKind::Log10 => x
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                if v > 0.0 {
                    Ok(if kind == TransformKind::Log { v.ln() } else { v.log10() })
                } else {
                    Err(domain(i, v))
                }
            })
            .collect(),
        TransformKind::Sin => Ok(x.iter().map(|v| v.sin()).collect()),
        TransformKind::Cos => Ok(x.iter().map(|v| v.cos()).collect()),
        TransformKind::Exp => x
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let e = v.exp();
                if e.is_finite() {
                    Ok(e)
                } else {
                    Err(domain(i, v))
                }
            })
            .collect(),
        TransformKind::Identity => Ok(x.to_vec()),
        TransformKind::Center => {
            let s = stats.ok_or_else(need)?;
            Ok(x.iter().map(|v| v - s.mean).collect())
        }
        TransformKind::Standardize => {
            let s = stats.ok_or_else(need)?;
            let sd = s.sd.ok_or_else(need)?;
            Ok(x.iter().map(|v| (v - s.mean) / sd).collect())
        }
    }
}

/// Exact inverse of [`eval_transform`]. `Sin` and `Cos` have none.
pub fn inverse_transform(kind: TransformKind, y: &[f64], stats: Option<TransformStatistics>) -> Result<Vec<f64>> {
    let need = || Error::MissingEncoding(kind.name().to_string());
    match kind {
        TransformKind::Log => Ok(y.iter().map(|v| v.exp()).collect()),
        TransformKind::Log10 => Ok(y.iter().map(|v| 10f64.powf(*v)).collect()),
        TransformKind::Exp => Ok(y.iter().map(|v| v.ln()).collect()),
        TransformKind::Identity => Ok(y.to_vec()),
        TransformKind::Center => {
            let s = stats.ok_or_else(need)?;
            Ok(y.iter().map(|v| v + s.mean).collect())
        }
        TransformKind::Standardize => {
            let s = stats.ok_or_else(need)?;
            let sd = s.sd.ok_or_else(need)?;
            Ok(y.iter().map(|v| v * sd + s.mean).collect())
        }
        TransformKind::Sin | TransformKind::Cos => Err(Error::NotInvertible(kind.name().to_string())),
    }
}

fn numeric_column<'a>(table: &'a DataTable, name: &str) -> Result<(&'a Column, &'a [f64])> {
    let col = table.column(name)?;
    match col.data() {
        ColumnData::Numeric(v) => Ok((col, v)),
        ColumnData::Text(_) => Err(Error::ColumnType {
            variable: name.to_string(),
            expected: "numeric".into(),
            found: "text".into(),
        }),
    }
}

fn raw_numeric(table: &DataTable, name: &str) -> Result<Vec<f64>> {
    let (col, values) = numeric_column(table, name)?;
    if let Some(row) = (0..col.len()).find(|&r| col.is_missing(r)) {
        return Err(Error::MissingValue {
            variable: name.to_string(),
            row,
        });
    }
    Ok(values.to_vec())
}

/// Evaluates a purely numeric factor (no indicators).
pub fn eval_numeric_factor(factor: &Factor, table: &DataTable, state: &EncodingState) -> Result<Vec<f64>> {
    let base = match factor.variable() {
        Variable::Quantitative(name) => raw_numeric(table, name)?,
        Variable::Untyped(name) => match state.resolved_type(name) {
            Some(VariableType::Quantitative) => raw_numeric(table, name)?,
            Some(VariableType::Categorical) => return Err(Error::CategoricalInTransform(name.clone())),
            None => return Err(Error::MissingEncoding(name.clone())),
        },
        Variable::Categorical { name, .. } => return Err(Error::CategoricalInTransform(name.clone())),
        Variable::Transformed { kind, inner } => {
            let x = eval_expression(inner, table, state)?;
            eval_transform(*kind, &x, state.statistics(*kind, inner), &inner.to_string())?
        }
    };
    let p = factor.power() as i32;
    Ok(if p == 1 { base } else { base.into_iter().map(|v| v.powi(p)).collect() })
}

/// Evaluates a numeric expression as the sum of its term products; the
/// constant term contributes 1.
pub fn eval_expression(e: &Expression, table: &DataTable, state: &EncodingState) -> Result<Vec<f64>> {
    let n = table.nrows();
    let mut total = vec![0.0; n];
    for term in e.terms() {
        let mut prod = vec![1.0; n];
        for f in term.factors() {
            let v = eval_numeric_factor(f, table, state)?;
            prod.iter_mut().zip(&v).for_each(|(p, x)| *p *= x);
        }
        total.iter_mut().zip(&prod).for_each(|(t, p)| *t += p);
    }
    Ok(total)
}

/// Response values (in the transformed space) for the model's left-hand side.
pub fn response_vector(model: &ModelSpec, table: &DataTable, state: &EncodingState) -> Result<Vec<f64>> {
    eval_expression(model.response(), table, state)
}

fn indicator_columns(
    name: &str,
    table: &DataTable,
    enc: &CategoricalEncoding,
) -> Result<Vec<(String, Vec<f64>)>> {
    let col = table.column(name)?;
    let mut codes = Vec::with_capacity(col.len());
    for r in 0..col.len() {
        if col.is_missing(r) {
            return Err(Error::MissingValue {
                variable: name.to_string(),
                row: r,
            });
        }
        let cell = col.cell(r);
        let idx = enc.levels.iter().position(|l| *l == cell).ok_or_else(|| Error::UnseenLevel {
            variable: name.to_string(),
            level: cell.clone(),
            row: r,
        })?;
        codes.push(idx);
    }
    Ok(enc
        .levels
        .iter()
        .enumerate()
        .filter(|(_, l)| **l != enc.baseline)
        .map(|(i, level)| {
            let values = codes.iter().map(|&c| if c == i { 1.0 } else { 0.0 }).collect();
            (format!("{name}{{{level}}}"), values)
        })
        .collect())
}

fn join_label(parts: &[String]) -> String {
    if parts.len() == 1 {
        return parts[0].clone();
    }
    parts
        .iter()
        .map(|p| {
            if p.starts_with('(') && p.ends_with(')') && balanced_group(p) {
                p.clone()
            } else {
                format!("({p})")
            }
        })
        .collect()
}

fn balanced_group(s: &str) -> bool {
    let mut depth = 0i32;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 && i != s.len() - 1 {
                    return false;
                }
            }
            _ => {}
        }
    }
    depth == 0
}

/// Columns for one term: Cartesian product over categorical levels (later
/// factors vary fastest), multiplied by numeric factor values.
pub fn term_columns(term: &Term, table: &DataTable, state: &EncodingState) -> Result<Vec<(String, Vec<f64>)>> {
    let n = table.nrows();
    let mut cols: Vec<(Vec<String>, Vec<f64>)> = vec![(Vec::new(), vec![1.0; n])];
    for f in term.factors() {
        let name = f.variable().name();
        if state.is_categorical(f.variable()) {
            let name = name.unwrap_or_default();
            let enc = state
                .categorical(name)
                .ok_or_else(|| Error::MissingEncoding(name.to_string()))?;
            let indicators = indicator_columns(name, table, enc)?;
            let mut next = Vec::with_capacity(cols.len() * indicators.len());
            for (parts, values) in &cols {
                for (label, ind) in &indicators {
                    let mut p = parts.clone();
                    p.push(label.clone());
                    next.push((p, values.iter().zip(ind).map(|(a, b)| a * b).collect()));
                }
            }
            cols = next;
        } else {
            let x = eval_numeric_factor(f, table, state)?;
            let label = f.to_string();
            for (parts, values) in cols.iter_mut() {
                parts.push(label.clone());
                values.iter_mut().zip(&x).for_each(|(v, xi)| *v *= xi);
            }
        }
    }
    Ok(cols
        .into_iter()
        .map(|(parts, values)| (join_label(&parts), values))
        .collect())
}

/// Builds the explanatory design matrix: optional intercept column first, then
/// one contiguous group per term in the spec's term order.
pub fn build_matrix(model: &ModelSpec, table: &DataTable, state: &EncodingState) -> Result<DesignMatrix> {
    let n = table.nrows();
    let mut labels = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut groups = Vec::new();
    let intercept = if model.has_intercept() {
        labels.push(INTERCEPT_LABEL.to_string());
        columns.push(vec![1.0; n]);
        Some(0)
    } else {
        None
    };
    for term in model.explanatory().terms() {
        let start = columns.len();
        for (label, values) in term_columns(term, table, state)? {
            if labels.contains(&label) {
                return Err(Error::InvalidModel(format!("duplicate column label `{label}`")));
            }
            labels.push(label);
            columns.push(values);
        }
        groups.push(TermGroup {
            term: term.clone(),
            columns: start..columns.len(),
        });
    }
    let p = columns.len();
    let values = DMatrix::from_iterator(n, p, columns.into_iter().flatten());
    Ok(DesignMatrix {
        values,
        labels,
        groups,
        intercept,
    })
}

/// Number of columns a term produces under `state`.
pub fn group_size(term: &Term, state: &EncodingState) -> usize {
    term.factors()
        .iter()
        .map(|f| {
            if state.is_categorical(f.variable()) {
                let name = f.variable().name().unwrap_or_default();
                state.categorical(name).map_or(0, |e| e.levels.len() - 1)
            } else {
                1
            }
        })
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_model;
    use crate::table::ReadOptions;

    const AMES_HEAD: &str = "SalePrice,Style,SqFt,Fire
162000,2 Story,1400,No
195000,2 Story,1660,No
164000,Other,1646,Yes
417500,1 Story,2464,Yes
186800,1 Story,1400,No
";

    fn ames() -> DataTable {
        DataTable::from_reader(AMES_HEAD.as_bytes(), ReadOptions::default()).unwrap()
    }

    fn prepare(formula: &str) -> (ModelSpec, EncodingState, DesignMatrix) {
        let m = parse_model(formula).unwrap();
        let t = ames();
        let s = fit_encoding(&m, &t).unwrap();
        let x = build_matrix(&m, &t, &s).unwrap();
        (m, s, x)
    }

    #[test]
    fn style_levels_and_default_baseline() {
        let (_, s, _) = prepare("SalePrice ~ C(Style)");
        let enc = s.categorical("Style").unwrap();
        assert_eq!(enc.levels, vec!["1 Story", "2 Story", "Other"]);
        assert_eq!(enc.baseline, "1 Story");
    }

    #[test]
    fn baseline_override() {
        let (_, s, x) = prepare("SalePrice ~ C(Style, baseline=Other)");
        assert_eq!(s.categorical("Style").unwrap().baseline, "Other");
        assert_eq!(x.labels(), &["Intercept", "Style{1 Story}", "Style{2 Story}"]);
        let m = parse_model("SalePrice ~ C(Style, baseline=\"3 Story\")").unwrap();
        assert!(matches!(fit_encoding(&m, &ames()), Err(Error::UnknownBaseline { .. })));
    }

    #[test]
    fn centering_mean_on_table_head() {
        let (m, s, _) = prepare("SalePrice ~ Cen(SqFt)");
        let inner = Expression::untyped("SqFt");
        // (1400 + 1660 + 1646 + 2464 + 1400) / 5
        assert_eq!(s.statistics(TransformKind::Center, &inner).unwrap().mean, 1714.0);
        assert_eq!(m.to_string(), "SalePrice ~ 1 + (SqFt-E(SqFt))");
    }

    #[test]
    fn indicator_columns_and_labels() {
        let (_, _, x) = prepare("SalePrice ~ C(Style) + C(Fire) + C(Style)*C(Fire)");
        assert_eq!(
            x.labels(),
            &[
                "Intercept",
                "Style{2 Story}",
                "Style{Other}",
                "Fire{Yes}",
                "(Style{2 Story})(Fire{Yes})",
                "(Style{Other})(Fire{Yes})"
            ]
        );
        // row 0: 2 Story, No
        let row: Vec<f64> = x.values().row(0).iter().copied().collect();
        assert_eq!(row, vec![1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(x.groups()[2].columns, 4..6);
    }

    #[test]
    fn quantitative_by_categorical_labels() {
        let (_, _, x) = prepare("Log(SalePrice) ~ Q(SqFt) * C(Fire) + Q(SqFt)^2");
        assert_eq!(x.labels(), &["Intercept", "(SqFt)(Fire{Yes})", "SqFt^2"]);
        assert_eq!(x.values()[(2, 1)], 1646.0);
        assert_eq!(x.values()[(0, 1)], 0.0);
        assert_eq!(x.values()[(0, 2)], 1400.0 * 1400.0);
    }

    #[test]
    fn untyped_variables_resolve_by_column() {
        let (_, s, x) = prepare("SalePrice ~ SqFt + Style");
        assert_eq!(s.resolved_type("SqFt"), Some(VariableType::Quantitative));
        assert_eq!(s.resolved_type("Style"), Some(VariableType::Categorical));
        assert_eq!(x.ncols(), 4);
    }

    #[test]
    fn group_size_formula() {
        let (m, s, x) = prepare("SalePrice ~ C(Style)*C(Fire)*Q(SqFt)");
        for g in x.groups() {
            assert_eq!(g.columns.len(), group_size(&g.term, &s));
        }
        let total: usize = m.explanatory().terms().iter().map(|t| group_size(t, &s)).sum();
        assert_eq!(total + 1, x.ncols());
    }

    #[test]
    fn unseen_level_is_an_error() {
        let (m, s, _) = prepare("SalePrice ~ C(Style)");
        let new = DataTable::from_reader("SalePrice,Style\n1,Split\n".as_bytes(), ReadOptions::default()).unwrap();
        assert_eq!(
            build_matrix(&m, &new, &s).unwrap_err(),
            Error::UnseenLevel {
                variable: "Style".into(),
                level: "Split".into(),
                row: 0
            }
        );
    }

    #[test]
    fn log_domain_error_names_row() {
        let m = parse_model("y ~ Log(x)").unwrap();
        let t = DataTable::from_reader("y,x\n1,2\n2,0\n".as_bytes(), ReadOptions::default()).unwrap();
        let s = fit_encoding(&m, &t).unwrap();
        match build_matrix(&m, &t, &s) {
            Err(Error::Domain { row, variable, .. }) => {
                assert_eq!(row, 1);
                assert_eq!(variable, "x");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn constant_column_cannot_be_standardized() {
        let m = parse_model("y ~ Std(x)").unwrap();
        let t = DataTable::from_reader("y,x\n1,2\n2,2\n".as_bytes(), ReadOptions::default()).unwrap();
        assert!(matches!(fit_encoding(&m, &t), Err(Error::ConstantColumn(_))));
    }

    #[test]
    fn unknown_column() {
        let m = parse_model("y ~ Sqft").unwrap();
        assert!(matches!(fit_encoding(&m, &ames()), Err(Error::UnknownColumn(_))));
    }

    #[test]
    fn transform_values() {
        assert_eq!(eval_transform(TransformKind::Identity, &[3.0, -1.0], None, "x").unwrap(), vec![3.0, -1.0]);
        assert!((eval_transform(TransformKind::Log, &[std::f64::consts::E], None, "x").unwrap()[0] - 1.0).abs() < 1e-15);
        assert_eq!(eval_transform(TransformKind::Log10, &[100.0], None, "x").unwrap(), vec![2.0]);
        let stats = TransformStatistics { mean: 2.0, sd: None };
        assert_eq!(
            eval_transform(TransformKind::Center, &[1.0, 2.0, 3.0], Some(stats), "x").unwrap(),
            vec![-1.0, 0.0, 1.0]
        );
    }

    #[test]
    fn inverse_of_log() {
        let y = inverse_transform(TransformKind::Log, &[11.82], None).unwrap();
        assert!((y[0] - 11.82f64.exp()).abs() < 1e-6);
        assert!((y[0] / 135_928.0 - 1.0).abs() < 2e-4);
        assert!(matches!(
            inverse_transform(TransformKind::Sin, &[0.1], None),
            Err(Error::NotInvertible(_))
        ));
    }

    #[test]
    fn inverse_composed_with_forward_is_identity() {
        let stats = TransformStatistics { mean: 3.5, sd: Some(1.75) };
        let x: Vec<f64> = (1..40).map(|i| 0.37 * i as f64).collect();
        for kind in TransformKind::ALL.into_iter().filter(|k| k.is_invertible()) {
            let fwd = eval_transform(kind, &x, Some(stats), "x").unwrap();
            let back = inverse_transform(kind, &fwd, Some(stats)).unwrap();
            for (a, b) in x.iter().zip(&back) {
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{kind:?}: {a} vs {b}");
            }
        }
    }
}
