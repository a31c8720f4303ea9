//! Greedy forward/backward term selection, optionally restricted to models
//! that respect effect hierarchy (no interaction or higher power without all
//! of its lower-order parts).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::design::{build_matrix, fit_encoding, response_vector};
use crate::error::{Error, Result};
use crate::expr::{Expression, Factor, ModelSpec, Term};
use crate::infer::{information_criteria_from, least_squares};
use crate::table::DataTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Metric {
    #[serde(rename = "AIC")]
    Aic,
    #[serde(rename = "BIC")]
    Bic,
    #[serde(rename = "R2_adj")]
    AdjR2,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Aic => "AIC",
            Metric::Bic => "BIC",
            Metric::AdjR2 => "R2_adj",
        }
    }

    /// True when `a` is strictly better than `b`.
    pub fn improves(self, a: f64, b: f64) -> bool {
        match self {
            Metric::Aic | Metric::Bic => a < b,
            Metric::AdjR2 => a > b,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "aic" => Ok(Metric::Aic),
            "bic" => Ok(Metric::Bic),
            "r2adj" | "adjr2" => Ok(Metric::AdjR2),
            _ => Err(Error::Stepwise(format!("unknown metric `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Start,
    Add,
    Remove,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub step: usize,
    pub action: Action,
    /// Label of the term added or removed; `None` for the starting model.
    pub term: Option<String>,
    pub metric: f64,
    /// The model after this step.
    pub model: ModelSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepwiseResult {
    pub best_model: ModelSpec,
    pub metric: Metric,
    pub value: f64,
    pub trace: Vec<TraceStep>,
}

/// Every term obtained from `t` by lowering at least one factor's power
/// (to zero removes the factor), excluding the empty term.
pub fn hierarchy_parents(t: &Term) -> BTreeSet<Term> {
    let factors: Vec<&Factor> = t.canonical_factors();
    let mut parents = BTreeSet::new();
    let mut powers: Vec<u32> = vec![0; factors.len()];
    loop {
        let full = powers.iter().zip(&factors).all(|(p, f)| *p == f.power());
        if !full && powers.iter().any(|&p| p > 0) {
            let term = Term::from_factors(
                factors
                    .iter()
                    .zip(&powers)
                    .filter(|(_, &p)| p > 0)
                    .map(|(f, &p)| f.with_power(p).expect("positive power")),
            );
            parents.insert(term);
        }
        // odometer over 0..=power for each factor
        let mut i = 0;
        loop {
            if i == factors.len() {
                return parents;
            }
            if powers[i] < factors[i].power() {
                powers[i] += 1;
                break;
            }
            powers[i] = 0;
            i += 1;
        }
    }
}

/// True when every term's parents are also in `terms`.
pub fn is_hierarchy_closed<'a>(terms: impl IntoIterator<Item = &'a Term> + Clone) -> bool {
    let set: BTreeSet<&Term> = terms.clone().into_iter().collect();
    terms
        .into_iter()
        .all(|t| hierarchy_parents(t).iter().all(|p| set.contains(p)))
}

/// Scores sub-models of a full model. The full design is encoded once, on
/// rows complete for every full-model variable, and sub-models select
/// column groups from it, so every candidate is scored on identical rows.
pub struct SubsetEvaluator {
    terms: Vec<Term>,
    groups: Vec<Vec<usize>>,
    intercept: Option<usize>,
    x: DMatrix<f64>,
    labels: Vec<String>,
    y: Vec<f64>,
    metric: Metric,
}

impl SubsetEvaluator {
    pub fn new(full: &ModelSpec, data: &DataTable, metric: Metric) -> Result<Self> {
        let names: Vec<String> = full.variable_names().into_iter().collect();
        let selected = data.select(&names)?;
        let kept = selected.complete_rows(&names)?;
        let data = selected.take_rows(&kept);
        if data.nrows() == 0 {
            return Err(Error::EmptyInput("no complete rows for the model's variables".into()));
        }
        let encoding = fit_encoding(full, &data)?;
        let design = build_matrix(full, &data, &encoding)?;
        let y = response_vector(full, &data, &encoding)?;
        let terms: Vec<Term> = full
            .explanatory()
            .canonical_terms()
            .into_iter()
            .cloned()
            .collect();
        let groups = terms
            .iter()
            .map(|t| {
                design
                    .group(t)
                    .map(|g| g.columns.clone().collect())
                    .ok_or_else(|| Error::InvalidModel(format!("no columns for term {t}")))
            })
            .collect::<Result<Vec<Vec<usize>>>>()?;
        Ok(SubsetEvaluator {
            terms,
            groups,
            intercept: design.intercept(),
            x: design.values().clone(),
            labels: design.labels().to_vec(),
            y,
            metric,
        })
    }

    /// Candidate terms in canonical order.
    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// Metric of the model holding the intercept (if the full model has one)
    /// plus the terms whose indices are in `subset`.
    pub fn score(&self, subset: &BTreeSet<usize>) -> Result<f64> {
        let mut cols: Vec<usize> = self.intercept.into_iter().collect();
        for &i in subset {
            cols.extend(&self.groups[i]);
        }
        let labels: Vec<String> = cols.iter().map(|&j| self.labels[j].clone()).collect();
        let fit = least_squares(&self.x.select_columns(&cols), &self.y, &labels)?;
        let n = self.n();
        if fit.rank >= n {
            return Err(Error::TooFewObservations { n, p: fit.rank });
        }
        match self.metric {
            Metric::Aic => Ok(information_criteria_from(fit.sse, n, fit.rank)?.aic),
            Metric::Bic => Ok(information_criteria_from(fit.sse, n, fit.rank)?.bic),
            Metric::AdjR2 => {
                let (ss_total, base) = if self.intercept.is_some() {
                    let mean = self.y.iter().sum::<f64>() / n as f64;
                    (self.y.iter().map(|v| (v - mean).powi(2)).sum::<f64>(), n as f64 - 1.0)
                } else {
                    (self.y.iter().map(|v| v * v).sum::<f64>(), n as f64)
                };
                if ss_total <= 0.0 {
                    return Err(Error::ZeroVariance);
                }
                let r2 = 1.0 - fit.sse / ss_total;
                Ok(1.0 - (1.0 - r2) * base / (n - fit.rank) as f64)
            }
        }
    }
}

pub fn stepwise(
    full: &ModelSpec,
    data: &DataTable,
    metric: Metric,
    direction: Direction,
    hierarchy: bool,
) -> Result<StepwiseResult> {
    if full.explanatory().is_empty() {
        return Err(Error::Stepwise("full model has no terms to select from".into()));
    }
    let eval = SubsetEvaluator::new(full, data, metric)?;
    let terms = eval.terms().to_vec();
    let parents: Vec<BTreeSet<usize>> = terms
        .iter()
        .map(|t| {
            hierarchy_parents(t)
                .iter()
                .map(|p| terms.iter().position(|u| u == p).unwrap_or(usize::MAX))
                .collect()
        })
        .collect();
    if hierarchy && direction == Direction::Backward && !is_hierarchy_closed(&terms) {
        return Err(Error::Stepwise(
            "backward search with hierarchy needs a hierarchy-closed full model".into(),
        ));
    }

    let model_of = |subset: &BTreeSet<usize>| {
        let kept = full.explanatory().terms().iter().filter(|t| {
            subset.iter().any(|&i| &terms[i] == *t)
        });
        full.with_terms(Expression::from_terms(kept.cloned()))
    };

    let mut current: BTreeSet<usize> = match direction {
        Direction::Forward => BTreeSet::new(),
        Direction::Backward => (0..terms.len()).collect(),
    };
    let mut value = eval.score(&current)?;
    let mut trace = vec![TraceStep {
        step: 0,
        action: Action::Start,
        term: None,
        metric: value,
        model: model_of(&current),
    }];

    loop {
        let candidates: Vec<usize> = (0..terms.len())
            .filter(|i| match direction {
                Direction::Forward => {
                    !current.contains(i) && (!hierarchy || parents[*i].iter().all(|p| current.contains(p)))
                }
                Direction::Backward => {
                    current.contains(i)
                        && (!hierarchy || !current.iter().any(|&u| parents[u].contains(i)))
                }
            })
            .collect();
        let mut best: Option<(usize, f64)> = None;
        for i in candidates {
            let mut next = current.clone();
            if direction == Direction::Forward {
                next.insert(i);
            } else {
                next.remove(&i);
            }
            let score = eval.score(&next)?;
            let beats_best = best.is_none_or(|(_, b)| metric.improves(score, b));
            if metric.improves(score, value) && beats_best {
                best = Some((i, score));
            }
        }
        let Some((i, score)) = best else { break };
        let action = if direction == Direction::Forward {
            current.insert(i);
            Action::Add
        } else {
            current.remove(&i);
            Action::Remove
        };
        value = score;
        trace.push(TraceStep {
            step: trace.len(),
            action,
            term: Some(terms[i].label()),
            metric: value,
            model: model_of(&current),
        });
    }

    Ok(StepwiseResult {
        best_model: model_of(&current),
        metric,
        value,
        trace,
    })
}

impl StepwiseResult {
    pub fn render_text(&self) -> String {
        let mut out = format!("{} | {}\n{}\n", self.metric, self.value, self.best_model);
        for s in &self.trace {
            let action = match s.action {
                Action::Start => "start",
                Action::Add => "add",
                Action::Remove => "remove",
            };
            out.push_str(&format!(
                "  {:>3}  {:<6}  {:<30}  {}\n",
                s.step,
                action,
                s.term.as_deref().unwrap_or("-"),
                s.metric
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expression, parse_model};
    use crate::table::Column;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn term(s: &str) -> Term {
        let e = parse_expression(s).unwrap();
        assert_eq!(e.len(), 1);
        e.terms()[0].clone()
    }

    fn labels(set: &BTreeSet<Term>) -> Vec<String> {
        set.iter().map(Term::label).collect()
    }

    #[test]
    fn parents_of_main_effect_and_interaction() {
        assert!(hierarchy_parents(&term("Q(SqFt)")).is_empty());
        let p = hierarchy_parents(&term("C(Style) * C(Fire)"));
        assert_eq!(p, [term("C(Style)"), term("C(Fire)")].into_iter().collect());
    }

    #[test]
    fn parents_vary_powers() {
        let p = hierarchy_parents(&term("C(A) * C(B) * Q(X)^2"));
        let expected: BTreeSet<Term> = [
            "C(A)", "C(B)", "Q(X)", "Q(X)^2", "C(A)*C(B)", "C(A)*Q(X)", "C(A)*Q(X)^2", "C(B)*Q(X)",
            "C(B)*Q(X)^2", "C(A)*C(B)*Q(X)",
        ]
        .iter()
        .map(|s| term(s))
        .collect();
        assert_eq!(p, expected, "{:?}", labels(&p));
        // the three-way power term omitted by a naive search needs its two-way parent
        let t = term("C(Fire) * C(Style) * (Q(SqFt)-E(Q(SqFt)))^2");
        assert!(hierarchy_parents(&t).contains(&term("C(Fire) * C(Style)")));
    }

    fn synthetic(n: usize, seed: u64) -> DataTable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x1: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let x2: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let y: Vec<f64> = x1
            .iter()
            .map(|x| 2.0 * x + 0.5 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        DataTable::from_columns([
            ("x1", Column::numeric(x1)),
            ("x2", Column::numeric(x2)),
            ("y", Column::numeric(y)),
        ])
        .unwrap()
    }

    #[test]
    fn forward_bic_selects_the_true_predictor() {
        let data = synthetic(200, 7);
        let full = parse_model("y ~ x1 + x2").unwrap();
        let r = stepwise(&full, &data, Metric::Bic, Direction::Forward, false).unwrap();
        assert_eq!(r.best_model.to_string(), "y ~ 1 + x1");
        // exhaustive check over the four sub-models
        let eval = SubsetEvaluator::new(&full, &data, Metric::Bic).unwrap();
        let subsets: [&[usize]; 4] = [&[], &[0], &[1], &[0, 1]];
        let scores: Vec<f64> = subsets
            .iter()
            .map(|s| eval.score(&s.iter().copied().collect()).unwrap())
            .collect();
        let best = (0..4).min_by(|&a, &b| scores[a].total_cmp(&scores[b])).unwrap();
        assert_eq!(best, 1);
        assert_eq!(r.value, scores[1]);
    }

    #[test]
    fn trace_improves_strictly() {
        let data = synthetic(120, 11);
        let full = parse_model("y ~ (1 + x1) * (1 + x2)").unwrap();
        for metric in [Metric::Aic, Metric::Bic, Metric::AdjR2] {
            for direction in [Direction::Forward, Direction::Backward] {
                let r = stepwise(&full, &data, metric, direction, true).unwrap();
                assert!(r.trace.windows(2).all(|w| metric.improves(w[1].metric, w[0].metric)));
                for s in &r.trace {
                    assert!(is_hierarchy_closed(s.model.explanatory().terms()));
                }
                assert_eq!(r.trace.last().unwrap().metric, r.value);
            }
        }
    }

    #[test]
    fn hierarchy_blocks_orphan_interactions() {
        // y depends only on the product, so a naive search adds it alone
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 150;
        let a: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let y: Vec<f64> = a
            .iter()
            .zip(&b)
            .map(|(a, b)| 3.0 * a * b + 0.1 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let data = DataTable::from_columns([
            ("a", Column::numeric(a)),
            ("b", Column::numeric(b)),
            ("y", Column::numeric(y)),
        ])
        .unwrap();
        let full = parse_model("y ~ (1 + a) * (1 + b)").unwrap();
        let naive = stepwise(&full, &data, Metric::Bic, Direction::Forward, false).unwrap();
        assert_eq!(naive.trace[1].term.as_deref(), Some("(a)(b)"));
        let strict = stepwise(&full, &data, Metric::Bic, Direction::Forward, true).unwrap();
        assert!(is_hierarchy_closed(strict.best_model.explanatory().terms()));
    }

    #[test]
    fn metric_parsing_and_errors() {
        assert_eq!("r2-adj".parse::<Metric>().unwrap(), Metric::AdjR2);
        assert_eq!("BIC".parse::<Metric>().unwrap(), Metric::Bic);
        assert!("cp".parse::<Metric>().is_err());
        let data = synthetic(20, 1);
        let empty = parse_model("y ~ 1").unwrap();
        assert!(matches!(
            stepwise(&empty, &data, Metric::Aic, Direction::Backward, false),
            Err(Error::Stepwise(_))
        ));
        let orphan = parse_model("y ~ (x1)(x2)").unwrap();
        assert!(stepwise(&orphan, &data, Metric::Aic, Direction::Backward, true).is_err());
    }
}
