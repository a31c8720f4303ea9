//! Model formula algebra.
//!
//! Variables combine into [`Expression`]s, which are flat sums of [`Term`]s;
//! each term is a product of [`Factor`]s. Operations keep expressions in a
//! canonical sum-of-products form so that equality is structural:
//! `(Style + Fire) * SqFt` and `SqFt*Style + SqFt*Fire` compare equal.
//!
//! Terms and factors remember the order in which they were introduced. That
//! order only affects printing; equality, hashing and [`Ord`] use the sorted
//! canonical order.

mod display;
mod parse;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use parse::{parse_expression, parse_model};

/// Elementwise transformations available in formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TransformKind {
    Log,
    Log10,
    Sin,
    Cos,
    Exp,
    Standardize,
    Center,
    Identity,
}

impl TransformKind {
    pub const ALL: [TransformKind; 8] = [
        TransformKind::Log,
        TransformKind::Log10,
        TransformKind::Sin,
        TransformKind::Cos,
        TransformKind::Exp,
        TransformKind::Standardize,
        TransformKind::Center,
        TransformKind::Identity,
    ];

    /// Name used when printing a formula.
    pub fn name(self) -> &'static str {
        match self {
            TransformKind::Log => "Log",
            TransformKind::Log10 => "Log10",
            TransformKind::Sin => "Sin",
            TransformKind::Cos => "Cos",
            TransformKind::Exp => "Exp",
            TransformKind::Standardize => "Std",
            TransformKind::Center => "Cen",
            TransformKind::Identity => "Identity",
        }
    }

    /// Case-insensitive lookup accepting the long and short spellings.
    pub fn from_name(name: &str) -> Option<Self> {
        let kind = match name.to_ascii_lowercase().as_str() {
            "log" => TransformKind::Log,
            "log10" => TransformKind::Log10,
            "sin" => TransformKind::Sin,
            "cos" => TransformKind::Cos,
            "exp" => TransformKind::Exp,
            "std" | "standardize" => TransformKind::Standardize,
            "cen" | "center" => TransformKind::Center,
            "identity" => TransformKind::Identity,
            _ => return None,
        };
        Some(kind)
    }

    pub fn is_invertible(self) -> bool {
        !matches!(self, TransformKind::Sin | TransformKind::Cos)
    }

    /// Whether evaluation depends on statistics learned from training data.
    pub fn needs_statistics(self) -> bool {
        matches!(self, TransformKind::Center | TransformKind::Standardize)
    }
}

/// The variable part of a factor, without its exponent.
///
/// Variant order matters: the derived `Ord` puts numeric variables before
/// categorical ones, then sorts by name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variable {
    Quantitative(String),
    /// Type decided at encoding time from the column contents.
    Untyped(String),
    Transformed {
        kind: TransformKind,
        inner: Box<Expression>,
    },
    Categorical {
        name: String,
        baseline: Option<String>,
    },
}

impl Variable {
    pub fn is_categorical(&self) -> bool {
        matches!(self, Variable::Categorical { .. })
    }

    /// Column name for plain variables, `None` for transformations.
    pub fn name(&self) -> Option<&str> {
        match self {
            Variable::Quantitative(n) | Variable::Untyped(n) => Some(n),
            Variable::Categorical { name, .. } => Some(name),
            Variable::Transformed { .. } => None,
        }
    }

    fn collect_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Variable::Transformed { inner, .. } => inner.collect_names(out),
            other => {
                out.insert(other.name().unwrap_or_default().to_string());
            }
        }
    }
}

/// A variable raised to a positive integer power.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Factor {
    variable: Variable,
    power: u32,
}

impl Factor {
    pub fn new(variable: Variable, power: u32) -> Result<Self> {
        if power == 0 {
            return Err(Error::InvalidPower("0".into()));
        }
        let power = if variable.is_categorical() { 1 } else { power };
        Ok(Factor { variable, power })
    }

    pub fn quantitative(name: impl Into<String>) -> Self {
        Factor {
            variable: Variable::Quantitative(name.into()),
            power: 1,
        }
    }

    pub fn categorical(name: impl Into<String>) -> Self {
        Factor {
            variable: Variable::Categorical {
                name: name.into(),
                baseline: None,
            },
            power: 1,
        }
    }

    pub fn categorical_with_baseline(name: impl Into<String>, baseline: impl Into<String>) -> Self {
        Factor {
            variable: Variable::Categorical {
                name: name.into(),
                baseline: Some(baseline.into()),
            },
            power: 1,
        }
    }

    pub fn untyped(name: impl Into<String>) -> Self {
        Factor {
            variable: Variable::Untyped(name.into()),
            power: 1,
        }
    }

    /// Applies a transformation to an expression. Categorical variables are
    /// rejected since every transformation is numeric.
    pub fn transformed(kind: TransformKind, inner: Expression) -> Result<Self> {
        if let Some(name) = inner.categorical_names().into_iter().next() {
            return Err(Error::CategoricalInTransform(name));
        }
        if inner.is_empty() {
            return Err(Error::InvalidModel(format!(
                "{}() of an empty expression",
                kind.name()
            )));
        }
        Ok(Factor {
            variable: Variable::Transformed {
                kind,
                inner: Box::new(inner),
            },
            power: 1,
        })
    }

    pub fn variable(&self) -> &Variable {
        &self.variable
    }

    pub fn power(&self) -> u32 {
        self.power
    }

    pub fn is_categorical(&self) -> bool {
        self.variable.is_categorical()
    }

    /// Same variable with a different exponent (collapsed to 1 for categoricals).
    pub fn with_power(&self, power: u32) -> Result<Self> {
        Factor::new(self.variable.clone(), power)
    }
}

/// A product of factors. The empty product is the intercept.
#[derive(Debug, Clone, Default)]
pub struct Term {
    factors: Vec<Factor>,
}

impl Term {
    pub fn intercept() -> Self {
        Term::default()
    }

    pub fn from_factor(factor: Factor) -> Self {
        Term {
            factors: vec![factor],
        }
    }

    /// Builds a term by multiplying factors together.
    pub fn from_factors(factors: impl IntoIterator<Item = Factor>) -> Self {
        let mut term = Term::intercept();
        for f in factors {
            term.absorb(f);
        }
        term.order_for_display();
        term
    }

    pub fn is_intercept(&self) -> bool {
        self.factors.is_empty()
    }

    /// Factors in display order.
    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn degree(&self) -> usize {
        self.factors.len()
    }

    pub fn canonical_factors(&self) -> Vec<&Factor> {
        let mut v: Vec<&Factor> = self.factors.iter().collect();
        v.sort();
        v
    }

    pub fn multiply(&self, other: &Term) -> Term {
        let mut out = self.clone();
        for f in &other.factors {
            out.absorb(f.clone());
        }
        out.order_for_display();
        out
    }

    /// Raises every factor to `k` times its power.
    pub fn pow(&self, k: u32) -> Result<Term> {
        if k == 0 {
            return Err(Error::InvalidPower("0".into()));
        }
        let factors = self
            .factors
            .iter()
            .map(|f| f.with_power(f.power * k))
            .collect::<Result<Vec<_>>>()?;
        Ok(Term { factors })
    }

    pub fn has_categorical(&self) -> bool {
        self.factors.iter().any(Factor::is_categorical)
    }

    pub fn variable_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for f in &self.factors {
            f.variable.collect_names(&mut out);
        }
        out
    }

    fn absorb(&mut self, factor: Factor) {
        if let Some(existing) = self
            .factors
            .iter_mut()
            .find(|f| f.variable == factor.variable)
        {
            if !existing.is_categorical() {
                existing.power += factor.power;
            }
        } else {
            self.factors.push(factor);
        }
    }

    // numeric factors print before categorical ones; otherwise keep insertion order
    fn order_for_display(&mut self) {
        self.factors.sort_by_key(Factor::is_categorical);
    }

    pub(crate) fn canonical(&self) -> Term {
        Term {
            factors: self.canonical_factors().into_iter().cloned().collect(),
        }
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        self.factors.len() == other.factors.len()
            && self.canonical_factors() == other.canonical_factors()
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.canonical_factors().hash(state);
    }
}

impl Ord for Term {
    /// Fewer factors first, then lexicographic over the sorted factors.
    fn cmp(&self, other: &Self) -> Ordering {
        self.factors
            .len()
            .cmp(&other.factors.len())
            .then_with(|| self.canonical_factors().cmp(&other.canonical_factors()))
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A flat sum of distinct terms.
#[derive(Debug, Clone, Default)]
pub struct Expression {
    terms: Vec<Term>,
}

impl Expression {
    pub fn empty() -> Self {
        Expression::default()
    }

    /// The constant `1`.
    pub fn one() -> Self {
        Expression::from_term(Term::intercept())
    }

    pub fn from_term(term: Term) -> Self {
        Expression { terms: vec![term] }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = Term>) -> Self {
        let mut e = Expression::empty();
        for t in terms {
            e.push(t);
        }
        e
    }

    pub fn from_factor(factor: Factor) -> Self {
        Expression::from_term(Term::from_factor(factor))
    }

    /// `Q(name)`
    pub fn quantitative(name: impl Into<String>) -> Self {
        Expression::from_factor(Factor::quantitative(name))
    }

    /// `C(name)`
    pub fn categorical(name: impl Into<String>) -> Self {
        Expression::from_factor(Factor::categorical(name))
    }

    /// `C(name, baseline=level)`
    pub fn categorical_with_baseline(name: impl Into<String>, baseline: impl Into<String>) -> Self {
        Expression::from_factor(Factor::categorical_with_baseline(name, baseline))
    }

    /// `V(name)`: type inferred from the data.
    pub fn untyped(name: impl Into<String>) -> Self {
        Expression::from_factor(Factor::untyped(name))
    }

    pub fn transform(kind: TransformKind, inner: Expression) -> Result<Self> {
        Ok(Expression::from_factor(Factor::transformed(kind, inner)?))
    }

    /// Terms in display order.
    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn canonical_terms(&self) -> Vec<&Term> {
        let mut v: Vec<&Term> = self.terms.iter().collect();
        v.sort();
        v
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn contains(&self, term: &Term) -> bool {
        self.terms.contains(term)
    }

    pub fn has_intercept(&self) -> bool {
        self.terms.iter().any(Term::is_intercept)
    }

    /// Union of terms; duplicates appear once.
    pub fn add(&self, other: &Expression) -> Expression {
        let mut out = self.clone();
        for t in &other.terms {
            out.push(t.clone());
        }
        out
    }

    /// Removes the terms of `other`. Removing an absent term is a no-op.
    pub fn subtract(&self, other: &Expression) -> Expression {
        Expression {
            terms: self
                .terms
                .iter()
                .filter(|t| !other.contains(t))
                .cloned()
                .collect(),
        }
    }

    /// Fully distributed product.
    pub fn multiply(&self, other: &Expression) -> Expression {
        let mut out = Expression::empty();
        for b in &other.terms {
            for a in &self.terms {
                out.push(a.multiply(b));
            }
        }
        out
    }

    /// Raises the expression to a positive integer power. Single terms have
    /// their factor powers scaled; sums are expanded by repeated products.
    pub fn pow(&self, k: u32) -> Result<Expression> {
        if k == 0 {
            return Err(Error::InvalidPower("0".into()));
        }
        if let [term] = self.terms.as_slice() {
            return Ok(Expression::from_term(term.pow(k)?));
        }
        let mut out = self.clone();
        for _ in 1..k {
            out = out.multiply(self);
        }
        Ok(out)
    }

    /// `Poly(v, k)` = `v + v^2 + ... + v^k`.
    pub fn poly(factor: &Factor, k: u32) -> Result<Expression> {
        if k == 0 {
            return Err(Error::InvalidPower("0".into()));
        }
        if let Variable::Categorical { name, .. } = factor.variable() {
            return Err(Error::PolyOfCategorical(name.clone()));
        }
        let mut out = Expression::empty();
        for i in 1..=k {
            out.push(Term::from_factor(factor.with_power(factor.power() * i)?));
        }
        Ok(out)
    }

    /// Terms sorted canonically, each with canonically ordered factors.
    pub fn canonical(&self) -> Expression {
        Expression {
            terms: self.canonical_terms().into_iter().map(Term::canonical).collect(),
        }
    }

    pub fn without_intercept(&self) -> Expression {
        Expression {
            terms: self
                .terms
                .iter()
                .filter(|t| !t.is_intercept())
                .cloned()
                .collect(),
        }
    }

    /// All column names referenced, including inside transformations.
    pub fn variable_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names(&self, out: &mut BTreeSet<String>) {
        for t in &self.terms {
            for f in &t.factors {
                f.variable.collect_names(out);
            }
        }
    }

    fn categorical_names(&self) -> Vec<String> {
        self.terms
            .iter()
            .flat_map(|t| t.factors.iter())
            .filter_map(|f| match &f.variable {
                Variable::Categorical { name, .. } => Some(name.clone()),
                _ => None,
            })
            .collect()
    }

    fn push(&mut self, term: Term) {
        if !self.terms.contains(&term) {
            self.terms.push(term);
        }
    }
}

impl PartialEq for Expression {
    fn eq(&self, other: &Self) -> bool {
        self.terms.len() == other.terms.len() && self.canonical_terms() == other.canonical_terms()
    }
}

impl Eq for Expression {}

impl Hash for Expression {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.canonical_terms().hash(state);
    }
}

impl Ord for Expression {
    fn cmp(&self, other: &Self) -> Ordering {
        self.canonical_terms().cmp(&other.canonical_terms())
    }
}

impl PartialOrd for Expression {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<Factor> for Expression {
    fn from(f: Factor) -> Self {
        Expression::from_factor(f)
    }
}

impl From<Term> for Expression {
    fn from(t: Term) -> Self {
        Expression::from_term(t)
    }
}

impl std::ops::Add for Expression {
    type Output = Expression;
    fn add(self, rhs: Expression) -> Expression {
        Expression::add(&self, &rhs)
    }
}

impl std::ops::Sub for Expression {
    type Output = Expression;
    fn sub(self, rhs: Expression) -> Expression {
        self.subtract(&rhs)
    }
}

impl std::ops::Mul for Expression {
    type Output = Expression;
    fn mul(self, rhs: Expression) -> Expression {
        self.multiply(&rhs)
    }
}

impl Serialize for Expression {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_formula())
    }
}

impl<'de> Deserialize<'de> for Expression {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_expression(&s).map_err(serde::de::Error::custom)
    }
}

/// `response ~ [1 +] explanatory`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModelSpec {
    response: Expression,
    explanatory: Expression,
    intercept: bool,
}

impl ModelSpec {
    /// Model with an intercept. A constant `1` inside `explanatory` is
    /// absorbed into the intercept flag.
    pub fn new(explanatory: Expression, response: Expression) -> Result<Self> {
        ModelSpec::with_intercept(explanatory, response, true)
    }

    pub fn with_intercept(explanatory: Expression, response: Expression, intercept: bool) -> Result<Self> {
        match response.terms() {
            [t] if !t.is_intercept() => {}
            _ => {
                return Err(Error::InvalidModel(format!(
                    "response must be a single non-constant term, got `{response}`"
                )))
            }
        }
        let intercept = intercept || explanatory.has_intercept();
        Ok(ModelSpec {
            explanatory: explanatory.without_intercept(),
            response,
            intercept,
        })
    }

    pub fn response(&self) -> &Expression {
        &self.response
    }

    pub fn response_term(&self) -> &Term {
        &self.response.terms()[0]
    }

    pub fn explanatory(&self) -> &Expression {
        &self.explanatory
    }

    pub fn has_intercept(&self) -> bool {
        self.intercept
    }

    /// `m - 1`
    pub fn remove_intercept(&self) -> ModelSpec {
        ModelSpec {
            intercept: false,
            ..self.clone()
        }
    }

    /// Same response and intercept flag, different explanatory terms.
    pub fn with_terms(&self, explanatory: Expression) -> ModelSpec {
        ModelSpec {
            explanatory: explanatory.without_intercept(),
            response: self.response.clone(),
            intercept: self.intercept,
        }
    }

    /// Every column referenced by the response or explanatory side.
    pub fn variable_names(&self) -> BTreeSet<String> {
        let mut names = self.response.variable_names();
        names.extend(self.explanatory.variable_names());
        names
    }
}

impl Serialize for ModelSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_formula())
    }
}

impl<'de> Deserialize<'de> for ModelSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_model(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: &str) -> Expression {
        Expression::quantitative(n)
    }

    fn c(n: &str) -> Expression {
        Expression::categorical(n)
    }

    #[test]
    fn add_is_idempotent() {
        assert_eq!(q("SqFt") + q("SqFt"), q("SqFt"));
        assert_eq!((q("SqFt") + q("SqFt")).len(), 1);
    }

    #[test]
    fn add_keeps_distinct_terms() {
        let e = c("Style") + c("Fire");
        assert_eq!(e.len(), 2);
        let e = q("SqFt") + q("SqFt").pow(2).unwrap();
        assert_eq!(e.len(), 2);
    }

    #[test]
    fn multiply_distributes() {
        let e = (c("Style") + c("Fire")) * q("SqFt");
        let expected = Expression::from_terms([
            Term::from_factors([Factor::quantitative("SqFt"), Factor::categorical("Style")]),
            Term::from_factors([Factor::quantitative("SqFt"), Factor::categorical("Fire")]),
        ]);
        assert_eq!(e, expected);
        assert_eq!(e.to_string(), "(SqFt)(Style) + (SqFt)(Fire)");
    }

    #[test]
    fn multiply_with_one_is_identity() {
        let e = (Expression::one() + c("Style")) * (Expression::one() + c("Fire"));
        assert_eq!(e.len(), 4);
        assert_eq!(e.to_string(), "1 + Style + Fire + (Style)(Fire)");
    }

    #[test]
    fn multiply_merges_powers() {
        assert_eq!(q("SqFt") * q("SqFt"), q("SqFt").pow(2).unwrap());
    }

    #[test]
    fn power_rules() {
        assert_eq!(q("SqFt").pow(2).unwrap().to_string(), "SqFt^2");
        assert_eq!(c("Style").pow(2).unwrap(), c("Style"));
        let sq = q("SqFt").pow(2).unwrap();
        assert_eq!(sq.pow(1).unwrap(), sq);
        assert!(matches!(q("x").pow(0), Err(Error::InvalidPower(_))));
    }

    #[test]
    fn power_of_sum_expands() {
        let e = (q("a") + q("b")).pow(2).unwrap();
        let expected = q("a").pow(2).unwrap() + q("a") * q("b") + q("b").pow(2).unwrap();
        assert_eq!(e, expected);
    }

    #[test]
    fn poly_expands() {
        let e = Expression::poly(&Factor::quantitative("SqFt"), 2).unwrap();
        assert_eq!(e, q("SqFt") + q("SqFt").pow(2).unwrap());
        let e = Expression::poly(&Factor::quantitative("SqFt"), 1).unwrap();
        assert_eq!(e, q("SqFt"));
        let cen = Factor::transformed(TransformKind::Center, q("SqFt")).unwrap();
        let e = Expression::poly(&cen, 2).unwrap();
        assert_eq!(e.to_string(), "(SqFt-E(SqFt)) + (SqFt-E(SqFt))^2");
        assert!(matches!(
            Expression::poly(&Factor::categorical("Style"), 2),
            Err(Error::PolyOfCategorical(_))
        ));
    }

    #[test]
    fn categorical_inside_transform_rejected() {
        assert!(matches!(
            Expression::transform(TransformKind::Log, c("Style")),
            Err(Error::CategoricalInTransform(_))
        ));
    }

    #[test]
    fn subtract_removes_terms() {
        let e = q("a") + q("b");
        assert_eq!(e.subtract(&q("b")), q("a"));
        assert_eq!(e.subtract(&q("z")), e);
    }

    #[test]
    fn remove_intercept_idempotent() {
        let m = ModelSpec::new(q("SqFt"), q("SalePrice")).unwrap();
        assert_eq!(m.to_string(), "SalePrice ~ 1 + SqFt");
        let once = m.remove_intercept();
        assert_eq!(once.to_string(), "SalePrice ~ SqFt");
        assert_eq!(once.remove_intercept(), once);
        let flag = ModelSpec::with_intercept(q("SqFt"), q("SalePrice"), false).unwrap();
        assert_eq!(flag, once);
    }

    #[test]
    fn full_model_prints_in_construction_order() {
        let (house, fire, sqft) = (c("Style"), c("Fire"), q("SqFt"));
        let cat_vars = house.clone() + fire.clone() + house * fire;
        let full = cat_vars.clone() + sqft.clone() + sqft * cat_vars;
        let resp = Expression::transform(TransformKind::Log, q("SalePrice")).unwrap();
        let m = ModelSpec::new(full, resp).unwrap();
        assert_eq!(
            m.to_string(),
            "Log(SalePrice) ~ 1 + Style + Fire + (Style)(Fire) + SqFt + (SqFt)(Style) + (SqFt)(Fire) + (SqFt)(Style)(Fire)"
        );
    }

    #[test]
    fn term_order_is_by_degree_then_name() {
        let a = Term::from_factor(Factor::quantitative("b"));
        let b = Term::from_factors([Factor::quantitative("a"), Factor::quantitative("c")]);
        let i = Term::intercept();
        let mut v = vec![b.clone(), a.clone(), i.clone()];
        v.sort();
        assert_eq!(v, vec![i, a, b]);
    }

    #[test]
    fn response_must_be_single_term() {
        assert!(ModelSpec::new(q("x"), q("a") + q("b")).is_err());
        assert!(ModelSpec::new(q("x"), Expression::one()).is_err());
    }
}
