//! Printing formulas.
//!
//! `Display` gives the compact human form (`Log(SalePrice) ~ 1 + SqFt`).
//! `to_formula` adds `Q(..)`/`C(..)` markers and baselines so the text parses
//! back to an identical spec.

use std::fmt;

use super::{Expression, Factor, ModelSpec, Term, TransformKind, Variable};

#[derive(Clone, Copy)]
struct Style {
    typed: bool,
}

fn is_plain_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

pub(crate) fn quote_name(s: &str) -> String {
    if is_plain_name(s) {
        s.to_string()
    } else {
        quote(s)
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

fn variable_text(v: &Variable, style: Style) -> String {
    match v {
        Variable::Quantitative(n) if style.typed => format!("Q({})", quote_name(n)),
        Variable::Quantitative(n) | Variable::Untyped(n) => quote_name(n),
        Variable::Categorical { name, baseline } if style.typed => match baseline {
            Some(b) => format!("C({}, baseline={})", quote_name(name), quote(b)),
            None => format!("C({})", quote_name(name)),
        },
        Variable::Categorical { name, .. } => quote_name(name),
        Variable::Transformed {
            kind: TransformKind::Center,
            inner,
        } => {
            let inner = expression_text(inner, style);
            format!("({inner}-E({inner}))")
        }
        Variable::Transformed { kind, inner } => {
            format!("{}({})", kind.name(), expression_text(inner, style))
        }
    }
}

fn factor_text(f: &Factor, style: Style) -> String {
    let base = variable_text(&f.variable, style);
    if f.power > 1 {
        format!("{base}^{}", f.power)
    } else {
        base
    }
}

/// True when `s` is a single parenthesized group, like `(x-E(x))`.
fn is_wrapped(s: &str) -> bool {
    if !s.starts_with('(') || !s.ends_with(')') {
        return false;
    }
    let mut depth = 0i32;
    let mut in_quote = false;
    let mut escaped = false;
    for (i, c) in s.char_indices() {
        if in_quote {
            match c {
                _ if escaped => escaped = false,
                '\\' => escaped = true,
                '"' => in_quote = false,
                _ => {}
            }
            continue;
        }
        match c {
            '"' => in_quote = true,
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
    true
}

fn term_text(t: &Term, style: Style) -> String {
    match t.factors.as_slice() {
        [] => "1".to_string(),
        [f] => factor_text(f, style),
        fs => fs
            .iter()
            .map(|f| {
                let s = factor_text(f, style);
                if is_wrapped(&s) {
                    s
                } else {
                    format!("({s})")
                }
            })
            .collect(),
    }
}

fn expression_text(e: &Expression, style: Style) -> String {
    if e.terms.is_empty() {
        return "0".to_string();
    }
    e.terms
        .iter()
        .map(|t| term_text(t, style))
        .collect::<Vec<_>>()
        .join(" + ")
}

fn model_text(m: &ModelSpec, style: Style) -> String {
    let response = expression_text(&m.response, style);
    let rhs = match (m.intercept, m.explanatory.is_empty()) {
        (true, true) => "1".to_string(),
        (true, false) => format!("1 + {}", expression_text(&m.explanatory, style)),
        (false, true) => "-1".to_string(),
        // the parser adds an intercept by default, so the typed form must say so
        (false, false) if style.typed => format!("{} - 1", expression_text(&m.explanatory, style)),
        (false, false) => expression_text(&m.explanatory, style),
    };
    format!("{response} ~ {rhs}")
}

const HUMAN: Style = Style { typed: false };
const TYPED: Style = Style { typed: true };

impl Factor {
    pub fn to_formula(&self) -> String {
        factor_text(self, TYPED)
    }
}

impl Term {
    /// Label used for design-matrix groups and table rows.
    pub fn label(&self) -> String {
        term_text(self, HUMAN)
    }

    pub fn to_formula(&self) -> String {
        term_text(self, TYPED)
    }
}

impl Expression {
    pub fn to_formula(&self) -> String {
        expression_text(self, TYPED)
    }
}

impl ModelSpec {
    /// Lossless formula text: parses back to an identical spec.
    pub fn to_formula(&self) -> String {
        model_text(self, TYPED)
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&factor_text(self, HUMAN))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&term_text(self, HUMAN))
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&expression_text(self, HUMAN))
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&model_text(self, HUMAN))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrapped_detection() {
        assert!(is_wrapped("(x-E(x))"));
        assert!(!is_wrapped("(x-E(x))^2"));
        assert!(!is_wrapped("(a)(b)"));
        assert!(is_wrapped("(\")\")"));
    }

    #[test]
    fn names_with_spaces_are_quoted() {
        assert_eq!(quote_name("SqFt"), "SqFt");
        assert_eq!(quote_name("1st Flr"), "\"1st Flr\"");
        assert_eq!(quote_name("a\"b"), "\"a\\\"b\"");
    }

    #[test]
    fn centered_power_inside_interaction_is_fully_parenthesized() {
        let cen = Factor::transformed(TransformKind::Center, Expression::quantitative("SqFt")).unwrap();
        let t = Term::from_factors([Factor::categorical("Fire"), cen.with_power(2).unwrap()]);
        assert_eq!(t.to_string(), "((SqFt-E(SqFt))^2)(Fire)");
        let t = Term::from_factors([Factor::categorical("Fire"), cen]);
        assert_eq!(t.to_string(), "(SqFt-E(SqFt))(Fire)");
    }

    #[test]
    fn typed_form_carries_markers() {
        let m = ModelSpec::new(
            Expression::categorical_with_baseline("Style", "1 Story") + Expression::quantitative("SqFt"),
            Expression::transform(TransformKind::Log, Expression::quantitative("SalePrice")).unwrap(),
        )
        .unwrap();
        assert_eq!(
            m.to_formula(),
            "Log(Q(SalePrice)) ~ 1 + C(Style, baseline=\"1 Story\") + Q(SqFt)"
        );
        assert_eq!(m.to_string(), "Log(SalePrice) ~ 1 + Style + SqFt");
    }
}
