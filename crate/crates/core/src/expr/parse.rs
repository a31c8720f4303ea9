//! Recursive-descent parser for formula text.
//!
//! ```text
//! model := sum "~" ["-"] sum
//! sum   := prod (("+" | "-") prod)*
//! prod  := pow (("*" | "/" | <juxtaposed "(">) pow)*
//! pow   := atom [("^" | "**") INT]
//! atom  := NUMBER | NAME | Q(NAME) | C(NAME [, baseline=LEVEL]) | V(NAME)
//!        | TRANS "(" sum ")" | Poly "(" sum "," INT ")" | "(" sum ")"
//! ```
//!
//! Numeric constants fold at parse time. Inside a sum only the constant `1`
//! may appear (as the intercept); scaling by a constant is absorbed.
//! `(x-E(x))` is read back as `Cen(x)`.

use super::{Expression, Factor, ModelSpec, Term, TransformKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Quoted(String),
    Number(f64, String),
    Plus,
    Minus,
    Star,
    StarStar,
    Slash,
    Caret,
    Tilde,
    LParen,
    RParen,
    Comma,
    Equals,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("name `{s}`"),
            Tok::Quoted(s) => format!("quoted name \"{s}\""),
            Tok::Number(_, s) => format!("number `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::StarStar => "`**`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::Tilde => "`~`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Equals => "`=`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

/// Token plus its 1-based column.
type Spanned = (Tok, usize);

fn syntax(column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        column,
        message: message.into(),
    }
}

fn tokenize(src: &str) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '~' => Some(Tok::Tilde),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '=' => Some(Tok::Equals),
            _ => None,
        };
        if let Some(tok) = single {
            out.push((tok, col));
            i += 1;
            continue;
        }
        if c == '*' {
            if chars.get(i + 1) == Some(&'*') {
                out.push((Tok::StarStar, col));
                i += 2;
            } else {
                out.push((Tok::Star, col));
                i += 1;
            }
            continue;
        }
        if c == '"' || c == '\'' || c == '`' {
            let quote = c;
            let mut s = String::new();
            i += 1;
            loop {
                match chars.get(i) {
                    None => return Err(syntax(col, "unterminated quoted name")),
                    Some('\\') => {
                        match chars.get(i + 1) {
                            Some(&next) => s.push(next),
                            None => return Err(syntax(col, "unterminated quoted name")),
                        }
                        i += 2;
                    }
                    Some(&ch) if ch == quote => {
                        i += 1;
                        break;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            out.push((Tok::Quoted(s), col));
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value = text
                .parse::<f64>()
                .map_err(|_| syntax(col, format!("malformed number `{text}`")))?;
            out.push((Tok::Number(value, text), col));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '.') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
            continue;
        }
        return Err(syntax(col, format!("unexpected character `{c}`")));
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

/// Intermediate parse value: folded constants, expressions, and the `E(x)`
/// marker that only appears in `(x-E(x))`.
#[derive(Debug, Clone)]
enum Value {
    Const(f64),
    Expr(Expression),
    Mean(Expression),
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    /// Set when a top-level `- 1` removed the intercept.
    intercept_removed: bool,
}

impl Parser {
    fn new(src: &str) -> Result<Self> {
        Ok(Parser {
            toks: tokenize(src)?,
            pos: 0,
            intercept_removed: false,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn column(&self) -> usize {
        self.toks[self.pos].1
    }

    fn next(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        if *self.peek() == tok {
            self.next();
            Ok(())
        } else {
            Err(syntax(
                self.column(),
                format!("expected {}, found {}", tok.describe(), self.peek().describe()),
            ))
        }
    }

    fn model(&mut self) -> Result<ModelSpec> {
        let col = self.column();
        let response = match self.sum(false)? {
            Value::Expr(e) => e,
            _ => return Err(syntax(col, "response must be a variable expression")),
        };
        self.expect(Tok::Tilde)?;
        let rhs_col = self.column();
        let explanatory = match self.sum(true)? {
            Value::Expr(e) => e,
            Value::Const(c) if c == 1.0 => Expression::one(),
            Value::Const(c) if c == 0.0 => {
                self.intercept_removed = true;
                Expression::empty()
            }
            _ => return Err(syntax(rhs_col, "right-hand side must be a sum of terms")),
        };
        self.finish()?;
        let intercept = !self.intercept_removed || explanatory.has_intercept();
        ModelSpec::with_intercept(explanatory, response, intercept)
    }

    fn finish(&mut self) -> Result<()> {
        if *self.peek() != Tok::End {
            return Err(syntax(
                self.column(),
                format!("unexpected {}", self.peek().describe()),
            ));
        }
        Ok(())
    }

    fn sum(&mut self, top: bool) -> Result<Value> {
        let col = self.column();
        let acc = self.sum_allowing_mean(top)?;
        if let Value::Mean(_) = acc {
            return Err(syntax(col, "E(...) is only valid in the centering form (x-E(x))"));
        }
        Ok(acc)
    }

    /// `x - E(x)` is only accepted directly inside parentheses.
    fn sum_allowing_mean(&mut self, top: bool) -> Result<Value> {
        let mut acc = if *self.peek() == Tok::Minus {
            let col = self.column();
            self.next();
            let rhs = self.prod()?;
            self.combine_sub(Value::Expr(Expression::empty()), rhs, col, top)?
        } else {
            self.prod()?
        };
        loop {
            let col = self.column();
            match self.peek() {
                Tok::Plus => {
                    self.next();
                    let rhs = self.prod()?;
                    acc = self.combine_add(acc, rhs, col, top)?;
                }
                Tok::Minus => {
                    self.next();
                    let rhs = self.prod()?;
                    acc = self.combine_sub(acc, rhs, col, top)?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn combine_add(&mut self, lhs: Value, rhs: Value, col: usize, top: bool) -> Result<Value> {
        match (lhs, rhs) {
            (Value::Const(a), Value::Const(b)) => Ok(Value::Const(a + b)),
            (Value::Expr(e), Value::Const(c)) | (Value::Const(c), Value::Expr(e)) => {
                if c == 1.0 {
                    Ok(Value::Expr(e.add(&Expression::one())))
                } else if c == 0.0 {
                    if top {
                        self.intercept_removed = true;
                    }
                    Ok(Value::Expr(e))
                } else {
                    Err(syntax(
                        col,
                        format!("additive constant {c} is not allowed; only the intercept 1"),
                    ))
                }
            }
            (Value::Expr(a), Value::Expr(b)) => Ok(Value::Expr(a.add(&b))),
            _ => Err(syntax(col, "E(...) is only valid in the centering form (x-E(x))")),
        }
    }

    fn combine_sub(&mut self, lhs: Value, rhs: Value, col: usize, top: bool) -> Result<Value> {
        match (lhs, rhs) {
            (Value::Const(a), Value::Const(b)) => Ok(Value::Const(a - b)),
            (Value::Expr(e), Value::Const(c)) if c == 1.0 => {
                if top {
                    self.intercept_removed = true;
                }
                Ok(Value::Expr(e.subtract(&Expression::one())))
            }
            (Value::Expr(e), Value::Const(c)) if c == 0.0 => Ok(Value::Expr(e)),
            (Value::Expr(_), Value::Const(c)) | (Value::Const(c), Value::Expr(_)) => Err(syntax(
                col,
                format!("additive constant {c} is not allowed; only the intercept 1"),
            )),
            (Value::Expr(a), Value::Expr(b)) => Ok(Value::Expr(a.subtract(&b))),
            (Value::Expr(a), Value::Mean(b)) => {
                if a == b {
                    Ok(Value::Expr(Expression::transform(TransformKind::Center, a)?))
                } else {
                    Err(syntax(col, format!("`{a}` does not match E({b})")))
                }
            }
            _ => Err(syntax(col, "E(...) is only valid in the centering form (x-E(x))")),
        }
    }

    fn prod(&mut self) -> Result<Value> {
        let mut acc = self.pow()?;
        loop {
            let col = self.column();
            match self.peek() {
                Tok::Star => {
                    self.next();
                    let rhs = self.pow()?;
                    acc = combine_mul(acc, rhs, col)?;
                }
                Tok::Slash => {
                    self.next();
                    let rhs = self.pow()?;
                    acc = combine_div(acc, rhs, col)?;
                }
                Tok::LParen => {
                    let rhs = self.pow()?;
                    acc = combine_mul(acc, rhs, col)?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn pow(&mut self) -> Result<Value> {
        let base = self.atom()?;
        if !matches!(self.peek(), Tok::Caret | Tok::StarStar) {
            return Ok(base);
        }
        self.next();
        let col = self.column();
        let k = self.exponent()?;
        match base {
            Value::Const(c) => Ok(Value::Const(c.powi(k as i32))),
            Value::Expr(e) => Ok(Value::Expr(e.pow(k)?)),
            Value::Mean(_) => Err(syntax(col, "E(...) cannot be raised to a power")),
        }
    }

    fn exponent(&mut self) -> Result<u32> {
        let col = self.column();
        let negative = if *self.peek() == Tok::Minus {
            self.next();
            true
        } else {
            false
        };
        match self.next() {
            (Tok::Number(v, text), _) => {
                if negative || v < 1.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
                    let shown = if negative { format!("-{text}") } else { text };
                    Err(Error::InvalidPower(shown))
                } else {
                    Ok(v as u32)
                }
            }
            (tok, _) => Err(syntax(
                col,
                format!("expected an integer exponent, found {}", tok.describe()),
            )),
        }
    }

    fn name(&mut self) -> Result<String> {
        let col = self.column();
        match self.next() {
            (Tok::Ident(s), _) | (Tok::Quoted(s), _) => Ok(s),
            (tok, _) => Err(syntax(col, format!("expected a column name, found {}", tok.describe()))),
        }
    }

    fn level(&mut self) -> Result<String> {
        let col = self.column();
        match self.next() {
            (Tok::Ident(s), _) | (Tok::Quoted(s), _) | (Tok::Number(_, s), _) => Ok(s),
            (tok, _) => Err(syntax(col, format!("expected a level, found {}", tok.describe()))),
        }
    }

    fn atom(&mut self) -> Result<Value> {
        let (tok, col) = self.next();
        match tok {
            Tok::Number(v, _) => Ok(Value::Const(v)),
            Tok::Quoted(s) => Ok(Value::Expr(Expression::untyped(s))),
            Tok::LParen => {
                let inner = self.sum_allowing_mean(false)?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) if *self.peek() == Tok::LParen => {
                self.next();
                let value = self.call(&name, col)?;
                self.expect(Tok::RParen)?;
                Ok(value)
            }
            Tok::Ident(name) => Ok(Value::Expr(Expression::untyped(name))),
            other => Err(syntax(col, format!("unexpected {}", other.describe()))),
        }
    }

    fn call(&mut self, name: &str, col: usize) -> Result<Value> {
        match name {
            "Q" => Ok(Value::Expr(Expression::quantitative(self.name()?))),
            "V" => Ok(Value::Expr(Expression::untyped(self.name()?))),
            "C" => {
                let var = self.name()?;
                if *self.peek() != Tok::Comma {
                    return Ok(Value::Expr(Expression::categorical(var)));
                }
                self.next();
                let key_col = self.column();
                match self.next() {
                    (Tok::Ident(k), _) if k == "baseline" => {}
                    (tok, _) => {
                        return Err(syntax(
                            key_col,
                            format!("expected `baseline=`, found {}", tok.describe()),
                        ))
                    }
                }
                self.expect(Tok::Equals)?;
                let level = self.level()?;
                Ok(Value::Expr(Expression::categorical_with_baseline(var, level)))
            }
            "E" => match self.sum(false)? {
                Value::Expr(e) => Ok(Value::Mean(e)),
                _ => Err(syntax(col, "E() needs a variable expression")),
            },
            _ if name.eq_ignore_ascii_case("poly") => {
                let inner_col = self.column();
                let inner = self.sum(false)?;
                self.expect(Tok::Comma)?;
                let k = self.exponent()?;
                let factor = single_factor(inner).ok_or_else(|| {
                    syntax(inner_col, "Poly() takes a single variable")
                })?;
                Ok(Value::Expr(Expression::poly(&factor, k)?))
            }
            _ => {
                let kind = TransformKind::from_name(name)
                    .ok_or_else(|| Error::UnknownTransform(name.to_string()))?;
                match self.sum(false)? {
                    Value::Expr(e) => Ok(Value::Expr(Expression::transform(kind, e)?)),
                    _ => Err(syntax(col, format!("{name}() of a constant is not a variable"))),
                }
            }
        }
    }
}

fn single_factor(v: Value) -> Option<Factor> {
    let Value::Expr(e) = v else { return None };
    match e.terms() {
        [t] if t.factors().len() == 1 => Some(t.factors()[0].clone()),
        _ => None,
    }
}

fn combine_mul(lhs: Value, rhs: Value, col: usize) -> Result<Value> {
    match (lhs, rhs) {
        (Value::Const(a), Value::Const(b)) => Ok(Value::Const(a * b)),
        (Value::Expr(e), Value::Const(c)) | (Value::Const(c), Value::Expr(e)) => {
            if c == 0.0 {
                Err(syntax(col, "multiplication by zero removes the term"))
            } else {
                // column scaling does not change a least-squares fit
                Ok(Value::Expr(e))
            }
        }
        (Value::Expr(a), Value::Expr(b)) => Ok(Value::Expr(a.multiply(&b))),
        _ => Err(syntax(col, "E(...) is only valid in the centering form (x-E(x))")),
    }
}

fn combine_div(lhs: Value, rhs: Value, col: usize) -> Result<Value> {
    match (lhs, rhs) {
        (_, Value::Const(c)) if c == 0.0 => Err(syntax(col, "division by zero")),
        (Value::Const(a), Value::Const(b)) => Ok(Value::Const(a / b)),
        (Value::Expr(e), Value::Const(_)) => Ok(Value::Expr(e)),
        (_, Value::Expr(e)) => Err(Error::DivisionByVariable(e.to_string())),
        _ => Err(syntax(col, "E(...) is only valid in the centering form (x-E(x))")),
    }
}

/// Parses `response ~ terms`.
pub fn parse_model(src: &str) -> Result<ModelSpec> {
    Parser::new(src)?.model()
}

/// Parses a bare expression such as `Q(a) + C(b)`. A lone `1` yields the
/// intercept term.
pub fn parse_expression(src: &str) -> Result<Expression> {
    let mut p = Parser::new(src)?;
    let col = p.column();
    let v = p.sum(false)?;
    p.finish()?;
    match v {
        Value::Expr(e) => Ok(e),
        Value::Const(c) if c == 1.0 => Ok(Expression::from_term(Term::intercept())),
        _ => Err(syntax(col, "expected a variable expression")),
    }
}
