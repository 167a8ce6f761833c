//! Expression language for functions `ℕ → ℝ`.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := power (('*' | '/') power)*
//! power   := unary ('^' power)?
//! unary   := '-' unary | primary
//! primary := number | 'n' | '(' expr ')' | call
//! call    := abs(e) | neg(e) | const(e) | geom(e) | pow(e, e)
//!          | min(e, e) | max(e, e) | indicator(Name)
//! ```
//!
//! A `-` written directly before a numeric literal is folded into the literal.
//! Products follow the measure-theoretic convention `0 · x = 0`, even when
//! `x` is undefined at that point.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::space::{Finiteness, MeasurableSet, SetKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier `{name}` at position {position}")]
    UnknownIdentifier { name: String, position: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("division by zero at n = {n}")]
    DivisionByZero { n: u64 },
    #[error("non-finite value at n = {n}")]
    NonFinite { n: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Abs,
    Neg,
    Const,
    Geom,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Index,
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Indicator { name: String, set: MeasurableSet },
}

/// Named sets that `indicator(..)` may refer to.
pub type SetBindings = BTreeMap<String, MeasurableSet>;

#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn num(x: f64) -> Expr {
        Expr::Num(x)
    }

    pub fn indicator(name: impl Into<String>, set: MeasurableSet) -> Expr {
        Expr::Indicator {
            name: name.into(),
            set,
        }
    }

    pub fn unary(op: UnOp, e: Expr) -> Expr {
        Expr::Unary(op, Box::new(e))
    }

    pub fn binary(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn abs(self) -> Expr {
        Expr::unary(UnOp::Abs, self)
    }

    pub fn add(self, rhs: Expr) -> Expr {
        Expr::binary(BinOp::Add, self, rhs)
    }

    pub fn mul(self, rhs: Expr) -> Expr {
        Expr::binary(BinOp::Mul, self, rhs)
    }

    pub fn div(self, rhs: Expr) -> Expr {
        Expr::binary(BinOp::Div, self, rhs)
    }

    pub fn powf(self, exponent: f64) -> Expr {
        Expr::binary(BinOp::Pow, self, Expr::Num(exponent))
    }

    pub fn parse(text: &str, sets: &SetBindings) -> Result<Expr, ParseError> {
        let tokens = lex(text)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            end: text.len(),
            sets,
        };
        let e = p.expr()?;
        match p.peek() {
            None => Ok(e),
            Some(t) => Err(ParseError::Syntax {
                position: t.position,
                message: format!("unexpected {}", t.kind),
            }),
        }
    }

    pub fn eval(&self, n: u64) -> Result<f64, EvalError> {
        let v = self.eval_raw(n)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite { n })
        }
    }

    fn eval_raw(&self, n: u64) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Num(x) => *x,
            Expr::Index => n as f64,
            Expr::Indicator { set, .. } => {
                if set.member(n) {
                    1.0
                } else {
                    0.0
                }
            }
            Expr::Unary(op, e) => {
                let x = e.eval_raw(n)?;
                match op {
                    UnOp::Abs => x.abs(),
                    UnOp::Neg => -x,
                    UnOp::Const => x,
                    UnOp::Geom => checked_pow(x, n as f64, n)?,
                }
            }
            Expr::Binary(BinOp::Mul, a, b) => {
                // 0 · x = 0, whatever x is
                match a.eval_raw(n) {
                    Ok(0.0) => 0.0,
                    Ok(x) => {
                        let y = b.eval_raw(n)?;
                        if y == 0.0 {
                            0.0
                        } else {
                            x * y
                        }
                    }
                    Err(e) => match b.eval_raw(n) {
                        Ok(0.0) => 0.0,
                        _ => return Err(e),
                    },
                }
            }
            Expr::Binary(op, a, b) => {
                let x = a.eval_raw(n)?;
                let y = b.eval_raw(n)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Div => {
                        if y == 0.0 {
                            return Err(EvalError::DivisionByZero { n });
                        }
                        x / y
                    }
                    BinOp::Pow => checked_pow(x, y, n)?,
                    BinOp::Min => x.min(y),
                    BinOp::Max => x.max(y),
                    BinOp::Mul => unreachable!(),
                }
            }
        })
    }

    /// Interval enclosing every value the expression takes on `[from, ∞)`.
    /// `None` when no finite enclosure can be established.
    pub fn range_from(&self, from: u64) -> Option<Interval> {
        let r = self.range_raw(from)?;
        (r.lo.is_finite() && r.hi.is_finite()).then_some(r)
    }

    fn range_raw(&self, from: u64) -> Option<Interval> {
        self.range_node(from)
            .filter(|r| !r.lo.is_nan() && !r.hi.is_nan())
    }

    fn range_node(&self, from: u64) -> Option<Interval> {
        match self {
            Expr::Num(x) => Some(Interval::point(*x)),
            Expr::Index => Some(Interval::new(from as f64, f64::INFINITY)),
            Expr::Indicator { set, .. } => Some(indicator_range(set, from)),
            Expr::Unary(op, e) => {
                let r = e.range_raw(from)?;
                match op {
                    UnOp::Abs => Some(r.abs()),
                    UnOp::Neg => Some(Interval::new(-r.hi, -r.lo)),
                    UnOp::Const => Some(r),
                    UnOp::Geom => geom_range(r, from),
                }
            }
            Expr::Binary(BinOp::Mul, a, b) => {
                // 0 · x = 0 holds for unbounded x too
                let zero = Interval::point(0.0);
                match (a.range_raw(from), b.range_raw(from)) {
                    (Some(x), _) | (_, Some(x)) if x == zero => Some(zero),
                    (Some(x), Some(y)) => x.mul(y),
                    _ => None,
                }
            }
            Expr::Binary(op, a, b) => {
                let x = a.range_raw(from)?;
                let y = b.range_raw(from)?;
                match op {
                    BinOp::Add => Some(Interval::new(x.lo + y.lo, x.hi + y.hi)),
                    BinOp::Sub => Some(Interval::new(x.lo - y.hi, x.hi - y.lo)),
                    BinOp::Mul => unreachable!(),
                    BinOp::Div => x.div(y),
                    BinOp::Pow => pow_range(x, y),
                    BinOp::Min => Some(Interval::new(x.lo.min(y.lo), x.hi.min(y.hi))),
                    BinOp::Max => Some(Interval::new(x.lo.max(y.lo), x.hi.max(y.hi))),
                }
            }
        }
    }
}

fn checked_pow(x: f64, y: f64, n: u64) -> Result<f64, EvalError> {
    if x == 0.0 && y < 0.0 {
        return Err(EvalError::DivisionByZero { n });
    }
    let v = x.powf(y);
    if v.is_nan() {
        Err(EvalError::NonFinite { n })
    } else {
        Ok(v)
    }
}

/// Closed interval `[lo, hi]`; bounds may be infinite during propagation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn sup_abs(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    fn abs(self) -> Interval {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            Interval::new(-self.hi, -self.lo)
        } else {
            Interval::new(0.0, self.sup_abs())
        }
    }

    fn mul(self, o: Interval) -> Option<Interval> {
        // zero factors win, matching the evaluation convention
        if self == Interval::point(0.0) || o == Interval::point(0.0) {
            return Some(Interval::point(0.0));
        }
        let c = [
            self.lo * o.lo,
            self.lo * o.hi,
            self.hi * o.lo,
            self.hi * o.hi,
        ];
        if c.iter().any(|v| v.is_nan()) {
            return None;
        }
        Some(Interval::new(
            c.iter().copied().fold(f64::INFINITY, f64::min),
            c.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        ))
    }

    fn div(self, o: Interval) -> Option<Interval> {
        if o.lo <= 0.0 && o.hi >= 0.0 {
            return None;
        }
        self.mul(Interval::new(1.0 / o.hi, 1.0 / o.lo))
    }
}

fn indicator_range(set: &MeasurableSet, from: u64) -> Interval {
    match set.kind() {
        SetKind::Finite(v) => {
            if v.last().is_some_and(|&m| m >= from) {
                Interval::new(0.0, 1.0)
            } else {
                Interval::point(0.0)
            }
        }
        SetKind::Cofinite(v) => {
            if v.last().is_some_and(|&m| m >= from) {
                Interval::new(0.0, 1.0)
            } else {
                Interval::point(1.0)
            }
        }
        SetKind::Predicate { .. } => match set.finiteness() {
            Finiteness::Finite { bound } if bound <= from => Interval::point(0.0),
            _ => Interval::new(0.0, 1.0),
        },
    }
}

fn geom_range(r: Interval, from: u64) -> Option<Interval> {
    if r.lo != r.hi {
        return None;
    }
    let base = r.lo;
    if base.abs() > 1.0 {
        return None;
    }
    let m = base.abs().powf(from as f64);
    if base >= 0.0 {
        Some(Interval::new(0.0, m))
    } else {
        Some(Interval::new(-m, m))
    }
}

fn pow_range(base: Interval, exp: Interval) -> Option<Interval> {
    if exp.lo != exp.hi || base.lo < 0.0 {
        return None;
    }
    let e = exp.lo;
    if e == 0.0 {
        return Some(Interval::point(1.0));
    }
    if e > 0.0 {
        Some(Interval::new(base.lo.powf(e), base.hi.powf(e)))
    } else if base.lo > 0.0 {
        Some(Interval::new(base.hi.powf(e), base.lo.powf(e)))
    } else {
        None
    }
}

// --- printing ---------------------------------------------------------------

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{x:?}"),
            Expr::Index => f.write_str("n"),
            Expr::Indicator { name, .. } => write!(f, "indicator({name})"),
            Expr::Unary(op, e) => {
                let name = match op {
                    UnOp::Abs => "abs",
                    UnOp::Neg => "neg",
                    UnOp::Const => "const",
                    UnOp::Geom => "geom",
                };
                write!(f, "{name}({e})")
            }
            Expr::Binary(op, a, b) => match op {
                BinOp::Min => write!(f, "min({a}, {b})"),
                BinOp::Max => write!(f, "max({a}, {b})"),
                _ => {
                    let sym = match op {
                        BinOp::Add => "+",
                        BinOp::Sub => "-",
                        BinOp::Mul => "*",
                        BinOp::Div => "/",
                        BinOp::Pow => "^",
                        _ => unreachable!(),
                    };
                    write!(f, "({a} {sym} {b})")
                }
            },
        }
    }
}

// --- lexing -----------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum TokKind {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

impl fmt::Display for TokKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokKind::Num(x) => write!(f, "number {x}"),
            TokKind::Ident(s) => write!(f, "identifier `{s}`"),
            TokKind::Plus => f.write_str("`+`"),
            TokKind::Minus => f.write_str("`-`"),
            TokKind::Star => f.write_str("`*`"),
            TokKind::Slash => f.write_str("`/`"),
            TokKind::Caret => f.write_str("`^`"),
            TokKind::LParen => f.write_str("`(`"),
            TokKind::RParen => f.write_str("`)`"),
            TokKind::Comma => f.write_str("`,`"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokKind,
    position: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let kind = match c {
            b'+' => TokKind::Plus,
            b'-' => TokKind::Minus,
            b'*' => TokKind::Star,
            b'/' => TokKind::Slash,
            b'^' => TokKind::Caret,
            b'(' => TokKind::LParen,
            b')' => TokKind::RParen,
            b',' => TokKind::Comma,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let s = &text[start..i];
                let v: f64 = s.parse().map_err(|_| ParseError::Syntax {
                    position: start,
                    message: format!("malformed number `{s}`"),
                })?;
                out.push(Token {
                    kind: TokKind::Num(v),
                    position: start,
                });
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token {
                    kind: TokKind::Ident(text[start..i].to_string()),
                    position: start,
                });
                continue;
            }
            _ => {
                return Err(ParseError::Syntax {
                    position: start,
                    message: format!(
                        "unexpected character `{}`",
                        text[start..].chars().next().unwrap()
                    ),
                })
            }
        };
        out.push(Token {
            kind,
            position: start,
        });
        i += 1;
    }
    Ok(out)
}

// --- parsing ----------------------------------------------------------------

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
    sets: &'a SetBindings,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn here(&self) -> usize {
        self.peek().map_or(self.end, |t| t.position)
    }

    fn eat(&mut self, kind: &TokKind) -> bool {
        if self.peek().map(|t| &t.kind) == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokKind) -> Result<(), ParseError> {
        if self.eat(&kind) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("expected {kind}")))
        }
    }

    fn unexpected(&self, what: &str) -> ParseError {
        let found = match self.peek() {
            Some(t) => format!("found {}", t.kind),
            None => "found end of input".to_string(),
        };
        ParseError::Syntax {
            position: self.here(),
            message: format!("{what}, {found}"),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat(&TokKind::Plus) {
                BinOp::Add
            } else if self.eat(&TokKind::Minus) {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.power()?;
        loop {
            let op = if self.eat(&TokKind::Star) {
                BinOp::Mul
            } else if self.eat(&TokKind::Slash) {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.power()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.unary()?;
        if self.eat(&TokKind::Caret) {
            let exp = self.power()?;
            Ok(Expr::binary(BinOp::Pow, base, exp))
        } else {
            Ok(base)
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&TokKind::Minus) {
            if let Some(Token {
                kind: TokKind::Num(x),
                ..
            }) = self.peek()
            {
                let x = *x;
                self.pos += 1;
                return Ok(Expr::Num(-x));
            }
            let e = self.unary()?;
            return Ok(Expr::unary(UnOp::Neg, e));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.unexpected("expected an expression"));
        };
        match tok.kind {
            TokKind::Num(x) => {
                self.pos += 1;
                Ok(Expr::Num(x))
            }
            TokKind::LParen => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(TokKind::RParen)?;
                Ok(e)
            }
            TokKind::Ident(name) => {
                self.pos += 1;
                self.identifier(name, tok.position)
            }
            _ => Err(self.unexpected("expected an expression")),
        }
    }

    fn identifier(&mut self, name: String, position: usize) -> Result<Expr, ParseError> {
        if name == "n" {
            return Ok(Expr::Index);
        }
        let unary = match name.as_str() {
            "abs" => Some(UnOp::Abs),
            "neg" => Some(UnOp::Neg),
            "const" => Some(UnOp::Const),
            "geom" => Some(UnOp::Geom),
            _ => None,
        };
        let binary = match name.as_str() {
            "pow" => Some(BinOp::Pow),
            "min" => Some(BinOp::Min),
            "max" => Some(BinOp::Max),
            _ => None,
        };
        if let Some(op) = unary {
            self.expect(TokKind::LParen)?;
            let e = self.expr()?;
            self.expect(TokKind::RParen)?;
            return Ok(Expr::unary(op, e));
        }
        if let Some(op) = binary {
            self.expect(TokKind::LParen)?;
            let a = self.expr()?;
            self.expect(TokKind::Comma)?;
            let b = self.expr()?;
            self.expect(TokKind::RParen)?;
            return Ok(Expr::binary(op, a, b));
        }
        if name == "indicator" {
            self.expect(TokKind::LParen)?;
            let Some(Token {
                kind: TokKind::Ident(set_name),
                position: set_pos,
            }) = self.peek().cloned()
            else {
                return Err(self.unexpected("expected a set name"));
            };
            self.pos += 1;
            let set = self
                .sets
                .get(&set_name)
                .cloned()
                .ok_or(ParseError::UnknownIdentifier {
                    name: set_name.clone(),
                    position: set_pos,
                })?;
            self.expect(TokKind::RParen)?;
            return Ok(Expr::indicator(set_name, set));
        }
        Err(ParseError::UnknownIdentifier { name, position })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bindings() -> SetBindings {
        let mut b = SetBindings::new();
        b.insert("A".into(), MeasurableSet::finite([0]));
        b.insert("E".into(), MeasurableSet::even());
        b
    }

    fn parse(s: &str) -> Result<Expr, ParseError> {
        Expr::parse(s, &bindings())
    }

    #[test]
    fn indicator_times_constant() {
        let e = parse("indicator(A) * 2").unwrap();
        assert_eq!(e.eval(0).unwrap(), 2.0);
        assert_eq!(e.eval(1).unwrap(), 0.0);
        assert_eq!(e.eval(9).unwrap(), 0.0);
    }

    #[test]
    fn geom_is_power_of_ratio() {
        assert_eq!(parse("geom(0.5)").unwrap().eval(3).unwrap(), 0.125);
    }

    #[test]
    fn dangling_operator_reports_position() {
        assert_eq!(
            parse("1 +"),
            Err(ParseError::Syntax {
                position: 3,
                message: "expected an expression, found end of input".into()
            })
        );
    }

    #[test]
    fn unknown_identifiers() {
        assert!(matches!(
            parse("foo + 1"),
            Err(ParseError::UnknownIdentifier { position: 0, .. })
        ));
        assert!(matches!(
            parse("indicator(B)"),
            Err(ParseError::UnknownIdentifier { position: 10, .. })
        ));
    }

    #[test]
    fn precedence() {
        assert_eq!(parse("1 + 2 * 3").unwrap().eval(0).unwrap(), 7.0);
        assert_eq!(parse("2 * 3 ^ 2").unwrap().eval(0).unwrap(), 18.0);
        assert_eq!(parse("2 ^ 3 ^ 2").unwrap().eval(0).unwrap(), 512.0);
        assert_eq!(parse("-2 ^ 2").unwrap().eval(0).unwrap(), 4.0);
        assert_eq!(parse("- n ^ 2").unwrap().eval(3).unwrap(), 9.0);
        assert_eq!(parse("8 / 2 / 2").unwrap().eval(0).unwrap(), 2.0);
        assert_eq!(parse("1 - 2 - 3").unwrap().eval(0).unwrap(), -4.0);
        assert_eq!(
            parse("max(n, 3) + min(1, n)").unwrap().eval(5).unwrap(),
            6.0
        );
        assert_eq!(parse("  abs( neg(3) ) ").unwrap().eval(0).unwrap(), 3.0);
        assert_eq!(parse("pow(2, -1)").unwrap().eval(0).unwrap(), 0.5);
        assert_eq!(parse("1.5e1").unwrap().eval(0).unwrap(), 15.0);
    }

    #[test]
    fn evaluation_errors() {
        assert_eq!(
            parse("1 / (n - 2)").unwrap().eval(2),
            Err(EvalError::DivisionByZero { n: 2 })
        );
        assert_eq!(
            parse("n ^ -1").unwrap().eval(0),
            Err(EvalError::DivisionByZero { n: 0 })
        );
        assert!(parse("(-1) ^ 0.5").unwrap().eval(0).is_err());
        // a zero factor absorbs an undefined one
        assert_eq!(
            parse("indicator(A) * n ^ -1").unwrap().eval(1).unwrap(),
            0.0
        );
        assert_eq!(parse("0 ^ 0.5").unwrap().eval(0).unwrap(), 0.0);
    }

    #[test]
    fn tail_ranges() {
        let r = parse("geom(0.5) * 3").unwrap().range_from(4).unwrap();
        assert_eq!(r, Interval::new(0.0, 3.0 / 16.0));
        assert_eq!(
            parse("indicator(A) * 7").unwrap().range_from(1).unwrap(),
            Interval::point(0.0)
        );
        assert_eq!(
            parse("indicator(E)").unwrap().range_from(1).unwrap(),
            Interval::new(0.0, 1.0)
        );
        assert!(parse("n").unwrap().range_from(0).is_none());
        assert!(parse("geom(2)").unwrap().range_from(0).is_none());
        assert_eq!(
            parse("abs(1 - 3)^2").unwrap().range_from(0).unwrap(),
            Interval::point(4.0)
        );
        assert_eq!(
            parse("1 / (1 + geom(0.5))")
                .unwrap()
                .range_from(1)
                .unwrap()
                .hi,
            1.0
        );
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (-100.0f64..100.0).prop_map(Expr::Num),
            Just(Expr::Index),
            Just(Expr::indicator("A", MeasurableSet::finite([0]))),
            Just(Expr::indicator("E", MeasurableSet::even())),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            prop_oneof![
                (
                    prop_oneof![
                        Just(UnOp::Abs),
                        Just(UnOp::Neg),
                        Just(UnOp::Const),
                        Just(UnOp::Geom)
                    ],
                    inner.clone()
                )
                    .prop_map(|(op, e)| Expr::unary(op, e)),
                (
                    prop_oneof![
                        Just(BinOp::Add),
                        Just(BinOp::Sub),
                        Just(BinOp::Mul),
                        Just(BinOp::Div),
                        Just(BinOp::Pow),
                        Just(BinOp::Min),
                        Just(BinOp::Max)
                    ],
                    inner.clone(),
                    inner
                )
                    .prop_map(|(op, a, b)| Expr::binary(op, a, b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_then_parse_is_identity(e in arb_expr()) {
            let printed = e.to_string();
            let back = parse(&printed).unwrap();
            prop_assert_eq!(&back, &e);
            prop_assert_eq!(back.to_string(), printed);
        }

        #[test]
        fn range_encloses_values(e in arb_expr(), from in 0u64..8) {
            if let Some(r) = e.range_from(from) {
                for n in from..from + 24 {
                    if let Ok(v) = e.eval(n) {
                        let slack = 1e-9 * (1.0 + v.abs());
                        prop_assert!(v >= r.lo - slack && v <= r.hi + slack,
                            "{} at {} = {} outside [{}, {}]", e, n, v, r.lo, r.hi);
                    }
                }
            }
        }
    }
}
