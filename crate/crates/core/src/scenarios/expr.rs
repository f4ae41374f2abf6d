//! Rational expressions over chart coordinates.
//!
//! Grammar: identifiers, integer literals, `+ - * / ^`, parentheses. Exponents
//! are (possibly negative) integers; `p/q` literals are ordinary divisions.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::coefficients::FieldElement;
use crate::scalar::Scalar;
use crate::series::{Coeff, Laurent, SeriesError};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(BigRational),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
}

/// Syntax error; `offset` counts characters from the start of the expression.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at offset {offset}")]
pub struct SyntaxError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unknown identifier `{0}`")]
    UnknownVariable(String),
    #[error("denominator `{0}` vanishes identically")]
    ZeroDenominator(String),
    #[error("constant {0} not representable in the scalar type")]
    NotRepresentable(BigRational),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Op(char),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            out.push((start, Tok::Num(text.parse().expect("digits"))));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((start, Tok::Ident(chars[start..i].iter().collect())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else if c == '−' {
            out.push((i, Tok::Op('-')));
            i += 1;
        } else {
            return Err(SyntaxError { offset: i, message: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    // offsets of the parentheses still open
    opens: Vec<usize>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError { offset: self.offset(), message: message.into() })
    }

    fn expr(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, SyntaxError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat('^') {
            let n = self.exponent()?;
            return Ok(Expr::Pow(Box::new(base), n));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i64, SyntaxError> {
        let open = self.offset();
        let paren = self.eat('(');
        let neg = self.eat('-');
        let n = match self.peek() {
            Some(Tok::Num(n)) => {
                let n: i64 = n.try_into().or_else(|_| self.err("exponent too large"))?;
                self.pos += 1;
                n
            }
            _ => return self.err("expected an integer exponent"),
        };
        if paren && !self.eat(')') {
            return Err(SyntaxError { offset: open, message: "unclosed parenthesis".into() });
        }
        Ok(if neg { -n } else { n })
    }

    fn atom(&mut self) -> Result<Expr, SyntaxError> {
        let open = self.offset();
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Expr::Num(BigRational::from_integer(n)))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                Ok(Expr::Var(name))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                if self.peek().is_none() {
                    return Err(SyntaxError { offset: open, message: "unclosed parenthesis".into() });
                }
                self.opens.push(open);
                let inner = self.expr()?;
                self.opens.pop();
                if !self.eat(')') {
                    return Err(SyntaxError { offset: open, message: "unclosed parenthesis".into() });
                }
                Ok(inner)
            }
            Some(Tok::Op(c)) => self.err(format!("unexpected `{c}`")),
            None => match self.opens.last() {
                Some(&open) => Err(SyntaxError { offset: open, message: "unclosed parenthesis".into() }),
                None => self.err("unexpected end of expression"),
            },
        }
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, SyntaxError> {
        let toks = lex(src)?;
        let end = src.chars().count();
        let mut p = Parser { toks, pos: 0, end, opens: Vec::new() };
        let e = p.expr()?;
        if p.pos < p.toks.len() {
            return p.err("unexpected trailing input");
        }
        Ok(e)
    }

    pub fn num(n: i64) -> Expr {
        Expr::Num(BigRational::from_integer(n.into()))
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    /// Identifiers occurring in the expression.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(v) => out.push(v.clone()),
            Expr::Neg(a) | Expr::Pow(a, _) => a.collect_vars(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Evaluates in the Laurent field over `C`; `env` resolves identifiers.
    pub fn eval<C: Coeff>(
        &self,
        env: &dyn Fn(&str) -> Option<Laurent<C>>,
        caps: &[i64],
    ) -> Result<Laurent<C>, EvalError> {
        Ok(match self {
            Expr::Num(r) => {
                let s = C::Scalar::from_ratio(r).ok_or_else(|| EvalError::NotRepresentable(r.clone()))?;
                Laurent::constant(C::from_elem(FieldElement::scalar(s)))
            }
            Expr::Var(v) => env(v).ok_or_else(|| EvalError::UnknownVariable(v.clone()))?,
            Expr::Neg(a) => a.eval(env, caps)?.neg_ref(),
            Expr::Add(a, b) => a.eval(env, caps)?.add_ref(&b.eval(env, caps)?),
            Expr::Sub(a, b) => a.eval(env, caps)?.sub_ref(&b.eval(env, caps)?),
            Expr::Mul(a, b) => a.eval(env, caps)?.mul_ref(&b.eval(env, caps)?),
            Expr::Div(a, b) => {
                let den = b.eval(env, caps)?;
                if den.is_exact_zero() {
                    return Err(EvalError::ZeroDenominator(b.to_string()));
                }
                a.eval(env, caps)?.mul_ref(&den.inv(caps)?)
            }
            Expr::Pow(a, n) => {
                let base = a.eval(env, caps)?;
                if *n < 0 && base.is_exact_zero() {
                    return Err(EvalError::ZeroDenominator(a.to_string()));
                }
                base.pow(*n, caps)?
            }
        })
    }

    fn prec(&self) -> u8 {
        match self {
            Expr::Num(r) if !r.is_integer() || r < &BigRational::from_integer(0.into()) => 2,
            Expr::Num(_) | Expr::Var(_) => 4,
            Expr::Pow(..) => 3,
            Expr::Neg(_) => 2,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Add(..) | Expr::Sub(..) => 1,
        }
    }

    fn fmt_child(&self, child: &Expr, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if child.prec() < min {
            write!(f, "({child})")
        } else {
            write!(f, "{child}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(r) => write!(f, "{r}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                self.fmt_child(a, 3, f)
            }
            Expr::Add(a, b) => {
                self.fmt_child(a, 1, f)?;
                write!(f, " + ")?;
                self.fmt_child(b, 2, f)
            }
            Expr::Sub(a, b) => {
                self.fmt_child(a, 1, f)?;
                write!(f, " - ")?;
                self.fmt_child(b, 2, f)
            }
            Expr::Mul(a, b) => {
                self.fmt_child(a, 2, f)?;
                write!(f, "*")?;
                self.fmt_child(b, 3, f)
            }
            Expr::Div(a, b) => {
                self.fmt_child(a, 2, f)?;
                write!(f, "/")?;
                self.fmt_child(b, 3, f)
            }
            Expr::Pow(a, n) => {
                self.fmt_child(a, 4, f)?;
                if *n < 0 { write!(f, "^({n})") } else { write!(f, "^{n}") }
            }
        }
    }
}
