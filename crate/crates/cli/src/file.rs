//! Scenario files: TOML with fixed sections, expressions as strings.
//!
//! ```toml
//! name = "origin, three branches"
//!
//! [field]
//! base = "Q"
//! extension = "θ^2 - 2"   # optional minimal polynomial of the generator
//!
//! [chart]
//! inner = "u"
//! outer = "t"
//! inverse = "w"           # optional second chart u = 1/w
//!
//! [point]
//! x = "0"
//!
//! [[branch]]
//! name = "u = 0"
//! kind = "horizontal"
//! u = "q"
//! t = "p"
//!
//! [form]
//! omega = "1/(u*t*(u-t))"
//!
//! [check]
//! law = "point"
//! ```

use std::fmt;
use std::ops::Range;
use std::path::{Path, PathBuf};

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Deserialize;
use thiserror::Error;
use toml::Spanned;
use twolocal::scenarios::{
    BranchSpec, Chart, ChartId, CheckSpec, Expr, Law, Scenario, ScenarioError, Shape, SymbolSpec, SyntaxError,
};
use twolocal::{Precision, Rational, ResidueExtension};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileDoc {
    name: String,
    #[serde(default)]
    field: FieldDoc,
    chart: ChartDoc,
    point: Option<PointDoc>,
    #[serde(default)]
    branch: Vec<BranchDoc>,
    form: Option<FormDoc>,
    symbol: Option<SymbolDoc>,
    check: CheckDoc,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldDoc {
    base: Option<Spanned<String>>,
    extension: Option<Spanned<String>>,
    generator: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChartDoc {
    inner: String,
    outer: String,
    inverse: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointDoc {
    x: Spanned<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase")]
enum KindDoc {
    Fiber,
    Horizontal,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase")]
enum ChartIdDoc {
    #[default]
    Main,
    Inverse,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BranchDoc {
    name: String,
    kind: KindDoc,
    #[serde(default)]
    chart: ChartIdDoc,
    #[serde(default)]
    extension: bool,
    u: Spanned<String>,
    t: Spanned<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FormDoc {
    omega: Spanned<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SymbolDoc {
    alpha: Spanned<String>,
    beta: Spanned<String>,
    #[serde(default)]
    gammas: Vec<Spanned<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckDoc {
    law: Spanned<String>,
    precision: Option<i64>,
    seed: Option<u64>,
    spot_checks: Option<usize>,
    samples: Option<usize>,
}

/// Where in the file something went wrong, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Error)]
pub enum InputError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{at}: {message}")]
    Syntax { path: PathBuf, at: Position, message: String },
    #[error("{path}: {source}")]
    Semantic { path: PathBuf, source: ScenarioError },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
}

fn position(doc: &str, byte: usize) -> Position {
    let before = &doc[..byte.min(doc.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    Position { line, column }
}

struct Loader<'a> {
    path: &'a Path,
    doc: &'a str,
}

impl Loader<'_> {
    fn invalid(&self, message: impl Into<String>) -> InputError {
        InputError::Invalid { path: self.path.to_path_buf(), message: message.into() }
    }

    fn at(&self, span: Range<usize>, message: impl Into<String>) -> InputError {
        InputError::Syntax { path: self.path.to_path_buf(), at: position(self.doc, span.start), message: message.into() }
    }

    /// Parses an expression string, mapping syntax errors into the file.
    fn expr(&self, what: &str, s: &Spanned<String>) -> Result<Expr, InputError> {
        Expr::parse(s.get_ref()).map_err(|SyntaxError { offset, message }| {
            let span = s.span();
            let raw = &self.doc[span.clone()];
            let quote = if raw.starts_with("\"\"\"") || raw.starts_with("'''") { 3 } else { 1 };
            let text = s.get_ref();
            let byte = text.char_indices().nth(offset).map_or(text.len(), |(b, _)| b);
            InputError::Syntax {
                path: self.path.to_path_buf(),
                at: position(self.doc, span.start + quote + byte),
                message: format!("{what}: {message}"),
            }
        })
    }
}

/// Dense polynomial in the generator, low degree first.
fn poly_of(e: &Expr, gen: &str) -> Result<Vec<BigRational>, String> {
    fn add(a: &[BigRational], b: &[BigRational], sign: i32) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); a.len().max(b.len())];
        for (i, c) in a.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in b.iter().enumerate() {
            if sign > 0 {
                out[i] += c;
            } else {
                out[i] -= c;
            }
        }
        out
    }
    fn mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); (a.len() + b.len()).saturating_sub(1)];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }
    fn trim(mut p: Vec<BigRational>) -> Vec<BigRational> {
        while p.last().is_some_and(Zero::is_zero) {
            p.pop();
        }
        p
    }
    let p = match e {
        Expr::Num(c) => vec![c.clone()],
        Expr::Var(v) if v == gen => vec![BigRational::zero(), BigRational::one()],
        Expr::Var(v) => return Err(format!("unknown identifier `{v}` in the minimal polynomial")),
        Expr::Neg(a) => poly_of(a, gen)?.into_iter().map(|c| -c).collect(),
        Expr::Add(a, b) => add(&poly_of(a, gen)?, &poly_of(b, gen)?, 1),
        Expr::Sub(a, b) => add(&poly_of(a, gen)?, &poly_of(b, gen)?, -1),
        Expr::Mul(a, b) => mul(&poly_of(a, gen)?, &poly_of(b, gen)?),
        Expr::Div(a, b) => {
            let d = trim(poly_of(b, gen)?);
            match d.as_slice() {
                [c] => poly_of(a, gen)?.into_iter().map(|x| x / c).collect(),
                _ => return Err("the minimal polynomial may only divide by nonzero constants".into()),
            }
        }
        Expr::Pow(a, n) => {
            let n = usize::try_from(*n).map_err(|_| "negative power in the minimal polynomial".to_string())?;
            let base = poly_of(a, gen)?;
            (0..n).fold(vec![BigRational::one()], |acc, _| mul(&acc, &base))
        }
    };
    Ok(trim(p))
}

/// Reads and validates a scenario file.
pub fn parse_scenario(path: &Path) -> Result<Scenario<Rational>, InputError> {
    let doc = std::fs::read_to_string(path).map_err(|source| InputError::Io { path: path.to_path_buf(), source })?;
    parse_scenario_str(path, &doc)
}

/// As [`parse_scenario`], from text already in memory; `path` is used in messages.
pub fn parse_scenario_str(path: &Path, doc: &str) -> Result<Scenario<Rational>, InputError> {
    let l = Loader { path, doc };
    let file: FileDoc = toml::from_str(doc).map_err(|e| {
        let at = e.span().map_or(Position { line: 1, column: 1 }, |s| position(doc, s.start));
        InputError::Syntax { path: path.to_path_buf(), at, message: e.message().trim().to_string() }
    })?;

    if let Some(base) = &file.field.base {
        if base.get_ref() != "Q" {
            return Err(l.at(base.span(), format!("unsupported base field `{}`; only Q is available", base.get_ref())));
        }
    }
    let ext = match &file.field.extension {
        None => {
            if file.field.generator.is_some() {
                return Err(l.invalid("[field] generator given without an extension"));
            }
            None
        }
        Some(src) => {
            let e = l.expr("extension", src)?;
            let gen = match (&file.field.generator, e.variables().as_slice()) {
                (Some(g), _) => g.clone(),
                (None, [g]) => g.clone(),
                (None, _) => return Err(l.at(src.span(), "cannot tell the generator; set [field] generator")),
            };
            let mut minpoly = poly_of(&e, &gen).map_err(|m| l.at(src.span(), m))?;
            if let Some(lead) = minpoly.last().cloned() {
                minpoly.iter_mut().for_each(|c| *c /= &lead);
            }
            let ext = ResidueExtension::new(minpoly, &gen).map_err(|err| l.at(src.span(), format!("extension: {err}")))?;
            Some(ext)
        }
    };

    let law = Law::from_name(file.check.law.get_ref()).ok_or_else(|| {
        l.at(
            file.check.law.span(),
            format!(
                "unknown law `{}`; expected point, fiber, symbol-point, symbol-fiber, characterizing or independence",
                file.check.law.get_ref()
            ),
        )
    })?;
    let defaults = CheckSpec::default();
    let precision = match file.check.precision {
        Some(n) if n < 2 => return Err(l.invalid("[check] precision must be at least 2")),
        Some(n) => Precision::uniform(n),
        None => defaults.precision,
    };
    let check = CheckSpec {
        law,
        precision,
        seed: file.check.seed.unwrap_or(defaults.seed),
        spot_checks: file.check.spot_checks.unwrap_or(defaults.spot_checks),
        samples: file.check.samples.unwrap_or(defaults.samples),
    };

    let branches = file
        .branch
        .iter()
        .map(|b| {
            Ok(BranchSpec {
                name: b.name.clone(),
                shape: match b.kind {
                    KindDoc::Fiber => Shape::Fiber,
                    KindDoc::Horizontal => Shape::Horizontal,
                },
                chart: match b.chart {
                    ChartIdDoc::Main => ChartId::Main,
                    ChartIdDoc::Inverse => ChartId::Inverse,
                },
                extension: b.extension,
                u: l.expr(&format!("branch `{}` u", b.name), &b.u)?,
                t: l.expr(&format!("branch `{}` t", b.name), &b.t)?,
            })
        })
        .collect::<Result<Vec<_>, InputError>>()?;

    let symbol = match &file.symbol {
        None => None,
        Some(s) => Some(SymbolSpec {
            alpha: l.expr("symbol alpha", &s.alpha)?,
            beta: l.expr("symbol beta", &s.beta)?,
            gammas: s.gammas.iter().map(|g| l.expr("symbol gamma", g)).collect::<Result<_, _>>()?,
        }),
    };

    let scenario = Scenario {
        name: file.name,
        ext,
        chart: Chart { inner: file.chart.inner, outer: file.chart.outer, inverse: file.chart.inverse },
        point: file.point.as_ref().map(|p| l.expr("point", &p.x)).transpose()?,
        branches,
        form: file.form.as_ref().map(|f| l.expr("form", &f.omega)).transpose()?,
        symbol,
        check,
    };
    scenario.validate().map_err(|source| InputError::Semantic { path: path.to_path_buf(), source })?;
    Ok(scenario)
}
