//! Verification reports and the line-oriented `key=value` format.
//!
//! Series values use the `Display` form of [`Laurent`]:
//! `[e:c, e:c | O(p)]` or `[e:c | exact]`, with residue-extension coefficients
//! written `(c0|c1|…)`. [`parse_series`] and [`parse_iterated`] read them back.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_rational::BigRational;
use thiserror::Error;

use crate::coefficients::{FieldElement, ResidueExtension};
use crate::scalar::Scalar;
use crate::series::{Coeff, Iterated, Laurent, Precision, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// Computation only, no law checked.
    Computed,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Computed => "computed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("report parse error on line {line}: {message}")]
pub struct ReportParseError {
    pub line: usize,
    pub message: String,
}

fn perr(message: impl Into<String>) -> ReportParseError {
    ReportParseError { line: 0, message: message.into() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub scenario: String,
    pub command: String,
    pub law: Option<String>,
    pub precision: Precision,
    pub seed: u64,
    pub entries: Vec<(String, String)>,
    pub verdict: Verdict,
}

impl Report {
    pub fn new(scenario: &str, command: &str, law: Option<&str>, precision: Precision, seed: u64) -> Self {
        Report {
            scenario: scenario.to_string(),
            command: command.to_string(),
            law: law.map(str::to_string),
            precision,
            seed,
            entries: Vec::new(),
            verdict: Verdict::Computed,
        }
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl fmt::Display) {
        let value = value.to_string().replace(['\n', '\r'], " ");
        self.entries.push((key.into(), value));
    }

    /// First value stored under `key`.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn notes(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().filter(|(k, _)| k == "note").map(|(_, v)| v.as_str())
    }

    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: &str| {
            out.push_str(k);
            out.push('=');
            out.push_str(v);
            out.push('\n');
        };
        line("scenario", &self.scenario);
        line("command", &self.command);
        if let Some(l) = &self.law {
            line("law", l);
        }
        line("precision", &format!("{},{}", self.precision.outer, self.precision.inner));
        line("seed", &self.seed.to_string());
        for (k, v) in &self.entries {
            line(k, v);
        }
        line("verdict", self.verdict.as_str());
        out
    }

    pub fn from_kv(text: &str) -> Result<Report, ReportParseError> {
        let mut r = Report::new("", "", None, Precision::default(), 0);
        let mut seen_verdict = false;
        for (i, raw) in text.lines().enumerate() {
            let at = |message: String| ReportParseError { line: i + 1, message };
            if raw.trim().is_empty() {
                continue;
            }
            let (k, v) = raw.split_once('=').ok_or_else(|| at("expected key=value".into()))?;
            match k {
                "scenario" => r.scenario = v.to_string(),
                "command" => r.command = v.to_string(),
                "law" => r.law = Some(v.to_string()),
                "precision" => {
                    let (a, b) = v.split_once(',').ok_or_else(|| at("precision must be outer,inner".into()))?;
                    let num = |s: &str| s.parse::<i64>().map_err(|e| at(e.to_string()));
                    r.precision = Precision { outer: num(a)?, inner: num(b)? };
                }
                "seed" => r.seed = v.parse().map_err(|_| at(format!("bad seed `{v}`")))?,
                "verdict" => {
                    r.verdict = match v {
                        "pass" => Verdict::Pass,
                        "fail" => Verdict::Fail,
                        "computed" => Verdict::Computed,
                        _ => return Err(at(format!("unknown verdict `{v}`"))),
                    };
                    seen_verdict = true;
                }
                _ => r.entries.push((k.to_string(), v.to_string())),
            }
        }
        if !seen_verdict {
            return Err(perr("missing verdict"));
        }
        Ok(r)
    }

    /// Reads several reports written back to back; each starts at a `scenario=` line.
    pub fn from_kv_many(text: &str) -> Result<Vec<Report>, ReportParseError> {
        let mut chunks: Vec<(usize, String)> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.starts_with("scenario=") || chunks.is_empty() {
                chunks.push((i, String::new()));
            }
            let last = chunks.last_mut().expect("pushed above");
            last.1.push_str(line);
            last.1.push('\n');
        }
        chunks
            .into_iter()
            .filter(|(_, c)| !c.trim().is_empty())
            .map(|(offset, c)| Report::from_kv(&c).map_err(|e| ReportParseError { line: e.line + offset, ..e }))
            .collect()
    }

    /// Aligned text for terminals.
    pub fn human(&self) -> String {
        let mut out = format!("{} [{}", self.scenario, self.command);
        if let Some(l) = &self.law {
            out.push_str(&format!(" {l}"));
        }
        out.push_str(&format!(
            "] precision {}/{} seed {}\n",
            self.precision.outer, self.precision.inner, self.seed
        ));
        let width = self.entries.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in &self.entries {
            out.push_str(&format!("  {k:<width$}  {v}\n"));
        }
        out.push_str(&format!("  verdict: {}\n", self.verdict.as_str().to_uppercase()));
        out
    }
}

/// Splits on `", "` outside brackets and parentheses.
fn split_top(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let bytes = s.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'[' | b'(' => depth += 1,
            b']' | b')' => depth -= 1,
            b',' if depth == 0 => {
                parts.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    let last = s[start..].trim();
    if !last.is_empty() || !parts.is_empty() {
        parts.push(last);
    }
    parts
}

fn parse_laurent<C: Coeff>(
    text: &str,
    coeff: &dyn Fn(&str) -> Result<C, ReportParseError>,
) -> Result<Laurent<C>, ReportParseError> {
    let body = text
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| perr(format!("series `{text}` must be enclosed in brackets")))?;
    let bar = body.rfind(" | ").ok_or_else(|| perr("missing precision marker"))?;
    let (terms, tail) = (&body[..bar], body[bar + 3..].trim());
    let prec = if tail == "exact" {
        None
    } else {
        let p = tail
            .strip_prefix("O(")
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| perr(format!("bad precision `{tail}`")))?;
        Some(p.parse::<i64>().map_err(|e| perr(e.to_string()))?)
    };
    let mut out = Vec::new();
    for part in split_top(terms) {
        if part.is_empty() {
            continue;
        }
        let (k, c) = part.split_once(':').ok_or_else(|| perr(format!("bad term `{part}`")))?;
        let k = k.trim().parse::<i64>().map_err(|e| perr(format!("bad exponent `{k}`: {e}")))?;
        out.push((k, coeff(c.trim())?));
    }
    Ok(Laurent::new(out, prec))
}

fn parse_scalar<S: Scalar>(s: &str) -> Result<S, ReportParseError> {
    let r = BigRational::from_str(s).map_err(|e| perr(format!("bad rational `{s}`: {e}")))?;
    S::from_ratio(&r).ok_or_else(|| perr(format!("`{s}` not representable")))
}

fn parse_elem<S: Scalar>(s: &str, ext: Option<&Arc<ResidueExtension<S>>>) -> Result<FieldElement<S>, ReportParseError> {
    match s.strip_prefix('(').and_then(|x| x.strip_suffix(')')) {
        Some(inner) => {
            let ext = ext.ok_or_else(|| perr(format!("`{s}` needs a residue extension")))?;
            let coords = inner.split('|').map(|c| parse_scalar(c.trim())).collect::<Result<Vec<S>, _>>()?;
            if coords.len() != ext.degree() {
                return Err(perr(format!("`{s}` has {} coordinates, extension degree {}", coords.len(), ext.degree())));
            }
            Ok(ext.element(coords))
        }
        None => Ok(FieldElement::scalar(parse_scalar(s)?)),
    }
}

/// Reads back a one-variable series printed by `Display`.
pub fn parse_series<S: Scalar>(
    text: &str,
    ext: Option<&Arc<ResidueExtension<S>>>,
) -> Result<Series<S>, ReportParseError> {
    parse_laurent(text, &|c| parse_elem(c, ext))
}

/// Reads back an iterated series printed by `Display`.
pub fn parse_iterated<S: Scalar>(
    text: &str,
    ext: Option<&Arc<ResidueExtension<S>>>,
) -> Result<Iterated<S>, ReportParseError> {
    parse_laurent(text, &|c| parse_series(c, ext))
}
