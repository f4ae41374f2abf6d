//! Fibred surfaces given by charts, branches through points, and the drivers
//! that check the reciprocity laws and characterizing identities on them.
//!
//! The surface is covered by a chart with coordinates `(u, t)` and `f(u, t) = t`;
//! for `P¹ × S` a second chart `w = 1/u` reaches the point at infinity. The base
//! point `s` is always `t = 0`. A branch is given by the raw coordinates as
//! expressions in branch parameters `p` (inner) and `q` (outer):
//!
//! - fiber: `q = t_s` and `p` restricts to a local parameter on the fiber;
//! - horizontal: `q = t_C` is a local equation of `C` and `p` restricts to a
//!   uniformizer of `k(C)_x`.

mod drivers;
pub mod expr;
mod report;

use std::sync::Arc;

use num_traits::{One, Zero};

use crate::series::Coeff;
use thiserror::Error;

use crate::coefficients::{FieldElement, ResidueExtension};
use crate::forms::Form2;
use crate::localext::{LocalExtError, LocalExtension};
use crate::pushforward::{BranchKind, PushforwardError};
use crate::scalar::Scalar;
use crate::series::{Iterated, Precision, Series, SeriesError};

pub use drivers::{
    expand_report, pushforward_report, residue_report, symbol_report, verify, verify_characterizing,
    verify_fiber_reciprocity, verify_parameter_independence, verify_point_reciprocity, verify_symbol_reciprocity,
};
pub use expr::{EvalError, Expr, SyntaxError};
pub use report::{parse_iterated, parse_series, Report, ReportParseError, Verdict};

/// Names of the branch parameters.
pub const INNER_PARAM: &str = "p";
pub const OUTER_PARAM: &str = "q";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("{context}: unknown identifier `{name}`")]
    UnknownIdentifier { context: String, name: String },
    #[error("branch `{branch}`: {reason}")]
    Branch { branch: String, reason: String },
    #[error("{0}")]
    Invalid(String),
    #[error("{context}: {source}")]
    Eval { context: String, source: EvalError },
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Pushforward(#[from] PushforwardError),
}

impl ScenarioError {
    /// Whether retrying at a higher precision can help.
    pub fn is_precision(&self) -> bool {
        let series = |e: &SeriesError| matches!(e, SeriesError::InsufficientPrecision(_));
        match self {
            ScenarioError::Series(e) => series(e),
            ScenarioError::Eval { source: EvalError::Series(e), .. } => series(e),
            ScenarioError::Pushforward(PushforwardError::Series(e)) => series(e),
            ScenarioError::Pushforward(PushforwardError::Extension(LocalExtError::Series(e))) => series(e),
            _ => false,
        }
    }
}

impl From<LocalExtError> for ScenarioError {
    fn from(e: LocalExtError) -> Self {
        ScenarioError::Pushforward(e.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartId {
    Main,
    /// `w = 1/u`.
    Inverse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub inner: String,
    pub outer: String,
    pub inverse: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Fiber,
    Horizontal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchSpec {
    pub name: String,
    pub shape: Shape,
    pub chart: ChartId,
    /// `k(x)` is the scenario's residue extension rather than `k(s)`.
    pub extension: bool,
    pub u: Expr,
    pub t: Expr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Law {
    Point,
    Fiber,
    SymbolPoint,
    SymbolFiber,
    Characterizing,
    Independence,
}

impl Law {
    pub fn name(&self) -> &'static str {
        match self {
            Law::Point => "point",
            Law::Fiber => "fiber",
            Law::SymbolPoint => "symbol-point",
            Law::SymbolFiber => "symbol-fiber",
            Law::Characterizing => "characterizing",
            Law::Independence => "independence",
        }
    }

    pub fn from_name(s: &str) -> Option<Law> {
        [Law::Point, Law::Fiber, Law::SymbolPoint, Law::SymbolFiber, Law::Characterizing, Law::Independence]
            .into_iter()
            .find(|l| l.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckSpec {
    pub law: Law,
    pub precision: Precision,
    pub seed: u64,
    pub spot_checks: usize,
    pub samples: usize,
}

impl Default for CheckSpec {
    fn default() -> Self {
        CheckSpec { law: Law::Point, precision: Precision::default(), seed: 0, spot_checks: 3, samples: 20 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSpec {
    pub alpha: Expr,
    pub beta: Expr,
    /// Elements of `K_s`, expressions in the base coordinate.
    pub gammas: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<S: Scalar> {
    pub name: String,
    pub ext: Option<Arc<ResidueExtension<S>>>,
    pub chart: Chart,
    /// The point `x` of the point laws, as a value of the inner coordinate.
    pub point: Option<Expr>,
    pub branches: Vec<BranchSpec>,
    /// Coefficient `g` of `ω = g du∧dt` in the main chart.
    pub form: Option<Expr>,
    pub symbol: Option<SymbolSpec>,
    pub check: CheckSpec,
}

impl<S: Scalar> Scenario<S> {
    fn generator_name(&self) -> Option<&str> {
        self.ext.as_ref().map(|e| e.generator_name())
    }

    /// Checks identifier scopes and law requirements.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let gen = self.generator_name();
        let c = &self.chart;
        let mut names = vec![c.inner.as_str(), c.outer.as_str(), INNER_PARAM, OUTER_PARAM];
        names.extend(c.inverse.as_deref());
        names.extend(gen);
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != names.len() {
            return Err(ScenarioError::Invalid(format!(
                "chart coordinates, generator and branch parameters {INNER_PARAM}, {OUTER_PARAM} must have distinct names"
            )));
        }
        let scope = |context: &str, e: &Expr, allowed: &[&str]| -> Result<(), ScenarioError> {
            match e.variables().into_iter().find(|v| !allowed.contains(&v.as_str())) {
                Some(name) => Err(ScenarioError::UnknownIdentifier { context: context.into(), name }),
                None => Ok(()),
            }
        };
        let mut coords = vec![c.inner.as_str(), c.outer.as_str()];
        coords.extend(gen);
        if let Some(x) = &self.point {
            scope("point", x, &gen.into_iter().collect::<Vec<_>>())?;
        }
        if let Some(f) = &self.form {
            scope("form", f, &coords)?;
        }
        if let Some(sym) = &self.symbol {
            scope("symbol alpha", &sym.alpha, &coords)?;
            scope("symbol beta", &sym.beta, &coords)?;
            for g in &sym.gammas {
                scope("symbol gamma", g, &[c.outer.as_str()])?;
            }
        }
        for b in &self.branches {
            let mut allowed = vec![INNER_PARAM, OUTER_PARAM];
            if b.extension {
                let g = gen.ok_or_else(|| ScenarioError::Branch {
                    branch: b.name.clone(),
                    reason: "uses the residue extension but the scenario declares none".into(),
                })?;
                allowed.push(g);
            }
            scope(&format!("branch `{}`", b.name), &b.u, &allowed)?;
            scope(&format!("branch `{}`", b.name), &b.t, &allowed)?;
            if b.chart == ChartId::Inverse && c.inverse.is_none() {
                return Err(ScenarioError::Branch {
                    branch: b.name.clone(),
                    reason: "placed in the inverse chart but the chart declares no inverse coordinate".into(),
                });
            }
        }
        let needs_form = matches!(self.check.law, Law::Point | Law::Fiber | Law::Independence);
        if needs_form && self.form.is_none() {
            return Err(ScenarioError::Invalid(format!("law `{}` needs a [form] section", self.check.law.name())));
        }
        if !needs_form && self.symbol.is_none() {
            return Err(ScenarioError::Invalid(format!("law `{}` needs a [symbol] section", self.check.law.name())));
        }
        if self.check.law == Law::Characterizing && self.symbol.as_ref().is_some_and(|s| s.gammas.is_empty()) {
            return Err(ScenarioError::Invalid("law `characterizing` needs at least one gamma".into()));
        }
        Ok(())
    }
}

/// A branch expanded at a given precision.
#[derive(Debug, Clone)]
pub struct PreparedBranch<S: Scalar> {
    pub name: String,
    pub shape: Shape,
    pub chart: ChartId,
    pub kind: BranchKind<S>,
    /// Coordinates as given, before normalization.
    pub raw_u: Iterated<S>,
    pub raw_t: Iterated<S>,
    /// Inner coordinate of the branch's chart in the normalized parameters.
    pub u_chart: Iterated<S>,
    /// Main-chart inner coordinate as an element of `K_{x,C}`.
    pub u_main: Iterated<S>,
    /// `t` in the normalized parameters; free of `q` on horizontal branches.
    pub t: Iterated<S>,
    /// Factor turning `g du∧dt` into the coefficient of `dp∧dq`.
    pub form_factor: Iterated<S>,
    /// The point `x`: value of `u_main` at `p = q = 0`, `None` at infinity.
    pub center: Option<FieldElement<S>>,
    pub residue: Option<Arc<ResidueExtension<S>>>,
}

fn generator_const<S: Scalar>(ext: &Option<Arc<ResidueExtension<S>>>) -> Option<Iterated<S>> {
    ext.as_ref().map(|e| Iterated::from_elem_const(e.generator()))
}

/// Value at `p = q = 0` of a function regular at the origin of the branch field.
fn value_at_origin<S: Scalar>(f: &Iterated<S>) -> Result<FieldElement<S>, SeriesError> {
    f.extract_coeff(0, 0)
}

/// `f(p + δ, q)` by Taylor expansion in the inner variable; `δ` has positive
/// `q`-order and `f` nonnegative `q`-order.
fn shift_inner<S: Scalar>(f: &Iterated<S>, delta: &Iterated<S>, caps: &[i64]) -> Iterated<S> {
    let cap = caps.first().copied().unwrap_or(crate::series::DEFAULT_PRECISION);
    let target = delta.prec().unwrap_or(cap).min(f.prec().unwrap_or(cap));
    let mut acc = Iterated::big_o(target);
    let (mut deriv, mut power) = (f.clone(), Iterated::one());
    let mut fact = S::one();
    let mut n = 0i64;
    while !deriv.is_exact_zero() && power.valuation_bound().is_some_and(|v| v < target) {
        let c = FieldElement::scalar(S::one() / fact.clone());
        acc = acc.add_ref(&deriv.mul_ref(&power).map_coeffs(|s| s.scale(&c)));
        n += 1;
        fact = fact * S::from_int(n);
        deriv = deriv.d_inner();
        power = power.mul_ref(delta).truncate(target);
    }
    acc
}

/// Moves to parameters in which `t` lies in the coefficient field: solves
/// `t(P, q) = t(p, 0)` for `P = p + O(q)` and returns `(u(P, q), t(p, 0))`.
///
/// The residue along `q = 0` is taken with coefficients in `k((p))`; that field
/// must contain `K_s`, or poles of higher order give parameter-dependent values.
fn normalize_horizontal<S: Scalar>(
    u: &Iterated<S>,
    t: &Iterated<S>,
    caps: &[i64],
) -> Result<(Iterated<S>, Iterated<S>), SeriesError> {
    let emb = Iterated::constant(t.coeff(0)?);
    if t.sub_ref(&emb).is_exact_zero() {
        return Ok((u.clone(), t.clone()));
    }
    let slope = t.d_inner();
    let cap = caps.first().copied().unwrap_or(crate::series::DEFAULT_PRECISION).max(1);
    // Iterates are approximations in their own right: keep the known terms,
    // drop the q⁰ slice and the error term.
    let strip = |x: Iterated<S>| {
        Iterated::new(x.terms().filter(|(k, _)| *k >= 1).map(|(k, s)| (k, s.clone())), None)
    };
    // Newton's method doubles the q-adic accuracy per step, so each step runs
    // at twice the precision of the last; the final ones confirm at full cap.
    let mut delta = Iterated::zero();
    let mut level = 2;
    let mut confirmations = 0;
    loop {
        let lv = level.min(cap);
        let c: Vec<i64> = std::iter::once(lv).chain(caps.iter().skip(1).copied()).collect();
        let resid = shift_inner(t, &delta, &c).sub_ref(&emb);
        if lv == cap {
            if resid.is_zero_within() {
                return Ok((shift_inner(u, &delta, caps), emb));
            }
            confirmations += 1;
            if confirmations > 3 {
                return Err(SeriesError::InsufficientPrecision(
                    "coefficient field of a horizontal branch did not converge".into(),
                ));
            }
        }
        delta = strip(delta.sub_ref(&resid.div_ref(&shift_inner(&slope, &delta, &c), &c)?));
        level = lv * 2;
    }
}

fn is_regular<S: Scalar>(f: &Iterated<S>) -> bool {
    f.terms().all(|(k, slice)| k >= 0 && slice.valuation_bound().is_none_or(|v| v >= 0))
        && f.valuation_bound().is_none_or(|v| v >= 0)
}

impl<S: Scalar> PreparedBranch<S> {
    /// Builds a branch from the raw coordinates already expanded in `(p, q)`.
    pub fn from_coordinates(
        name: &str,
        shape: Shape,
        chart: ChartId,
        residue: Option<Arc<ResidueExtension<S>>>,
        u: Iterated<S>,
        t: Iterated<S>,
        caps: &[i64],
    ) -> Result<Self, ScenarioError> {
        let bad = |reason: String| ScenarioError::Branch { branch: name.to_string(), reason };
        if !is_regular(&u) || !is_regular(&t) {
            return Err(bad("parameterization must be a power series in p, q".into()));
        }
        if !value_at_origin(&t)?.is_zero() {
            return Err(bad("not centered over s: t(0, 0) ≠ 0".into()));
        }
        let jac = u.d_inner().mul_ref(&t.d_outer()).sub_ref(&u.d_outer().mul_ref(&t.d_inner()));
        match jac.lex_leading() {
            Ok((0, 0, _)) => {}
            _ => {
                return Err(bad(
                    "Jacobian condition violated: ∂(u, t)/∂(p, q) is not a unit at x, so the branch is not smooth there".into(),
                ))
            }
        }
        let kind = match shape {
            Shape::Fiber => {
                if !t.sub_ref(&Iterated::outer_var()).is_exact_zero() {
                    return Err(bad("fiber branches must take t = q".into()));
                }
                BranchKind::Fiber(LocalExtension::unramified(residue.clone()))
            }
            Shape::Horizontal => {
                let emb = t.coeff(0)?;
                let e = match emb.valuation() {
                    Ok(e) if e >= 1 => e,
                    _ if emb.is_exact_zero() => return Err(bad("t vanishes along the branch: it is the fiber".into())),
                    _ => return Err(bad("t restricted to the branch has no determinable order".into())),
                };
                BranchKind::Horizontal(LocalExtension::new(residue.clone(), e, emb).map_err(|err| bad(err.to_string()))?)
            }
        };
        let (raw_u, raw_t) = (u, t);
        let (u, t, jac) = match shape {
            Shape::Fiber => (raw_u.clone(), raw_t.clone(), jac),
            Shape::Horizontal => {
                let (u, t) = normalize_horizontal(&raw_u, &raw_t, caps)?;
                let jac = u.d_inner().mul_ref(&t.d_outer()).sub_ref(&u.d_outer().mul_ref(&t.d_inner()));
                (u, t, jac)
            }
        };
        let (u_main, form_factor, center) = match chart {
            ChartId::Main => (u.clone(), jac, Some(value_at_origin(&raw_u)?)),
            ChartId::Inverse => {
                let w_inv = u.inv(caps).map_err(|_| bad("inverse-chart coordinate vanishes identically".into()))?;
                let factor = w_inv.mul_ref(&w_inv).mul_ref(&jac).neg_ref();
                let w0 = value_at_origin(&raw_u)?;
                let center = if w0.is_zero() { None } else { Some(w0.inv().map_err(|_| SeriesError::NotAUnit)?) };
                (w_inv, factor, center)
            }
        };
        Ok(PreparedBranch {
            name: name.to_string(),
            shape,
            chart,
            kind,
            raw_u,
            raw_t,
            u_chart: u,
            u_main,
            t,
            form_factor,
            center,
            residue,
        })
    }

    /// Expands a main-chart expression into `K_{x,C}`.
    pub fn expand(&self, chart: &Chart, e: &Expr, caps: &[i64]) -> Result<Iterated<S>, ScenarioError> {
        let gen = generator_const(&self.residue);
        let gen_name = self.residue.as_ref().map(|r| r.generator_name().to_string());
        let env = |v: &str| -> Option<Iterated<S>> {
            if v == chart.inner {
                Some(self.u_main.clone())
            } else if v == chart.outer {
                Some(self.t.clone())
            } else if gen_name.as_deref() == Some(v) {
                gen.clone()
            } else {
                None
            }
        };
        e.eval(&env, caps).map_err(|source| ScenarioError::Eval { context: format!("expanding `{e}` at `{}`", self.name), source })
    }

    /// `ω = g du∧dt` as a 2-form over `K_{x,C}`.
    pub fn form(&self, chart: &Chart, g: &Expr, caps: &[i64]) -> Result<Form2<S>, ScenarioError> {
        Ok(Form2::new(self.expand(chart, g, caps)?.mul_ref(&self.form_factor)))
    }

    /// `f*γ` for `γ ∈ K_s`.
    pub fn pull_back(&self, gamma: &Series<S>, caps: &[i64]) -> Result<Iterated<S>, ScenarioError> {
        let mut acc = Iterated::zero();
        for (k, c) in gamma.terms() {
            acc = acc.add_ref(&self.t.pow(k, caps)?.scale(&Series::constant(c.clone())));
        }
        if let Some(p) = gamma.prec() {
            // O(t_s^P): t = emb(p) + q·r with r regular, so slice q^i is O(p^{e(P−i)})
            let err = match &self.kind {
                BranchKind::Fiber(_) => Iterated::big_o(p),
                BranchKind::Horizontal(ext) => {
                    let e = ext.ramification();
                    let width = caps.first().copied().unwrap_or(crate::series::DEFAULT_PRECISION);
                    Iterated::new((0..width).map(|i| (i, Series::big_o((e * (p - i)).max(0)))), Some(width))
                }
            };
            acc = acc.add_ref(&err);
        }
        Ok(acc)
    }
}

impl<S: Scalar> Scenario<S> {
    /// Expands the branch parameterization in `K_{x,C}` and validates it.
    pub fn prepare(&self, b: &BranchSpec, caps: &[i64]) -> Result<PreparedBranch<S>, ScenarioError> {
        let residue = if b.extension { self.ext.clone() } else { None };
        let gen = generator_const(&residue);
        let gen_name = residue.as_ref().map(|r| r.generator_name().to_string());
        let env = |v: &str| -> Option<Iterated<S>> {
            match v {
                INNER_PARAM => Some(Iterated::inner_var()),
                OUTER_PARAM => Some(Iterated::outer_var()),
                _ if gen_name.as_deref() == Some(v) => gen.clone(),
                _ => None,
            }
        };
        let ctx = |which: &str| format!("branch `{}` coordinate {which}", b.name);
        let u = b.u.eval(&env, caps).map_err(|source| ScenarioError::Eval { context: ctx("u"), source })?;
        let t = b.t.eval(&env, caps).map_err(|source| ScenarioError::Eval { context: ctx("t"), source })?;
        PreparedBranch::from_coordinates(&b.name, b.shape, b.chart, residue, u, t, caps)
    }

    /// The declared point as an element of `k(x)`.
    pub fn point_value(&self) -> Result<Option<FieldElement<S>>, ScenarioError> {
        let Some(x) = &self.point else { return Ok(None) };
        let gen = generator_const(&self.ext);
        let name = self.generator_name().map(str::to_string);
        let env = |v: &str| if name.as_deref() == Some(v) { gen.clone() } else { None };
        let caps = self.check.precision.caps();
        let value: Iterated<S> =
            x.eval(&env, &caps).map_err(|source| ScenarioError::Eval { context: "point".into(), source })?;
        if !is_regular(&value) || value.terms().any(|(k, s)| k != 0 || s.terms().any(|(j, _)| j != 0)) {
            return Err(ScenarioError::Invalid(format!("point `{x}` is not a constant")));
        }
        Ok(Some(value_at_origin(&value)?))
    }

    /// Evaluates an element of `K_s` given in the base coordinate.
    pub fn base_element(&self, e: &Expr, caps: &[i64]) -> Result<Series<S>, ScenarioError> {
        let outer = self.chart.outer.clone();
        let env = move |v: &str| (v == outer).then(Series::var);
        e.eval(&env, caps).map_err(|source| ScenarioError::Eval { context: format!("base element `{e}`"), source })
    }
}
