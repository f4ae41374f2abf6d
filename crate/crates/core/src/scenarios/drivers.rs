use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::report::{Report, Verdict};
use super::{ChartId, Law, PreparedBranch, Scenario, ScenarioError, Shape};
use crate::coefficients::FieldElement;
use crate::forms::{dlog, pairing_1d, res_inner, res_outer, res_total, res_total_scaled, Form1, Form2, OneForm2d};
use crate::pushforward::{pushsym, relres, summed_forms, summed_symbols, BranchKind};
use crate::scalar::Scalar;
use crate::series::{Iterated, Precision, Series, SeriesError};
use crate::symbols::{tame_1d, tame_2d};

/// Coefficients a verdict must rest on.
const MIN_WINDOW: i64 = 2;

fn insufficient(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Series(SeriesError::InsufficientPrecision(msg.into()))
}

/// Runs `f` at `p`; once more at doubled precision if it ran out.
fn with_retry<T>(
    p: Precision,
    f: impl Fn(Precision) -> Result<T, ScenarioError>,
) -> Result<(T, Precision), ScenarioError> {
    match f(p) {
        Err(e) if e.is_precision() => {
            let d = p.doubled();
            f(d).map(|t| (t, d))
        }
        r => r.map(|t| (t, p)),
    }
}

/// Tracked coefficients of `total` above the lowest exponent any part reaches.
fn window<S: Scalar>(total: &Series<S>, parts: &[&Series<S>]) -> Option<i64> {
    let p = total.prec()?;
    let low = parts.iter().chain(std::iter::once(&total)).filter_map(|s| s.valuation_bound()).min().unwrap_or(0).min(0);
    Some(p - low)
}

fn require_window(w: Option<i64>) -> Result<(), ScenarioError> {
    match w {
        Some(n) if n < MIN_WINDOW => Err(insufficient(format!("verdict window of {n} coefficients"))),
        _ => Ok(()),
    }
}

fn window_text(w: Option<i64>) -> String {
    w.map_or("exact".into(), |n| n.to_string())
}

fn kind_name<S: Scalar>(b: &PreparedBranch<S>) -> &'static str {
    match b.kind {
        BranchKind::Horizontal(_) => "horizontal",
        BranchKind::Fiber(_) => "fiber",
    }
}

fn random_ratio(rng: &mut ChaCha8Rng) -> BigRational {
    // denominator 11 keeps random lines and points off every shipped branch;
    // small heights keep the expansions cheap
    let mut k: i64 = rng.gen_range(1..100);
    if k % 11 == 0 {
        k += 1;
    }
    let sign = if rng.gen_bool(0.5) { -1 } else { 1 };
    BigRational::new(BigInt::from(sign * k), BigInt::from(11))
}

fn scalar_of<S: Scalar>(r: &BigRational) -> Result<S, ScenarioError> {
    S::from_ratio(r).ok_or_else(|| ScenarioError::Invalid(format!("{r} not representable")))
}

fn prepare_all<S: Scalar>(sc: &Scenario<S>, caps: &[i64]) -> Result<Vec<PreparedBranch<S>>, ScenarioError> {
    sc.branches.iter().map(|b| sc.prepare(b, caps)).collect()
}

/// Common point of all branches, required for the point laws.
fn common_center<S: Scalar>(
    sc: &Scenario<S>,
    branches: &[PreparedBranch<S>],
) -> Result<Option<FieldElement<S>>, ScenarioError> {
    let declared = sc.point_value()?;
    let mut center = declared.clone();
    for b in branches {
        let c = b.center.clone().ok_or_else(|| ScenarioError::Branch {
            branch: b.name.clone(),
            reason: "point laws are checked at finite points of the main chart".into(),
        })?;
        match &center {
            None => center = Some(c),
            Some(x) if *x == c => {}
            Some(_) if declared.is_some() => {
                return Err(ScenarioError::Branch { branch: b.name.clone(), reason: "does not pass through the point".into() })
            }
            Some(_) => return Err(ScenarioError::Invalid("branches do not pass through a common point".into())),
        }
    }
    Ok(center)
}

/// Random smooth horizontal branch `u = x + c·t` through the point.
fn spot_line<S: Scalar>(
    x: &FieldElement<S>,
    residue: &Option<std::sync::Arc<crate::coefficients::ResidueExtension<S>>>,
    c: &BigRational,
    caps: &[i64],
) -> Result<PreparedBranch<S>, ScenarioError> {
    let cs = Iterated::from_elem_const(FieldElement::scalar(scalar_of::<S>(c)?));
    let u = Iterated::from_elem_const(x.clone()).add_ref(&cs.mul_ref(&Iterated::inner_var())).add_ref(&Iterated::outer_var());
    PreparedBranch::from_coordinates(
        &format!("u = {x} + ({c})·t"),
        Shape::Horizontal,
        ChartId::Main,
        residue.clone(),
        u,
        Iterated::inner_var(),
        caps,
    )
}

/// Random fiber point `u = r`.
fn spot_point<S: Scalar>(r: &BigRational, caps: &[i64]) -> Result<PreparedBranch<S>, ScenarioError> {
    let u = Iterated::from_elem_const(FieldElement::scalar(scalar_of::<S>(r)?)).add_ref(&Iterated::inner_var());
    PreparedBranch::from_coordinates(&format!("u = {r}"), Shape::Fiber, ChartId::Main, None, u, Iterated::outer_var(), caps)
}

fn spot_branches<S: Scalar>(
    sc: &Scenario<S>,
    branches: &[PreparedBranch<S>],
    point_law: bool,
    caps: &[i64],
) -> Result<Vec<PreparedBranch<S>>, ScenarioError> {
    let mut rng = ChaCha8Rng::seed_from_u64(sc.check.seed);
    let mut out = Vec::new();
    if point_law {
        let x = common_center(sc, branches)?.unwrap_or_else(FieldElement::zero);
        let residue = branches.first().and_then(|b| b.residue.clone());
        for _ in 0..sc.check.spot_checks {
            out.push(spot_line(&x, &residue, &random_ratio(&mut rng), caps)?);
        }
    } else {
        for _ in 0..sc.check.spot_checks {
            let r = random_ratio(&mut rng);
            out.push(spot_point(&r, caps)?);
        }
    }
    Ok(out)
}

fn check_fiber_points<S: Scalar>(branches: &[PreparedBranch<S>]) -> Result<(), ScenarioError> {
    for (i, b) in branches.iter().enumerate() {
        if b.shape != Shape::Fiber {
            return Err(ScenarioError::Branch { branch: b.name.clone(), reason: "fiber laws sum over fiber branches only".into() });
        }
        for other in &branches[..i] {
            if other.center == b.center && other.residue == b.residue {
                return Err(ScenarioError::Branch { branch: b.name.clone(), reason: format!("same point as `{}`", other.name) });
            }
        }
    }
    Ok(())
}

/// Sum of relative residues over the listed branches, plus spot checks.
fn differential_law<S: Scalar>(sc: &Scenario<S>, point_law: bool) -> Result<Report, ScenarioError> {
    let form = sc.form.as_ref().ok_or_else(|| ScenarioError::Invalid("no [form] section".into()))?;
    let ((report, verdict), used) = with_retry(sc.check.precision, |p| {
        let caps = p.caps();
        let branches = prepare_all(sc, &caps)?;
        if point_law {
            common_center(sc, &branches)?;
        } else {
            check_fiber_points(&branches)?;
        }
        let contributions = branches
            .iter()
            .map(|b| Ok(relres(&b.form(&sc.chart, form, &caps)?, &b.kind, &caps)?))
            .collect::<Result<Vec<Form1<S>>, ScenarioError>>()?;
        let total = summed_forms(&contributions);
        let parts: Vec<&Series<S>> = contributions.iter().map(|f| &f.coeff).collect();
        let w = window(&total.coeff, &parts);
        require_window(w)?;
        let spots = spot_branches(sc, &branches, point_law, &caps)?;
        let spot_values = spots
            .iter()
            .map(|b| Ok(relres(&b.form(&sc.chart, form, &caps)?, &b.kind, &caps)?))
            .collect::<Result<Vec<Form1<S>>, ScenarioError>>()?;

        let mut r = Report::new(&sc.name, "verify", Some(sc.check.law.name()), p, sc.check.seed);
        r.push("form", format!("({form}) d{}∧d{}", sc.chart.inner, sc.chart.outer));
        for (i, (b, c)) in branches.iter().zip(&contributions).enumerate() {
            r.push(format!("branch.{i}.name"), &b.name);
            r.push(format!("branch.{i}.kind"), kind_name(b));
            r.push(format!("branch.{i}.contribution"), &c.coeff);
        }
        r.push("aggregate", &total.coeff);
        r.push("window", window_text(w));
        let mut ok = total.coeff.is_zero_within();
        if !ok {
            r.push("note", "sum of contributions is not zero");
        }
        for (i, (b, v)) in spots.iter().zip(&spot_values).enumerate() {
            r.push(format!("spot.{i}.branch"), &b.name);
            r.push(format!("spot.{i}.contribution"), &v.coeff);
            if !v.coeff.is_zero_within() {
                ok = false;
                r.push("note", format!("support violation: unlisted branch {} contributes", b.name));
            }
        }
        r.push("note", "only rational forms are exercised; finitely many branches are checked");
        Ok((r, ok))
    })?;
    finish(report, verdict, used)
}

fn finish(mut r: Report, ok: bool, used: Precision) -> Result<Report, ScenarioError> {
    r.precision = used;
    r.verdict = if ok { Verdict::Pass } else { Verdict::Fail };
    Ok(r)
}

fn symbol_inputs<S: Scalar>(
    sc: &Scenario<S>,
    b: &PreparedBranch<S>,
    caps: &[i64],
) -> Result<(Iterated<S>, Iterated<S>), ScenarioError> {
    let sym = sc.symbol.as_ref().ok_or_else(|| ScenarioError::Invalid("no [symbol] section".into()))?;
    Ok((b.expand(&sc.chart, &sym.alpha, caps)?, b.expand(&sc.chart, &sym.beta, caps)?))
}

fn symbol_law<S: Scalar>(sc: &Scenario<S>, point_law: bool) -> Result<Report, ScenarioError> {
    let ((report, verdict), used) = with_retry(sc.check.precision, |p| {
        let caps = p.caps();
        let branches = prepare_all(sc, &caps)?;
        if point_law {
            common_center(sc, &branches)?;
        } else {
            check_fiber_points(&branches)?;
        }
        let value = |b: &PreparedBranch<S>| -> Result<Series<S>, ScenarioError> {
            let (a, be) = symbol_inputs(sc, b, &caps)?;
            Ok(pushsym(&a, &be, &b.kind, &caps)?)
        };
        let contributions = branches.iter().map(value).collect::<Result<Vec<_>, _>>()?;
        let total = summed_symbols(&contributions);
        let deviation = total.sub_ref(&Series::one());
        let parts: Vec<&Series<S>> = contributions.iter().collect();
        let w = window(&deviation, &parts);
        require_window(w)?;
        let spots = spot_branches(sc, &branches, point_law, &caps)?;
        let spot_values = spots.iter().map(value).collect::<Result<Vec<_>, _>>()?;

        let sym = sc.symbol.as_ref().expect("checked above");
        let mut r = Report::new(&sc.name, "verify", Some(sc.check.law.name()), p, sc.check.seed);
        r.push("alpha", &sym.alpha);
        r.push("beta", &sym.beta);
        for (i, (b, c)) in branches.iter().zip(&contributions).enumerate() {
            r.push(format!("branch.{i}.name"), &b.name);
            r.push(format!("branch.{i}.kind"), kind_name(b));
            r.push(format!("branch.{i}.contribution"), c);
        }
        r.push("aggregate", &total);
        r.push("window", window_text(w));
        let mut ok = deviation.is_zero_within();
        if !ok {
            r.push("note", "product of contributions is not 1");
        }
        for (i, (b, v)) in spots.iter().zip(&spot_values).enumerate() {
            r.push(format!("spot.{i}.branch"), &b.name);
            r.push(format!("spot.{i}.contribution"), v);
            if !v.sub_ref(&Series::one()).is_zero_within() {
                ok = false;
                r.push("note", format!("support violation: unlisted branch {} contributes", b.name));
            }
        }
        Ok((r, ok))
    })?;
    finish(report, verdict, used)
}

/// `∑_{C∋x} f_*^{x,C}(ω) = 0` over the listed branches through `x`.
pub fn verify_point_reciprocity<S: Scalar>(sc: &Scenario<S>) -> Result<Report, ScenarioError> {
    differential_law(sc, true)
}

/// `∑_{x∈F} f_*^{x,F}(ω) = 0` over the listed fiber points.
pub fn verify_fiber_reciprocity<S: Scalar>(sc: &Scenario<S>) -> Result<Report, ScenarioError> {
    differential_law(sc, false)
}

/// `∏ f_*(α, β) = 1` over branches through a point or points of the fiber.
pub fn verify_symbol_reciprocity<S: Scalar>(sc: &Scenario<S>, point_law: bool) -> Result<Report, ScenarioError> {
    symbol_law(sc, point_law)
}

fn ext_norm<S: Scalar>(b: &PreparedBranch<S>, x: &FieldElement<S>) -> Result<FieldElement<S>, ScenarioError> {
    match &b.residue {
        Some(r) => Ok(FieldElement::scalar(r.norm(x).map_err(|e| ScenarioError::Invalid(e.to_string()))?)),
        None => Ok(x.clone()),
    }
}

fn ext_trace<S: Scalar>(b: &PreparedBranch<S>, x: &FieldElement<S>) -> Result<FieldElement<S>, ScenarioError> {
    match &b.residue {
        Some(r) => Ok(FieldElement::scalar(r.trace(x).map_err(|e| ScenarioError::Invalid(e.to_string()))?)),
        None => Ok(x.clone()),
    }
}

/// Outcome of both identities for one `(α, β, γ)`.
struct IdentityCheck<S: Scalar> {
    lhs1: FieldElement<S>,
    rhs1: FieldElement<S>,
    lhs2: FieldElement<S>,
    rhs2: FieldElement<S>,
}

/// `da`, `db` are `dα/α`, `dβ/β`; `γ` is pulled back before the wedge is
/// formed, which is cheap because `f^*γ` has a single `q`-slice.
fn identities<S: Scalar>(
    b: &PreparedBranch<S>,
    (alpha, beta): (&Iterated<S>, &Iterated<S>),
    (da, db): (&OneForm2d<S>, &OneForm2d<S>),
    pushed: &Series<S>,
    gamma: &Series<S>,
    caps: &[i64],
) -> Result<IdentityCheck<S>, ScenarioError> {
    let fg = b.pull_back(gamma, caps)?;
    let lhs1 = ext_norm(b, &tame_2d(alpha, beta, &fg, caps)?)?;
    let rhs1 = tame_1d(pushed, gamma, caps)?;
    let first = res_total_scaled(&Form2::new(da.du.clone()), &db.dt.mul_ref(&fg))?;
    let second = res_total_scaled(&Form2::new(da.dt.clone()), &db.du.mul_ref(&fg))?;
    let lhs2 = ext_trace(b, &(&first - &second))?;
    let rhs2 = pairing_1d(gamma, pushed, caps)?;
    Ok(IdentityCheck { lhs1, rhs1, lhs2, rhs2 })
}

/// Generators of `K_{x,C}^*` used for the identity sweep.
fn generators<S: Scalar>(
    sc: &Scenario<S>,
    b: &PreparedBranch<S>,
    caps: &[i64],
) -> Result<Vec<(String, Iterated<S>)>, ScenarioError> {
    let (alpha, beta) = symbol_inputs(sc, b, caps)?;
    let local = match &b.center {
        Some(c) => b.u_main.sub_ref(&Iterated::from_elem_const(c.clone())),
        None => b.u_chart.clone(),
    };
    let c = |n: i64| Iterated::from_elem_const(FieldElement::int(n));
    let (u, t) = (sc.chart.inner.as_str(), sc.chart.outer.as_str());
    let x = match &b.center {
        Some(_) => format!("({u} - x)"),
        None => format!("1/{u}"),
    };
    Ok(vec![
        ("alpha".into(), alpha),
        ("beta".into(), beta),
        (t.into(), b.t.clone()),
        (x.clone(), local.clone()),
        ("2".into(), c(2)),
        ("-3".into(), c(-3)),
        (format!("1 + {x}"), c(1).add_ref(&local)),
        (format!("1 + {x}*{t}"), c(1).add_ref(&local.mul_ref(&b.t))),
    ])
}

/// A product of generators, by exponent.
type Word = Vec<(usize, i64)>;

fn word_label(gens: &[(String, Iterated<impl Scalar>)], w: &Word) -> String {
    match w.as_slice() {
        [(i, 1)] => gens[*i].0.clone(),
        _ => w.iter().map(|(i, e)| format!("({})^{e}", gens[*i].0)).collect::<Vec<_>>().join("*"),
    }
}

fn random_word(rng: &mut ChaCha8Rng, n: usize) -> Word {
    (0..rng.gen_range(1..=3)).map(|_| (rng.gen_range(0..n), [-2, -1, 1, 2][rng.gen_range(0..4)])).collect()
}

fn scaled<S: Scalar>(f: &OneForm2d<S>, e: i64) -> OneForm2d<S> {
    let c = FieldElement::int(e);
    OneForm2d { du: f.du.map_coeffs(|s| s.scale(&c)), dt: f.dt.map_coeffs(|s| s.scale(&c)) }
}

/// Both characterizing identities on generator pairs and seeded random products.
pub fn verify_characterizing<S: Scalar>(sc: &Scenario<S>) -> Result<Report, ScenarioError> {
    let sym = sc.symbol.as_ref().ok_or_else(|| ScenarioError::Invalid("no [symbol] section".into()))?;
    let ((report, verdict), used) = with_retry(sc.check.precision, |p| {
        let caps = p.caps();
        let branches = prepare_all(sc, &caps)?;
        let gammas = sym.gammas.iter().map(|g| sc.base_element(g, &caps)).collect::<Result<Vec<_>, _>>()?;
        let mut r = Report::new(&sc.name, "verify", Some(sc.check.law.name()), p, sc.check.seed);
        let mut rng = ChaCha8Rng::seed_from_u64(sc.check.seed);
        let mut all_ok = true;
        for (bi, b) in branches.iter().enumerate() {
            let gens = generators(sc, b, &caps)?;
            let dlogs = gens.iter().map(|(_, g)| dlog(g, &caps)).collect::<Result<Vec<_>, _>>()?;
            let mut words: Vec<(Word, Word)> = Vec::new();
            for i in 0..gens.len() {
                for j in 0..gens.len() {
                    words.push((vec![(i, 1)], vec![(j, 1)]));
                }
            }
            for _ in 0..sc.check.samples {
                let a = random_word(&mut rng, gens.len());
                let bw = random_word(&mut rng, gens.len());
                words.push((a, bw));
            }
            let eval = |w: &Word| -> Result<(Iterated<S>, OneForm2d<S>), ScenarioError> {
                let mut value = Iterated::one();
                let mut form: Option<OneForm2d<S>> = None;
                for &(i, e) in w {
                    value = value.mul_ref(&gens[i].1.pow(e, &caps)?);
                    let term = scaled(&dlogs[i], e);
                    form = Some(match form {
                        None => term,
                        Some(f) => f.add(&term),
                    });
                }
                Ok((value, form.expect("words are nonempty")))
            };
            let (mut n1, mut n2, mut total) = (0usize, 0usize, 0usize);
            for (wa, wb) in &words {
                let label = format!("{{{}, {}}}", word_label(&gens, wa), word_label(&gens, wb));
                let (a, da) = eval(wa)?;
                let (be, db) = eval(wb)?;
                let pushed = pushsym(&a, &be, &b.kind, &caps)?;
                for (gi, g) in gammas.iter().enumerate() {
                    let chk = identities(b, (&a, &be), (&da, &db), &pushed, g, &caps)?;
                    total += 1;
                    if chk.lhs1 == chk.rhs1 {
                        n1 += 1;
                    } else if n1 + 8 > total {
                        r.push("note", format!("identity 1 fails at {} on {label}, gamma {}: {} ≠ {}", b.name, sym.gammas[gi], chk.lhs1, chk.rhs1));
                    }
                    if chk.lhs2 == chk.rhs2 {
                        n2 += 1;
                    } else if n2 + 8 > total {
                        r.push("note", format!("identity 2 fails at {} on {label}, gamma {}: {} ≠ {}", b.name, sym.gammas[gi], chk.lhs2, chk.rhs2));
                    }
                }
            }
            r.push(format!("branch.{bi}.name"), &b.name);
            r.push(format!("branch.{bi}.kind"), kind_name(b));
            r.push(format!("branch.{bi}.identity1"), format!("{n1}/{total}"));
            r.push(format!("branch.{bi}.identity2"), format!("{n2}/{total}"));
            all_ok &= n1 == total && n2 == total;
        }
        Ok((r, all_ok))
    })?;
    finish(report, verdict, used)
}

/// Moves the branch parameters: `p ← p(1+p+q)`, and `q ← q(1+p²)` off the fiber.
fn reparameterize<S: Scalar>(b: &PreparedBranch<S>, caps: &[i64]) -> Result<PreparedBranch<S>, ScenarioError> {
    let (p, q) = (Iterated::<S>::inner_var(), Iterated::<S>::outer_var());
    let phi = p.mul_ref(&Iterated::one().add_ref(&p).add_ref(&q));
    let psi = match b.shape {
        Shape::Fiber => q.clone(),
        Shape::Horizontal => q.mul_ref(&Iterated::one().add_ref(&p.mul_ref(&p))),
    };
    let u = b.raw_u.substitute(&phi, &psi, caps)?;
    let t = b.raw_t.substitute(&phi, &psi, caps)?;
    let t = if b.shape == Shape::Fiber { Iterated::outer_var() } else { t };
    PreparedBranch::from_coordinates(&b.name, b.shape, b.chart, b.residue.clone(), u, t, caps)
}

/// `relres` and `res_total` do not depend on the branch parameters.
pub fn verify_parameter_independence<S: Scalar>(sc: &Scenario<S>) -> Result<Report, ScenarioError> {
    let form = sc.form.as_ref().ok_or_else(|| ScenarioError::Invalid("no [form] section".into()))?;
    let ((report, verdict), used) = with_retry(sc.check.precision, |p| {
        let caps = p.caps();
        let branches = prepare_all(sc, &caps)?;
        let mut r = Report::new(&sc.name, "verify", Some(sc.check.law.name()), p, sc.check.seed);
        r.push("form", format!("({form}) d{}∧d{}", sc.chart.inner, sc.chart.outer));
        let mut ok = true;
        for (i, b) in branches.iter().enumerate() {
            let moved = reparameterize(b, &caps)?;
            let w0 = b.form(&sc.chart, form, &caps)?;
            let w1 = moved.form(&sc.chart, form, &caps)?;
            let r0 = relres(&w0, &b.kind, &caps)?;
            let r1 = relres(&w1, &moved.kind, &caps)?;
            let diff = r0.coeff.sub_ref(&r1.coeff);
            let w = window(&diff, &[&r0.coeff, &r1.coeff]);
            require_window(w)?;
            let t0 = res_total(&w0)?;
            let t1 = res_total(&w1)?;
            let same = diff.is_zero_within() && t0 == t1;
            ok &= same;
            r.push(format!("branch.{i}.name"), &b.name);
            r.push(format!("branch.{i}.kind"), kind_name(b));
            r.push(format!("branch.{i}.relres"), &r0.coeff);
            r.push(format!("branch.{i}.relres_moved"), &r1.coeff);
            r.push(format!("branch.{i}.res_total"), &t0);
            r.push(format!("branch.{i}.res_total_moved"), &t1);
            r.push(format!("branch.{i}.window"), window_text(w));
            if !same {
                r.push("note", format!("branch {} changes under reparameterization", b.name));
            }
        }
        Ok((r, ok))
    })?;
    finish(report, verdict, used)
}

/// Dispatches on the scenario's law.
pub fn verify<S: Scalar>(sc: &Scenario<S>) -> Result<Report, ScenarioError> {
    sc.validate()?;
    match sc.check.law {
        Law::Point => verify_point_reciprocity(sc),
        Law::Fiber => verify_fiber_reciprocity(sc),
        Law::SymbolPoint => verify_symbol_reciprocity(sc, true),
        Law::SymbolFiber => verify_symbol_reciprocity(sc, false),
        Law::Characterizing => verify_characterizing(sc),
        Law::Independence => verify_parameter_independence(sc),
    }
}

fn computed<S: Scalar>(
    sc: &Scenario<S>,
    command: &str,
    body: impl Fn(&[i64], &[PreparedBranch<S>], &mut Report) -> Result<(), ScenarioError>,
) -> Result<Report, ScenarioError> {
    sc.validate()?;
    let (r, _) = with_retry(sc.check.precision, |p| {
        let caps = p.caps();
        let branches = prepare_all(sc, &caps)?;
        let mut r = Report::new(&sc.name, command, None, p, sc.check.seed);
        for (i, b) in branches.iter().enumerate() {
            r.push(format!("branch.{i}.name"), &b.name);
            r.push(format!("branch.{i}.kind"), kind_name(b));
        }
        body(&caps, &branches, &mut r)?;
        Ok(r)
    })?;
    Ok(r)
}

/// Expansions of the scenario's form and symbol arguments in every branch field.
pub fn expand_report<S: Scalar>(sc: &Scenario<S>) -> Result<Report, ScenarioError> {
    computed(sc, "expand", |caps, branches, r| {
        for (i, b) in branches.iter().enumerate() {
            if let Some(g) = &sc.form {
                r.push(format!("branch.{i}.form"), &b.form(&sc.chart, g, caps)?.coeff);
            }
            if sc.symbol.is_some() {
                let (a, be) = symbol_inputs(sc, b, caps)?;
                r.push(format!("branch.{i}.alpha"), &a);
                r.push(format!("branch.{i}.beta"), &be);
            }
        }
        Ok(())
    })
}

/// Raw residues of the form in every branch field.
pub fn residue_report<S: Scalar>(sc: &Scenario<S>) -> Result<Report, ScenarioError> {
    let form = sc.form.as_ref().ok_or_else(|| ScenarioError::Invalid("no [form] section".into()))?;
    computed(sc, "residue", |caps, branches, r| {
        for (i, b) in branches.iter().enumerate() {
            let w = b.form(&sc.chart, form, caps)?;
            r.push(format!("branch.{i}.res_outer"), &res_outer(&w)?.coeff);
            match res_inner(&w) {
                Ok(x) => r.push(format!("branch.{i}.res_inner"), &x.coeff),
                Err(e) => r.push(format!("branch.{i}.res_inner"), format!("unavailable: {e}")),
            }
            r.push(format!("branch.{i}.res_total"), &res_total(&w)?);
        }
        Ok(())
    })
}

/// Relative residues and their sum, without a verdict.
pub fn pushforward_report<S: Scalar>(sc: &Scenario<S>) -> Result<Report, ScenarioError> {
    let form = sc.form.as_ref().ok_or_else(|| ScenarioError::Invalid("no [form] section".into()))?;
    computed(sc, "pushforward", |caps, branches, r| {
        let mut parts = Vec::new();
        for (i, b) in branches.iter().enumerate() {
            let c = relres(&b.form(&sc.chart, form, caps)?, &b.kind, caps)?;
            r.push(format!("branch.{i}.contribution"), &c.coeff);
            parts.push(c);
        }
        r.push("aggregate", &summed_forms(&parts).coeff);
        Ok(())
    })
}

/// Symbol pushforwards and their product, without a verdict.
pub fn symbol_report<S: Scalar>(sc: &Scenario<S>) -> Result<Report, ScenarioError> {
    if sc.symbol.is_none() {
        return Err(ScenarioError::Invalid("no [symbol] section".into()));
    }
    computed(sc, "symbol", |caps, branches, r| {
        let mut parts = Vec::new();
        for (i, b) in branches.iter().enumerate() {
            let (a, be) = symbol_inputs(sc, b, caps)?;
            let c = pushsym(&a, &be, &b.kind, caps)?;
            r.push(format!("branch.{i}.contribution"), &c);
            parts.push(c);
        }
        r.push("aggregate", &summed_symbols(&parts));
        Ok(())
    })
}

