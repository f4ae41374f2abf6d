use twolocal::pushforward::{pushsym, relres};
use twolocal::scenarios::{BranchSpec, Chart, ChartId, CheckSpec, Expr, Scenario, Shape};
use twolocal::{Rational, Series};

const CAPS: [i64; 2] = [10, 10];

fn scenario() -> Scenario<Rational> {
    Scenario {
        name: "charts".into(),
        ext: None,
        chart: Chart { inner: "z".into(), outer: "t".into(), inverse: Some("w".into()) },
        point: None,
        branches: Vec::new(),
        form: None,
        symbol: None,
        check: CheckSpec::default(),
    }
}

fn branch(name: &str, shape: Shape, chart: ChartId, u: &str, t: &str) -> BranchSpec {
    BranchSpec {
        name: name.into(),
        shape,
        chart,
        extension: false,
        u: Expr::parse(u).unwrap(),
        t: Expr::parse(t).unwrap(),
    }
}

fn relres_of(sc: &Scenario<Rational>, b: &BranchSpec, g: &str) -> Series {
    let prepared = sc.prepare(b, &CAPS).unwrap();
    let omega = prepared.form(&sc.chart, &Expr::parse(g).unwrap(), &CAPS).unwrap();
    relres(&omega, &prepared.kind, &CAPS).unwrap().coeff
}

fn pushsym_of(sc: &Scenario<Rational>, b: &BranchSpec, alpha: &str, beta: &str) -> Series {
    let p = sc.prepare(b, &CAPS).unwrap();
    let a = p.expand(&sc.chart, &Expr::parse(alpha).unwrap(), &CAPS).unwrap();
    let c = p.expand(&sc.chart, &Expr::parse(beta).unwrap(), &CAPS).unwrap();
    pushsym(&a, &c, &p.kind, &CAPS).unwrap()
}

#[test]
fn both_charts_see_the_same_point() {
    let sc = scenario();
    let main = branch("z = 1", Shape::Fiber, ChartId::Main, "1 + p", "q");
    let inverse = branch("w = 1", Shape::Fiber, ChartId::Inverse, "1 + p", "q");
    for g in ["1/((z-1)*t)", "z^2/((z-1)^2*(z+2)*t^2)", "(1+t*z)/(z*(z-1-t))"] {
        let (a, b) = (relres_of(&sc, &main, g), relres_of(&sc, &inverse, g));
        assert!(a.agrees_with(&b), "{g}: {a} vs {b}");
    }
    let (a, b) = (pushsym_of(&sc, &main, "z", "z - 1"), pushsym_of(&sc, &inverse, "z", "z - 1"));
    assert!(a.agrees_with(&b), "{a} vs {b}");
}

#[test]
fn prepared_branch_records_its_point() {
    let sc = scenario();
    let at_infinity = sc.prepare(&branch("∞", Shape::Fiber, ChartId::Inverse, "p", "q"), &CAPS).unwrap();
    assert!(at_infinity.center.is_none());
    let at_one = sc.prepare(&branch("w = 1/2", Shape::Fiber, ChartId::Inverse, "1/2 + p", "q"), &CAPS).unwrap();
    assert_eq!(at_one.center.unwrap().as_base().unwrap(), Rational::from_integer(2.into()));
}

#[test]
fn horizontal_coefficient_field_is_normalized() {
    let sc = scenario();
    // the same curve z = 0 with t depending on the transverse parameter
    let plain = branch("plain", Shape::Horizontal, ChartId::Main, "q", "p");
    let bent = branch("bent", Shape::Horizontal, ChartId::Main, "q*(1 + p)", "p + p*q + q^2");
    let prepared = sc.prepare(&bent, &CAPS).unwrap();
    assert!(prepared.t.terms().all(|(k, _)| k == 0), "t still involves q: {}", prepared.t);
    for g in ["1/(z*t*(z-t))", "1/(z^3*t)", "(1 + z)/(z^2*(z - t^2))"] {
        let (a, b) = (relres_of(&sc, &plain, g), relres_of(&sc, &bent, g));
        assert!(a.agrees_with(&b), "{g}: {a} vs {b}");
        assert!(b.prec().is_none_or(|p| p > 2), "{g}: window too small in {b}");
    }
}

#[test]
fn singular_parameterizations_are_rejected() {
    let sc = scenario();
    let err = sc.prepare(&branch("cusp", Shape::Horizontal, ChartId::Main, "p + q", "p + q"), &CAPS).unwrap_err();
    assert!(err.to_string().contains("Jacobian"), "{err}");
    let err = sc.prepare(&branch("off", Shape::Fiber, ChartId::Main, "p", "1 + q"), &CAPS).unwrap_err();
    assert!(!err.to_string().is_empty());
}
