//! Differential forms over one- and two-dimensional local fields and their residues.
//!
//! A [`Form2`] over `k((u))((t))` is stored as its coefficient against `du∧dt`,
//! `u` the inner and `t` the outer parameter. A [`Form1`] is stored as its
//! coefficient against `dx`, `x` the variable of the one-dimensional field.

use std::fmt;

use num_traits::Zero;

use crate::coefficients::FieldElement;
use crate::scalar::Scalar;
use crate::series::{Iterated, Laurent, SeriesError, Series};

/// `g·dx` over a one-dimensional local field.
#[derive(Debug, Clone, PartialEq)]
pub struct Form1<S: Scalar> {
    pub coeff: Series<S>,
}

/// `g·du∧dt` over a two-dimensional local field.
#[derive(Debug, Clone, PartialEq)]
pub struct Form2<S: Scalar> {
    pub coeff: Iterated<S>,
}

/// Coordinates `(f_u, f_t)` of the 1-form `f_u du + f_t dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneForm2d<S: Scalar> {
    pub du: Iterated<S>,
    pub dt: Iterated<S>,
}

impl<S: Scalar> Form1<S> {
    pub fn new(coeff: Series<S>) -> Self {
        Form1 { coeff }
    }

    pub fn zero() -> Self {
        Form1 { coeff: Series::zero() }
    }

    pub fn add(&self, other: &Self) -> Self {
        Form1 { coeff: self.coeff.add_ref(&other.coeff) }
    }

    pub fn agrees_with(&self, other: &Self) -> bool {
        self.coeff.agrees_with(&other.coeff)
    }
}

impl<S: Scalar> fmt::Display for Form1<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} d", self.coeff)
    }
}

impl<S: Scalar> Form2<S> {
    pub fn new(coeff: Iterated<S>) -> Self {
        Form2 { coeff }
    }

    /// `g·dt∧du`, stored as `−g·du∧dt`.
    pub fn from_dt_du(coeff: Iterated<S>) -> Self {
        Form2 { coeff: coeff.neg_ref() }
    }

    pub fn scale(&self, g: &Iterated<S>) -> Self {
        Form2 { coeff: self.coeff.mul_ref(g) }
    }

    pub fn add(&self, other: &Self) -> Self {
        Form2 { coeff: self.coeff.add_ref(&other.coeff) }
    }
}

impl<S: Scalar> OneForm2d<S> {
    pub fn add(&self, other: &Self) -> Self {
        OneForm2d { du: self.du.add_ref(&other.du), dt: self.dt.add_ref(&other.dt) }
    }

    pub fn agrees_with(&self, other: &Self) -> bool {
        self.du.agrees_with(&other.du) && self.dt.agrees_with(&other.dt)
    }
}

/// Exterior derivative of a function.
pub fn d<S: Scalar>(s: &Iterated<S>) -> OneForm2d<S> {
    OneForm2d { du: s.d_inner(), dt: s.d_outer() }
}

/// `ds/s` in coordinates against `du`, `dt`.
pub fn dlog<S: Scalar>(s: &Iterated<S>, caps: &[i64]) -> Result<OneForm2d<S>, SeriesError> {
    let inv = s.inv(caps)?;
    Ok(OneForm2d { du: s.d_inner().mul_ref(&inv), dt: s.d_outer().mul_ref(&inv) })
}

/// `(f₁du + f₂dt) ∧ (g₁du + g₂dt) = (f₁g₂ − f₂g₁) du∧dt`.
pub fn wedge<S: Scalar>(a: &OneForm2d<S>, b: &OneForm2d<S>) -> Form2<S> {
    Form2 { coeff: a.du.mul_ref(&b.dt).sub_ref(&a.dt.mul_ref(&b.du)) }
}

/// Exterior derivative of a 1-form.
pub fn d1<S: Scalar>(eta: &OneForm2d<S>) -> Form2<S> {
    // d(f du + g dt) = (∂_u g − ∂_t f) du∧dt
    Form2 { coeff: eta.dt.d_inner().sub_ref(&eta.du.d_outer()) }
}

/// Residue along the outer parameter: writing `ω = Σ ω_i(u) ∧ t^i dt`, returns `ω_{−1}(u)`.
pub fn res_outer<S: Scalar>(omega: &Form2<S>) -> Result<Form1<S>, SeriesError> {
    let slice = omega.coeff.coeff(-1).map_err(|_| {
        SeriesError::InsufficientPrecision("outer residue: t^-1 slice beyond precision".into())
    })?;
    Ok(Form1 { coeff: slice })
}

/// Residue along the inner parameter: writing `ω = Σ u^i du ∧ ω'_i(t)`, returns `ω'_{−1}(t)`.
///
/// The result is known up to the first `t`-slice whose `u^{−1}` coefficient is
/// unknown; if no slice is determined the call fails.
pub fn res_inner<S: Scalar>(omega: &Form2<S>) -> Result<Form1<S>, SeriesError> {
    let coeff = omega.coeff.inner_coeff_series(-1);
    if let (Some(p), Some(low)) = (coeff.prec(), omega.coeff.valuation_bound()) {
        if p <= low && coeff.prec() != omega.coeff.prec() {
            return Err(SeriesError::InsufficientPrecision(
                "inner residue: u^-1 coefficient unknown in the leading slice".into(),
            ));
        }
    }
    Ok(Form1 { coeff })
}

/// Classical residue: coefficient of `x^{−1}dx`.
pub fn res_1d<S: Scalar>(eta: &Form1<S>) -> Result<FieldElement<S>, SeriesError> {
    eta.coeff.coeff(-1)
}

/// Two-dimensional residue `res_{K/k(x)}`, defined as `res_1d ∘ res_outer`.
pub fn res_total<S: Scalar>(omega: &Form2<S>) -> Result<FieldElement<S>, SeriesError> {
    res_1d(&res_outer(omega)?)
}

/// `res(γ · dα/α ∧ dβ/β)` over the two-dimensional field.
pub fn pairing_2d<S: Scalar>(
    alpha: &Iterated<S>,
    beta: &Iterated<S>,
    gamma: &Iterated<S>,
    caps: &[i64],
) -> Result<FieldElement<S>, SeriesError> {
    let w = wedge(&dlog(alpha, caps)?, &dlog(beta, caps)?);
    res_total_scaled(&w, gamma)
}

/// `res_total(g·ω)`, reading only the coefficients that reach `t^{-1}u^{-1}`.
pub fn res_total_scaled<S: Scalar>(omega: &Form2<S>, g: &Iterated<S>) -> Result<FieldElement<S>, SeriesError> {
    let w = &omega.coeff;
    let (Some(vw), Some(vg)) = (w.valuation_bound(), g.valuation_bound()) else {
        return Ok(FieldElement::zero());
    };
    let known = [w.prec().map(|p| p + vg), g.prec().map(|p| p + vw)].into_iter().flatten().min();
    if known.is_some_and(|p| p <= -1) {
        return Err(SeriesError::InsufficientPrecision("outer residue: t^-1 slice beyond precision".into()));
    }
    let mut acc = FieldElement::zero();
    for (i, slice) in w.terms() {
        let other = g.coeff(-1 - i)?;
        acc = acc + slice.product_coeff(&other, -1).map_err(|_| {
            SeriesError::InsufficientPrecision("residue: u^-1 coefficient beyond precision".into())
        })?;
    }
    Ok(acc)
}

/// `res(a · db/b)` over the one-dimensional field.
pub fn pairing_1d<S: Scalar>(
    a: &Series<S>,
    b: &Series<S>,
    caps: &[i64],
) -> Result<FieldElement<S>, SeriesError> {
    let dlog_b = b.derivative().mul_ref(&b.inv(caps)?);
    res_1d(&Form1 { coeff: a.mul_ref(&dlog_b) })
}

/// `dx/x`-coefficient helper for one-variable series.
pub fn dlog_1d<S: Scalar>(b: &Laurent<FieldElement<S>>, caps: &[i64]) -> Result<Series<S>, SeriesError> {
    Ok(b.derivative().mul_ref(&b.inv(caps)?))
}

#[cfg(test)]
mod tests {
    use num_rational::BigRational;
    use num_traits::One;
    use proptest::prelude::*;
    use crate::series::Coeff;

    use super::*;

    type Q = BigRational;
    type It = Iterated<Q>;
    const CAPS: [i64; 2] = [12, 12];

    fn fe(n: i64) -> FieldElement<Q> {
        FieldElement::int(n)
    }
    fn u() -> It {
        It::inner_var()
    }
    fn t() -> It {
        It::outer_var()
    }
    fn c(n: i64) -> It {
        It::from_elem_const(fe(n))
    }
    fn inv(x: &It) -> It {
        x.inv(&CAPS).unwrap()
    }
    fn poly(terms: &[(i64, i64, i64)]) -> It {
        terms.iter().fold(It::zero(), |acc, &(i, j, k)| {
            acc + It::monomial(Series::monomial(fe(k), j), i)
        })
    }
    fn du() -> OneForm2d<Q> {
        OneForm2d { du: It::one(), dt: It::zero() }
    }
    fn dt() -> OneForm2d<Q> {
        OneForm2d { du: It::zero(), dt: It::one() }
    }

    #[test]
    fn dlog_examples() {
        let l = dlog(&u(), &CAPS).unwrap();
        assert!(l.du.agrees_with(&inv(&u())) && l.dt.is_zero_within());
        let l = dlog(&t(), &CAPS).unwrap();
        assert!(l.dt.agrees_with(&inv(&t())) && l.du.is_zero_within());
        let s = u() - t();
        let l = dlog(&s, &CAPS).unwrap();
        assert!(l.du.agrees_with(&inv(&s)));
        assert!(l.dt.agrees_with(&inv(&s).neg_ref()));
        // u − t = u·(1 − t/u)
        let other = dlog(&u(), &CAPS).unwrap().add(&dlog(&(It::one() - t() * inv(&u())), &CAPS).unwrap());
        assert!(l.agrees_with(&other));
        assert!(dlog(&It::zero(), &CAPS).is_err());
    }

    #[test]
    fn wedge_examples() {
        assert!(wedge(&du(), &dt()).coeff.agrees_with(&It::one()));
        assert!(wedge(&dt(), &du()).coeff.agrees_with(&c(-1)));
        let w = wedge(&dlog(&u(), &CAPS).unwrap(), &dlog(&t(), &CAPS).unwrap());
        assert!(w.coeff.agrees_with(&poly(&[(-1, -1, 1)])));
    }

    #[test]
    fn res_outer_examples() {
        let omega = Form2::new(inv(&(u() * t())));
        assert!(res_outer(&omega).unwrap().coeff.agrees_with(&Series::monomial(fe(1), -1)));
        assert!(res_outer(&Form2::new(It::one())).unwrap().coeff.is_zero_within());
        let omega = Form2::new(inv(&((u() - t()) * t())));
        let r = res_outer(&omega).unwrap();
        assert!(r.coeff.agrees_with(&Series::monomial(fe(1), -1)));
        assert!(res_outer(&Form2::new(It::big_o(-1))).is_err());
    }

    #[test]
    fn res_inner_examples() {
        let omega = Form2::new(inv(&(u() * t())));
        assert!(res_inner(&omega).unwrap().coeff.agrees_with(&Series::monomial(fe(1), -1)));
        let omega = Form2::new(inv(&(u() * (u() - t()))));
        let r = res_inner(&omega).unwrap();
        assert!(r.coeff.is_zero_within());
        assert!(r.coeff.prec().unwrap() >= 11);
        let omega = Form2::new(poly(&[(2, -1, 1)]));
        assert!(res_inner(&omega).unwrap().coeff.agrees_with(&Series::monomial(fe(1), 2)));
    }

    #[test]
    fn res_1d_examples() {
        assert_eq!(res_1d(&Form1::new(Series::monomial(fe(1), -1))).unwrap(), fe(1));
        for n in [-3, -2, 0, 1, 4] {
            assert_eq!(res_1d(&Form1::new(Series::monomial(fe(1), n))).unwrap(), fe(0));
        }
        // (1+t)·d(t²)/t²
        let x = Series::<Q>::from_ints(0, &[1, 1], None);
        let t2 = Series::<Q>::monomial(fe(1), 2);
        let eta = x.mul_ref(&dlog_1d(&t2, &CAPS).unwrap());
        assert_eq!(res_1d(&Form1::new(eta)).unwrap(), fe(2));
        assert!(res_1d(&Form1::new(Series::<Q>::big_o(-1))).is_err());
    }

    #[test]
    fn res_total_examples() {
        assert_eq!(res_total(&Form2::new(inv(&(u() * t())))).unwrap(), fe(1));
        assert_eq!(res_total(&Form2::new(inv(&(u() * u() * t())))).unwrap(), fe(0));
        let w = wedge(&dlog(&u(), &CAPS).unwrap(), &dlog(&t(), &CAPS).unwrap());
        assert_eq!(res_total(&w.scale(&(c(3) + t()))).unwrap(), fe(3));
    }

    #[test]
    fn pairing_examples() {
        assert_eq!(pairing_2d(&u(), &t(), &It::one(), &CAPS).unwrap(), fe(1));
        assert_eq!(pairing_2d(&u(), &u(), &(c(5) + u() * t()), &CAPS).unwrap(), fe(0));
        assert_eq!(pairing_2d(&u(), &t(), &t(), &CAPS).unwrap(), fe(0));
        let tt = Series::<Q>::var();
        assert_eq!(pairing_1d(&Series::one(), &tt, &CAPS).unwrap(), fe(1));
        assert_eq!(pairing_1d(&tt, &tt, &CAPS).unwrap(), fe(0));
        let one_minus_t = Series::<Q>::from_ints(0, &[1, -1], None);
        assert_eq!(pairing_1d(&Series::monomial(fe(1), -1), &one_minus_t, &CAPS).unwrap(), fe(-1));
    }

    fn arb_poly() -> impl Strategy<Value = It> {
        prop::collection::vec((-3i64..3, -3i64..3, -3i64..4), 1..6).prop_map(|v| poly(&v))
    }

    fn arb_regular_unit() -> impl Strategy<Value = It> {
        prop::collection::vec((0i64..3, 0i64..3, -2i64..3), 0..3).prop_map(|v| {
            let v: Vec<_> = v.into_iter().map(|(i, j, k)| if i == 0 && j == 0 { (1, 0, k) } else { (i, j, k) }).collect();
            poly(&v) + c(1)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn residues_are_linear(a in arb_poly(), b in arb_poly(), k in -4i64..5) {
            let (fa, fb) = (Form2::new(a.clone()), Form2::new(b.clone()));
            let comb = Form2::new(a.mul_ref(&c(k)).add_ref(&b));
            let lhs = res_total(&comb).unwrap();
            let rhs = &(&res_total(&fa).unwrap() * &fe(k)) + &res_total(&fb).unwrap();
            prop_assert_eq!(lhs, rhs);
            let li = res_inner(&comb).unwrap().coeff;
            let ri = res_inner(&fa).unwrap().coeff.scale(&fe(k)).add_ref(&res_inner(&fb).unwrap().coeff);
            prop_assert!(li.agrees_with(&ri));
        }

        #[test]
        fn fubini(a in arb_poly(), d in arb_poly()) {
            let denom = d.add_ref(&poly(&[(0, -4, 1)]));
            let omega = Form2::new(a.mul_ref(&inv(&denom)));
            let via_outer = res_total(&omega).unwrap();
            let via_inner = res_1d(&res_inner(&omega).unwrap()).unwrap();
            prop_assert_eq!(via_outer, via_inner);
        }

        #[test]
        fn exact_forms_have_no_residue(g in arb_poly(), d in arb_poly()) {
            let g = g.mul_ref(&inv(&d.add_ref(&poly(&[(-1, -2, 1)]))));
            let eta_u = OneForm2d { du: g.clone(), dt: It::zero() };
            let eta_t = OneForm2d { du: It::zero(), dt: g };
            prop_assert!(res_total(&d1(&eta_u)).unwrap().is_zero());
            prop_assert!(res_total(&d1(&eta_t)).unwrap().is_zero());
        }

        #[test]
        fn residue_parameter_independent(a in arb_poly(), e1 in arb_regular_unit(), e2 in arb_regular_unit()) {
            let omega = a.mul_ref(&inv(&(u() * t() * (u() - t()))));
            let phi = u() * e1;
            let psi = t() * e2;
            let moved = omega.substitute(&phi, &psi, &CAPS).unwrap();
            let jac = wedge(&d(&phi), &d(&psi)).coeff;
            let lhs = res_total(&Form2::new(omega)).unwrap();
            let rhs = res_total(&Form2::new(moved.mul_ref(&jac))).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn scaled_residue_matches_full_product(a in arb_poly(), d in arb_poly(), g in arb_poly()) {
            let omega = Form2::new(a.mul_ref(&inv(&d.add_ref(&poly(&[(-1, -2, 1)])))));
            let full = res_total(&omega.scale(&g));
            let direct = res_total_scaled(&omega, &g);
            match (full, direct) {
                (Ok(x), Ok(y)) => prop_assert_eq!(x, y),
                (x, y) => prop_assert_eq!(x.is_err(), y.is_err()),
            }
        }

        #[test]
        fn dlog_additive(a in arb_poly(), b in arb_poly()) {
            prop_assume!(!a.is_exact_zero() && !b.is_exact_zero());
            let lhs = dlog(&a.mul_ref(&b), &CAPS).unwrap();
            let rhs = dlog(&a, &CAPS).unwrap().add(&dlog(&b, &CAPS).unwrap());
            prop_assert!(lhs.agrees_with(&rhs));
        }
    }

    #[test]
    fn parameter_change_fixed_example() {
        // u ← u(1+u+t), t ← t(1+u²)
        let phi = u() * (It::one() + u() + t());
        let psi = t() * (It::one() + u() * u());
        let jac = wedge(&d(&phi), &d(&psi)).coeff;
        for omega in [inv(&(u() * t())), inv(&(u() * t() * (u() - t()))), (u() + c(2)).mul_ref(&inv(&(u() * u() * t())))] {
            let moved = omega.substitute(&phi, &psi, &CAPS).unwrap().mul_ref(&jac);
            assert_eq!(res_total(&Form2::new(omega)).unwrap(), res_total(&Form2::new(moved)).unwrap());
        }
        assert_eq!(res_total(&Form2::new(inv(&(u() * t())))).unwrap(), fe(1));
    }
}
