//! Symbols on `K2` of one- and two-dimensional local fields.
//!
//! [`tame_1d`] works over any coefficient ring, so over `k((u))((t))` it is the
//! rank-one tame symbol with values in `k((u))`. [`tame_2d`] composes the
//! `t`-adic boundary with the tame symbol of `k((u))`. [`kato_pairing`] is the
//! residue homomorphism in the `u`-direction, valued in `k((t))`.

use std::fmt;

use num_traits::One;

use crate::coefficients::FieldElement;
use crate::scalar::Scalar;
use crate::series::{Coeff, Iterated, Laurent, Series, SeriesError};

/// Formal integer combination `Σ n·{α, β}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSum<T> {
    terms: Vec<(i64, T, T)>,
}

impl<T> Default for SymbolSum<T> {
    fn default() -> Self {
        SymbolSum { terms: Vec::new() }
    }
}

impl<T> SymbolSum<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, n: i64, a: T, b: T) {
        if n != 0 {
            self.terms.push((n, a, b));
        }
    }

    pub fn terms(&self) -> &[(i64, T, T)] {
        &self.terms
    }

    /// Evaluates a bimultiplicative map `φ` on the sum: `Π φ(α, β)^n`.
    pub fn evaluate<V, E>(
        &self,
        one: V,
        mut phi: impl FnMut(&T, &T) -> Result<V, E>,
        mut pow: impl FnMut(&V, i64) -> Result<V, E>,
        mul: impl Fn(&V, &V) -> V,
    ) -> Result<V, E> {
        let mut acc = one;
        for (n, a, b) in &self.terms {
            acc = mul(&acc, &pow(&phi(a, b)?, *n)?);
        }
        Ok(acc)
    }
}

impl<T: fmt::Display> fmt::Display for SymbolSum<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (n, a, b)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{n}{{{a}, {b}}}")?;
        }
        Ok(())
    }
}

fn coeff_pow<C: Coeff>(c: &C, n: i64, caps: &[i64]) -> Result<C, SeriesError> {
    let base = if n < 0 { c.inv_capped(caps)? } else { c.clone() };
    let mut acc = C::one();
    for _ in 0..n.unsigned_abs() {
        acc = acc.times(&base);
    }
    Ok(acc)
}

/// `(−1)^{v(α)v(β)} · red(α^{v(β)} β^{−v(α)})`.
///
/// As with [`Laurent::inv`], `caps[1..]` is handed to the coefficient ring.
pub fn tame_1d<C: Coeff>(alpha: &Laurent<C>, beta: &Laurent<C>, caps: &[i64]) -> Result<C, SeriesError> {
    let caps = caps.get(1..).unwrap_or(&[]);
    let (a, la) = alpha.leading()?;
    let (b, lb) = beta.leading()?;
    let val = coeff_pow(la, b, caps)?.times(&coeff_pow(lb, -a, caps)?);
    Ok(if (a * b) % 2 != 0 { val.negated() } else { val })
}

/// Three-argument tame symbol of `k((u))((t))` with values in the residue field.
pub fn tame_2d<S: Scalar>(
    alpha: &Iterated<S>,
    beta: &Iterated<S>,
    gamma: &Iterated<S>,
    caps: &[i64],
) -> Result<FieldElement<S>, SeriesError> {
    let boundary = t_boundary(alpha, beta, gamma)?;
    let inner_caps = caps.get(1..).unwrap_or(&[]);
    boundary.evaluate(
        FieldElement::one(),
        |x, y| tame_1d(x, y, inner_caps),
        |v, n| v.pow(-n).map_err(|_| SeriesError::NotAUnit),
        |x, y| x * y,
    )
}

/// Boundary of `{α, β, γ}` for the `t`-adic valuation, as a sum in `K2(k((u)))`.
pub fn t_boundary<S: Scalar>(
    alpha: &Iterated<S>,
    beta: &Iterated<S>,
    gamma: &Iterated<S>,
) -> Result<SymbolSum<Series<S>>, SeriesError> {
    let (a1, w1) = alpha.leading()?;
    let (a2, w2) = beta.leading()?;
    let (a3, w3) = gamma.leading()?;
    let (w1, w2, w3) = (w1.clone(), w2.clone(), w3.clone());
    let m1 = Series::constant(FieldElement::int(-1));
    let mut sum = SymbolSum::new();
    sum.push(a1, w2.clone(), w3.clone());
    sum.push(-a2, w1.clone(), w3.clone());
    sum.push(a3, w1.clone(), w2.clone());
    sum.push(a1 * a2, m1.clone(), w3);
    sum.push(-a1 * a3, m1.clone(), w2);
    sum.push(a2 * a3, m1.clone(), w1);
    sum.push(-a1 * a2 * a3, m1.clone(), m1);
    Ok(sum)
}

/// `exp` of the `u⁰`-slice of `log E`, for a principal unit `E`.
pub fn principal_project<S: Scalar>(e: &Iterated<S>, caps: &[i64]) -> Result<Series<S>, SeriesError> {
    let m = e.sub_ref(&Iterated::one());
    let log = m.log1p_principal(caps)?;
    exp_outer(&log.inner_coeff_series(0), caps)
}

fn exp_outer<S: Scalar>(x: &Series<S>, caps: &[i64]) -> Result<Series<S>, SeriesError> {
    let cap = caps.first().copied().unwrap_or(crate::series::DEFAULT_PRECISION);
    x.exp(cap)
}

/// Residue homomorphism in the `u`-direction, valued in `k((t))^*`.
///
/// With `α = t^{a₁}u^{b₁}c₁E₁`, `β = t^{a₂}u^{b₂}c₂E₂` and `Lᵢ = log Eᵢ`:
/// `(−1)^{b₁b₂} t^{a₂b₁−a₁b₂} c₂^{b₁} c₁^{−b₂} · exp(b₁[L₂]₀ − b₂[L₁]₀ − [L₁ ∂_u L₂]₋₁)`,
/// where `[·]_j` takes the `u^j`-coefficient series.
pub fn kato_pairing<S: Scalar>(
    alpha: &Iterated<S>,
    beta: &Iterated<S>,
    caps: &[i64],
) -> Result<Series<S>, SeriesError> {
    let d1 = alpha.decompose_unit()?;
    let d2 = beta.decompose_unit()?;
    let l1 = d1.principal.log1p_principal(caps)?;
    let l2 = d2.principal.log1p_principal(caps)?;
    let p1 = l1.inner_coeff_series(0);
    let p2 = l2.inner_coeff_series(0);
    let h = l1.mul_ref(&l2.d_inner()).inner_coeff_series(-1);
    let exponent = p2
        .scale(&FieldElement::int(d1.b))
        .sub_ref(&p1.scale(&FieldElement::int(d2.b)))
        .sub_ref(&h);
    let unit = exp_outer(&exponent, caps)?;

    let sign = if (d1.b * d2.b) % 2 != 0 { -1 } else { 1 };
    let c2 = d2.c.pow(d1.b).map_err(|_| SeriesError::NotAUnit)?;
    let c1 = d1.c.pow(-d2.b).map_err(|_| SeriesError::NotAUnit)?;
    let lead = &(&c2 * &c1) * &FieldElement::int(sign);
    Ok(Series::monomial(lead, d2.a * d1.b - d1.a * d2.b).mul_ref(&unit))
}

#[cfg(test)]
mod tests {
    use num_rational::BigRational;
    use num_traits::Zero;
    use proptest::prelude::*;

    use super::*;

    type Q = BigRational;
    type It = Iterated<Q>;
    type Ser = Series<Q>;
    const CAPS: [i64; 2] = [10, 10];

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
    fn poly(terms: &[(i64, i64, i64)]) -> It {
        terms.iter().fold(It::zero(), |acc, &(i, j, k)| acc + It::monomial(Ser::monomial(fe(k), j), i))
    }
    fn st() -> Ser {
        Ser::var()
    }

    #[test]
    fn tame_1d_examples() {
        assert_eq!(tame_1d(&st(), &st(), &CAPS).unwrap(), fe(-1));
        assert_eq!(tame_1d(&st(), &Ser::constant(fe(5)), &CAPS).unwrap(), FieldElement::scalar(Q::new(1.into(), 5.into())));
        assert_eq!(tame_1d(&st(), &Ser::from_ints(0, &[1, -1], None), &CAPS).unwrap(), fe(1));
    }

    #[test]
    fn tame_2d_examples() {
        assert_eq!(tame_2d(&t(), &u(), &c(7), &CAPS).unwrap(), fe(7));
        assert_eq!(tame_2d(&t(), &u(), &u(), &CAPS).unwrap(), fe(-1));
        let units = [c(2) + t(), c(3) + u(), c(-1) + u() * t()];
        assert_eq!(tame_2d(&units[0], &units[1], &units[2], &CAPS).unwrap(), fe(1));
        assert_eq!(tame_2d(&u(), &t(), &c(7), &CAPS).unwrap(), FieldElement::scalar(Q::new(1.into(), 7.into())));
    }

    #[test]
    fn principal_project_examples() {
        let one_minus_t = Ser::from_ints(0, &[1, -1], None);
        let e = It::one() - t();
        assert!(principal_project(&e, &CAPS).unwrap().agrees_with(&one_minus_t));
        let f = It::one() - t() * u().inv(&CAPS).unwrap();
        assert!(principal_project(&f, &CAPS).unwrap().agrees_with(&Ser::one()));
        assert!(principal_project(&e.mul_ref(&f), &CAPS).unwrap().agrees_with(&one_minus_t));
        assert!(principal_project(&u(), &CAPS).is_err());
    }

    #[test]
    fn kato_examples() {
        assert!(kato_pairing(&u(), &t(), &CAPS).unwrap().agrees_with(&st()));
        assert!(kato_pairing(&u(), &u(), &CAPS).unwrap().agrees_with(&Ser::constant(fe(-1))));
        assert!(kato_pairing(&u(), &(u() - t()), &CAPS).unwrap().agrees_with(&Ser::constant(fe(-1))));
        let a = c(1) + t() * poly(&[(0, -2, 1)]);
        let b = c(1) + t() * u();
        let k = kato_pairing(&a, &b, &CAPS).unwrap();
        assert!(k.prec().unwrap() >= 5);
    }

    fn arb_ser() -> impl Strategy<Value = Ser> {
        (-2i64..3, -3i64..4, prop::collection::vec(-2i64..3, 0..4)).prop_map(|(v, lead, rest)| {
            let lead = if lead == 0 { 1 } else { lead };
            let mut cs = vec![lead];
            cs.extend(rest);
            Ser::from_ints(v, &cs, None)
        })
    }

    /// `c·t^a u^b + (terms above it)`.
    fn arb_it() -> impl Strategy<Value = It> {
        (-1i64..2, -1i64..2, prop_oneof![Just(1i64), Just(-1), Just(2), Just(3)],
            prop::collection::vec((0i64..2, -1i64..3, -2i64..3), 0..3))
            .prop_map(|(a, b, lead, rest)| {
                let mut terms = vec![(a, b, lead)];
                for (di, j, k) in rest {
                    let (i, j) = if di == 0 { (a, b + 1 + j.abs()) } else { (a + di, j) };
                    terms.push((i, j, k));
                }
                poly(&terms)
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn tame_1d_laws(a in arb_ser(), a2 in arb_ser(), b in arb_ser()) {
            let lhs = tame_1d(&a.mul_ref(&a2), &b, &CAPS).unwrap();
            let rhs = &tame_1d(&a, &b, &CAPS).unwrap() * &tame_1d(&a2, &b, &CAPS).unwrap();
            prop_assert_eq!(lhs, rhs);
            let anti = &tame_1d(&a, &b, &CAPS).unwrap() * &tame_1d(&b, &a, &CAPS).unwrap();
            prop_assert_eq!(anti, fe(1));
            let one_minus = Ser::one().sub_ref(&a);
            if one_minus.leading().is_ok() {
                prop_assert_eq!(tame_1d(&a, &one_minus, &CAPS).unwrap(), fe(1));
            }
        }

        #[test]
        fn tame_2d_multiplicative(a in arb_it(), a2 in arb_it(), b in arb_it(), g in arb_it()) {
            let lhs = tame_2d(&a.mul_ref(&a2), &b, &g, &CAPS).unwrap();
            let rhs = &tame_2d(&a, &b, &g, &CAPS).unwrap() * &tame_2d(&a2, &b, &g, &CAPS).unwrap();
            prop_assert_eq!(lhs, rhs);
            let lhs = tame_2d(&b, &a.mul_ref(&a2), &g, &CAPS).unwrap();
            let rhs = &tame_2d(&b, &a, &g, &CAPS).unwrap() * &tame_2d(&b, &a2, &g, &CAPS).unwrap();
            prop_assert_eq!(lhs, rhs);
            let lhs = tame_2d(&b, &g, &a.mul_ref(&a2), &CAPS).unwrap();
            let rhs = &tame_2d(&b, &g, &a, &CAPS).unwrap() * &tame_2d(&b, &g, &a2, &CAPS).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn tame_2d_kills_principal_units(a in arb_it(), b in arb_it(), m in arb_it()) {
            let e = It::one() + m.mul_ref(&poly(&[(3, 3, 1)]));
            prop_assume!(e.sub_ref(&It::one()).lex_leading().is_ok_and(|(i, j, _)| i > 0 && j > 0));
            prop_assert_eq!(tame_2d(&a, &b, &e, &CAPS).unwrap(), fe(1));
        }

        #[test]
        fn kato_bimultiplicative(a in arb_it(), a2 in arb_it(), b in arb_it()) {
            let lhs = kato_pairing(&a.mul_ref(&a2), &b, &CAPS).unwrap();
            let rhs = kato_pairing(&a, &b, &CAPS).unwrap().mul_ref(&kato_pairing(&a2, &b, &CAPS).unwrap());
            prop_assert!(lhs.agrees_with(&rhs), "{} vs {}", lhs, rhs);
            let lhs = kato_pairing(&b, &a.mul_ref(&a2), &CAPS).unwrap();
            let rhs = kato_pairing(&b, &a, &CAPS).unwrap().mul_ref(&kato_pairing(&b, &a2, &CAPS).unwrap());
            prop_assert!(lhs.agrees_with(&rhs), "{} vs {}", lhs, rhs);
        }

        #[test]
        fn kato_antisymmetric(a in arb_it(), b in arb_it()) {
            let p = kato_pairing(&a, &b, &CAPS).unwrap().mul_ref(&kato_pairing(&b, &a, &CAPS).unwrap());
            prop_assert!(p.agrees_with(&Ser::one()), "{}", p);
        }

        #[test]
        fn kato_steinberg(a in arb_it()) {
            let b = It::one().sub_ref(&a);
            prop_assume!(b.decompose_unit().is_ok());
            let k = kato_pairing(&a, &b, &CAPS).unwrap();
            prop_assert!(k.agrees_with(&Ser::one()), "{}", k);
            prop_assert!(k.prec().is_none_or(|p| p >= 3));
        }

        #[test]
        fn kato_trivial_on_u_free(a in arb_ser(), b in arb_ser()) {
            let (x, y) = (It::from_outer(&a), It::from_outer(&b));
            let k = kato_pairing(&x, &y, &CAPS).unwrap();
            prop_assert!(k.agrees_with(&Ser::one()));
        }
    }
}
