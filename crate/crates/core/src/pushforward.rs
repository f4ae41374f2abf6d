//! Local pushforwards along `f: X → S` for a pair `x ∈ C`, and their sums.
//!
//! Inputs are already expanded in the branch field `K_{x,C}`: for a horizontal
//! branch the outer parameter is the local equation `t_C` of `C` and the inner
//! one is a uniformizer `π` of `k(C)_x`; for the fiber the outer parameter is
//! `t_s` and the inner one is `u`.

use num_traits::One;
use thiserror::Error;

use crate::forms::{res_inner, res_outer, Form1, Form2};
use crate::localext::{LocalExtError, LocalExtension};
use crate::scalar::Scalar;
use crate::series::{Iterated, Series, SeriesError};
use crate::symbols::{kato_pairing, tame_1d};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PushforwardError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Extension(#[from] LocalExtError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum BranchKind<S: Scalar> {
    /// `C ≠ f^{−1}(s)`; `k(C)_x/K_s` given by its embedding `t_s ↦ T(π, 0)`.
    Horizontal(LocalExtension<S>),
    /// `C = f^{−1}(s)`; the unramified `k(x)((t_s))/K_s`.
    Fiber(LocalExtension<S>),
}

impl<S: Scalar> BranchKind<S> {
    pub fn extension(&self) -> &LocalExtension<S> {
        match self {
            BranchKind::Horizontal(l) | BranchKind::Fiber(l) => l,
        }
    }

    pub fn is_fiber(&self) -> bool {
        matches!(self, BranchKind::Fiber(_))
    }
}

fn cap_of(caps: &[i64]) -> i64 {
    caps.first().copied().unwrap_or(crate::series::DEFAULT_PRECISION)
}

/// `f_*^{x,C}(ω)` as a 1-form `g(t_s) dt_s`.
pub fn relres<S: Scalar>(
    omega: &Form2<S>,
    kind: &BranchKind<S>,
    caps: &[i64],
) -> Result<Form1<S>, PushforwardError> {
    let cap = cap_of(caps);
    match kind {
        BranchKind::Horizontal(ext) => {
            // g(π)dπ = g/(dt_s/dπ) · dt_s
            let eta = res_outer(omega)?;
            let demb = ext.embedding().derivative();
            let h = eta.coeff.div_ref(&demb, caps)?;
            Ok(Form1::new(ext.trace(&h, cap)?))
        }
        BranchKind::Fiber(ext) => {
            let eta = res_inner(omega)?;
            Ok(Form1::new(ext.trace(&eta.coeff, cap)?))
        }
    }
}

/// `f_*(α, β)_{x,C}`: the norm of the tame symbol along `C`, or of the fiber pairing.
pub fn pushsym<S: Scalar>(
    alpha: &Iterated<S>,
    beta: &Iterated<S>,
    kind: &BranchKind<S>,
    caps: &[i64],
) -> Result<Series<S>, PushforwardError> {
    let cap = cap_of(caps);
    match kind {
        BranchKind::Horizontal(ext) => {
            let sym = tame_1d(alpha, beta, caps)?;
            Ok(ext.norm(&sym, cap)?)
        }
        BranchKind::Fiber(ext) => Ok(ext.norm(&kato_pairing(alpha, beta, caps)?, cap)?),
    }
}

/// `Σ f_*^{x,C}` over the listed contributions.
pub fn summed_forms<'a, S: Scalar>(contributions: impl IntoIterator<Item = &'a Form1<S>>) -> Form1<S> {
    contributions.into_iter().fold(Form1::zero(), |acc, f| acc.add(f))
}

/// `Π f_*(α, β)_{x,C}` over the listed contributions.
pub fn summed_symbols<'a, S: Scalar>(contributions: impl IntoIterator<Item = &'a Series<S>>) -> Series<S> {
    contributions.into_iter().fold(Series::one(), |acc, v| acc.mul_ref(v))
}

/// Whether a summed differential vanishes, and the window it was checked on.
pub fn vanishes<S: Scalar>(total: &Form1<S>) -> (bool, Option<i64>) {
    (total.coeff.is_zero_within(), total.coeff.prec())
}

/// Whether a summed symbol is `1`.
pub fn is_trivial<S: Scalar>(total: &Series<S>) -> (bool, Option<i64>) {
    (total.sub_ref(&Series::one()).is_zero_within(), total.prec())
}

#[cfg(test)]
mod tests {
    use num_rational::BigRational;
    use num_traits::Zero;

    use super::*;
    use crate::coefficients::{FieldElement, ResidueExtension};

    type Q = BigRational;
    type It = Iterated<Q>;
    type Ser = Series<Q>;
    const CAPS: [i64; 2] = [10, 10];

    fn fe(n: i64) -> FieldElement<Q> {
        FieldElement::int(n)
    }
    /// Inner parameter of the branch field.
    fn p() -> It {
        It::inner_var()
    }
    /// Outer parameter of the branch field.
    fn q() -> It {
        It::outer_var()
    }
    fn inv(x: &It) -> It {
        x.inv(&CAPS).unwrap()
    }
    fn fiber() -> BranchKind<Q> {
        BranchKind::Fiber(LocalExtension::unramified(None))
    }
    fn horizontal() -> BranchKind<Q> {
        BranchKind::Horizontal(LocalExtension::unramified(None))
    }

    #[test]
    fn relres_examples() {
        // dz/z ∧ dt/t at z = 0; fiber coordinates (u, t) = (p, q)
        let omega = Form2::new(inv(&(p() * q())));
        let r = relres(&omega, &fiber(), &CAPS).unwrap();
        assert!(r.coeff.agrees_with(&Ser::monomial(fe(1), -1)));
        // along C = {z = 0}: (u, t) = (q, p), Jacobian −1
        let omega = Form2::new(inv(&(q() * p())).neg_ref());
        let r = relres(&omega, &horizontal(), &CAPS).unwrap();
        assert!(r.coeff.agrees_with(&Ser::monomial(fe(-1), -1)));
        // dz/(z(z − t)) ∧ dt
        let omega = Form2::new(inv(&(p() * (p() - q()))));
        assert!(relres(&omega, &fiber(), &CAPS).unwrap().coeff.is_zero_within());
    }

    #[test]
    fn relres_traces_over_residue_extension() {
        // z = θ + p with θ² = 2: dz/(z² − 2) ∧ dt/t has residue 1/(2θ) in z
        let ext = ResidueExtension::new(vec![Q::from_integer((-2).into()), Q::zero(), Q::from_integer(1.into())], "θ").unwrap();
        let theta = It::from_elem_const(ext.generator());
        let z = theta.add_ref(&p());
        let two = It::from_elem_const(fe(2));
        let omega = Form2::new(inv(&(z.mul_ref(&z).sub_ref(&two).mul_ref(&q()))));
        let kind = BranchKind::Fiber(LocalExtension::unramified(Some(ext.clone())));
        let r = relres(&omega, &kind, &CAPS).unwrap();
        assert!(r.coeff.is_zero_within());
        let raw = res_inner(&omega).unwrap().coeff;
        let quarter_theta = ext.generator().scale(&Q::new(1.into(), 4.into()));
        assert!(raw.agrees_with(&Ser::monomial(quarter_theta, -1)));
    }

    #[test]
    fn relres_ramified_branch() {
        // C = {t = u²}, π = u: (u, t) = (p, p² + q), Jacobian 1
        let ext = LocalExtension::new(None, 2, Ser::monomial(fe(1), 2)).unwrap();
        let kind = BranchKind::Horizontal(ext);
        let t_raw = p().mul_ref(&p()).add_ref(&q());
        // u du∧dt/(t − u²): η = π dπ = ½ dt_s, trace over a degree-2 extension
        let omega = Form2::new(p().mul_ref(&inv(&q())));
        let r = relres(&omega, &kind, &CAPS).unwrap();
        assert!(r.coeff.agrees_with(&Ser::one()));
        // du∧dt/(u t) has no pole along C
        let omega = Form2::new(inv(&p().mul_ref(&t_raw)));
        assert!(relres(&omega, &kind, &CAPS).unwrap().coeff.is_zero_within());
    }

    #[test]
    fn pushsym_examples() {
        let u_fiber = p();
        let t_fiber = q();
        let v = pushsym(&u_fiber, &t_fiber, &fiber(), &CAPS).unwrap();
        assert!(v.agrees_with(&Ser::var()));
        // along {u = 0}: u = q, t = p
        let v = pushsym(&q(), &p(), &horizontal(), &CAPS).unwrap();
        assert!(v.agrees_with(&Ser::monomial(fe(1), -1)));
        // along {u = t}: u = p + q, t = p
        let v = pushsym(&(p() + q()), &p(), &horizontal(), &CAPS).unwrap();
        assert!(v.agrees_with(&Ser::one()));
    }

    #[test]
    fn summed_examples() {
        let a = Form1::new(Ser::monomial(fe(1), -1));
        let b = Form1::new(Ser::monomial(fe(-1), -1));
        assert!(vanishes(&summed_forms([&a, &b])).0);
        let vals = [Ser::monomial(fe(1), -1), Ser::one(), Ser::var()];
        assert!(is_trivial(&summed_symbols(&vals)).0);
        assert!(vanishes(&summed_forms(std::iter::empty::<&Form1<Q>>())).0);
        assert!(summed_symbols(std::iter::empty::<&Ser>()).agrees_with(&Ser::one()));
    }
}
