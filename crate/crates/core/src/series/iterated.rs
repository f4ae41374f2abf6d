use std::fmt;

use num_traits::{One, Zero};

use super::{Coeff, Laurent, SeriesError, Series};
use crate::coefficients::FieldElement;
use crate::scalar::Scalar;

/// Element of `k((u))((t))`: outer variable `t`, coefficients in `k((u))`.
pub type Iterated<S> = Laurent<Series<S>>;

/// `s = t^a · u^b · c · (1 + m)` with `m` of positive lexicographic valuation.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitDecomposition<S: Scalar> {
    pub a: i64,
    pub b: i64,
    pub c: FieldElement<S>,
    pub principal: Iterated<S>,
}

impl<S: Scalar> UnitDecomposition<S> {
    pub fn rebuild(&self) -> Iterated<S> {
        let mono = Iterated::monomial(Series::monomial(self.c.clone(), self.b), self.a);
        mono.mul_ref(&self.principal.add_ref(&Iterated::one()))
    }
}

impl<S: Scalar> fmt::Display for UnitDecomposition<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t^{} u^{} ({}) (1 + {})", self.a, self.b, self.c, self.principal)
    }
}

impl<S: Scalar> Laurent<Series<S>> {
    /// The inner variable `u` as an element of the iterated field.
    pub fn inner_var() -> Self {
        Self::constant(Series::var())
    }

    /// The outer variable `t`.
    pub fn outer_var() -> Self {
        Self::monomial(Series::one(), 1)
    }

    pub fn from_elem_const(c: FieldElement<S>) -> Self {
        Self::constant(Series::constant(c))
    }

    /// Embeds a series in the outer variable (no `u`-dependence).
    pub fn from_outer(s: &Series<S>) -> Self {
        Self::new(s.terms().map(|(k, c)| (k, Series::constant(c.clone()))), s.prec())
    }

    /// Lexicographically leading monomial `(t-exponent, u-exponent, coefficient)`.
    pub fn lex_leading(&self) -> Result<(i64, i64, FieldElement<S>), SeriesError> {
        let (a, slice) = self.leading()?;
        let (b, c) = slice.leading()?;
        Ok((a, b, c.clone()))
    }

    /// Coefficient of `u^j t^i`.
    pub fn extract_coeff(&self, i: i64, j: i64) -> Result<FieldElement<S>, SeriesError> {
        self.coeff(i)?.coeff(j)
    }

    /// Partial derivative in the inner variable.
    pub fn d_inner(&self) -> Self {
        self.map_coeffs(|c| c.derivative())
    }

    /// Partial derivative in the outer variable.
    pub fn d_outer(&self) -> Self {
        self.derivative()
    }

    /// The series in `t` formed by the `u^j`-coefficients of all slices.
    ///
    /// The result's precision stops at the first slice whose `u^j` coefficient
    /// is unknown.
    pub fn inner_coeff_series(&self, j: i64) -> Series<S> {
        let mut window = self.prec();
        let mut terms = Vec::new();
        for (k, slice) in self.terms() {
            if window.is_some_and(|p| k >= p) {
                break;
            }
            match slice.coeff(j) {
                Ok(c) => terms.push((k, c)),
                Err(_) => {
                    window = Some(k);
                    break;
                }
            }
        }
        Series::new(terms, window)
    }

    /// Canonical decomposition under the rank-2 valuation.
    pub fn decompose_unit(&self) -> Result<UnitDecomposition<S>, SeriesError> {
        let (a, b, c) = self.lex_leading()?;
        let c_inv = c.inv().map_err(|_| SeriesError::NotAUnit)?;
        let normalized = self.shift(-a).map_coeffs(|slice| slice.shift(-b).scale(&c_inv));
        let principal = normalized.sub_ref(&Self::one());
        Ok(UnitDecomposition { a, b, c, principal })
    }

    /// Substitutes `u ← φ`, `t ← ψ`.
    ///
    /// Admissible changes keep the flag of curves `{u = 0}`, `{t = 0}`: `φ/u` and
    /// `ψ/t` must be units of `k[[u, t]]`.
    pub fn substitute(&self, phi: &Self, psi: &Self, caps: &[i64]) -> Result<Self, SeriesError> {
        check_parameter(phi, (0, 1), "u")?;
        check_parameter(psi, (1, 0), "t")?;
        let Some(low) = self.valuation_bound() else {
            return Ok(Self::zero());
        };
        let cap = caps.first().copied().unwrap_or(super::DEFAULT_PRECISION);
        let t_prec = self.prec().unwrap_or(low + cap);

        let mut phi_pows: std::collections::HashMap<i64, Self> = std::collections::HashMap::new();
        let mut result = Self::big_o(t_prec);
        let psi_low = psi.pow(low, caps)?;
        let mut psi_pow = psi_low;
        for i in low..t_prec {
            let slice = match self.coeff(i) {
                Ok(s) => s,
                Err(_) => break,
            };
            if !slice.is_exact_zero() {
                let mut inner = Self::zero();
                for (j, c) in slice.terms() {
                    if !phi_pows.contains_key(&j) {
                        phi_pows.insert(j, phi.pow(j, caps)?);
                    }
                    inner = inner.add_ref(&phi_pows[&j].map_coeffs(|x| x.scale(c)));
                }
                if let Some(p) = slice.prec() {
                    // O(u^p) maps to O(φ^p): every t-slice is known only below u^p.
                    let width = t_prec - i;
                    let err = Self::new((0..width).map(|k| (k, Series::big_o(p))), Some(width));
                    inner = inner.add_ref(&err);
                }
                result = result.add_ref(&inner.mul_ref(&psi_pow));
            }
            psi_pow = psi_pow.mul_ref(psi);
        }
        Ok(result)
    }

    /// `log(1 + m)` for `m` of positive lexicographic valuation.
    pub fn log1p_principal(&self, caps: &[i64]) -> Result<Self, SeriesError> {
        if self.is_exact_zero() {
            return Ok(Self::zero());
        }
        let low = self.valuation_bound().unwrap_or(0);
        let slice0 = self.coeff(0).unwrap_or_else(|_| Series::big_o(0));
        if low < 0 || slice0.valuation_bound().is_some_and(|v| v < 1) {
            return Err(SeriesError::NotAUnit);
        }
        let cap_t = caps.first().copied().unwrap_or(super::DEFAULT_PRECISION);
        let cap_u = caps.get(1).copied().unwrap_or(super::DEFAULT_PRECISION);
        let t_prec = self.prec().map_or(cap_t, |p| p.min(cap_t));

        // log(1 + m) = log(1 + m₀) + log(1 + m'), m' = (m − m₀)/(1 + m₀) has t-valuation ≥ 1.
        let m0 = Self::constant(slice0.clone());
        let head = Self::constant(slice0.log1p(cap_u)?);
        // Drop the q⁰ slice outright: subtracting leaves an O(u^k) there that
        // would keep every power at t-valuation 0.
        let rest = Self::new(self.terms().filter(|(k, _)| *k >= 1).map(|(k, s)| (k, s.clone())), self.prec())
            .truncate(t_prec);
        let one_plus_m0 = m0.add_ref(&Self::one());
        let m1 = rest.mul_ref(&one_plus_m0.inv(caps)?);
        let mut acc = head.add_ref(&Self::big_o(t_prec));
        let mut power = m1.clone();
        let mut n = 1i64;
        while power.valuation_bound().is_some_and(|w| w < t_prec) {
            let sign = if n % 2 == 1 { 1 } else { -1 };
            let c = FieldElement::scalar(S::from_int(sign) / S::from_int(n));
            acc = acc.add_ref(&power.map_coeffs(|s| s.scale(&c)));
            power = power.mul_ref(&m1);
            n += 1;
        }
        Ok(acc)
    }
}

fn check_parameter<S: Scalar>(
    p: &Iterated<S>,
    expected: (i64, i64),
    name: &str,
) -> Result<(), SeriesError> {
    let (a, b, _) = p.lex_leading()?;
    if (a, b) != expected {
        return Err(SeriesError::InvalidSubstitution(format!(
            "{name} must be replaced by an element of valuation {expected:?}, got ({a}, {b})"
        )));
    }
    // p / (t^a u^b) must lie in k[[u, t]] with nonzero constant term.
    let bad = p.terms().any(|(k, slice)| {
        k < a || slice.valuation_bound().is_some_and(|v| v < b)
    });
    if bad {
        return Err(SeriesError::InvalidSubstitution(format!(
            "replacement for {name} is not ({name})·(unit of k[[u, t]])"
        )));
    }
    Ok(())
}
