use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::{Coeff, SeriesError};
use crate::coefficients::FieldElement;
use crate::scalar::Scalar;

/// A Laurent series `Σ c_n x^n` known exactly below `prec`.
///
/// `prec == None` means the series is an exact Laurent polynomial. Stored terms
/// are never exactly zero and every stored exponent lies below `prec`. When the
/// coefficient ring is itself a series ring, a stored term may be "zero up to
/// its own precision"; such a term carries information and is kept.
#[derive(Clone, Debug, PartialEq)]
pub struct Laurent<C> {
    terms: BTreeMap<i64, C>,
    prec: Option<i64>,
}

impl<C: Coeff> Laurent<C> {
    pub fn new(terms: impl IntoIterator<Item = (i64, C)>, prec: Option<i64>) -> Self {
        let mut out: Laurent<C> = Laurent { terms: BTreeMap::new(), prec };
        for (k, c) in terms {
            if prec.is_some_and(|p| k >= p) || c.is_exact_zero() {
                continue;
            }
            match out.terms.remove(&k) {
                Some(old) => {
                    let s = old.plus(&c);
                    if !s.is_exact_zero() {
                        out.terms.insert(k, s);
                    }
                }
                None => {
                    out.terms.insert(k, c);
                }
            }
        }
        out
    }

    pub fn exact(terms: impl IntoIterator<Item = (i64, C)>) -> Self {
        Self::new(terms, None)
    }

    pub fn monomial(c: C, k: i64) -> Self {
        Self::exact([(k, c)])
    }

    pub fn constant(c: C) -> Self {
        Self::monomial(c, 0)
    }

    /// The variable itself.
    pub fn var() -> Self {
        Self::monomial(<C as One>::one(), 1)
    }

    /// `O(x^p)`: nothing known except that all coefficients below `p` vanish.
    pub fn big_o(p: i64) -> Self {
        Laurent { terms: BTreeMap::new(), prec: Some(p) }
    }

    pub fn prec(&self) -> Option<i64> {
        self.prec
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &C)> {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    pub fn is_exact(&self) -> bool {
        self.prec.is_none()
    }

    /// Lower bound for the valuation: lowest stored exponent, else the precision.
    /// `None` for the exact zero series.
    pub fn valuation_bound(&self) -> Option<i64> {
        self.terms.keys().next().copied().or(self.prec)
    }

    /// Lowest term, required to be provably nonzero.
    pub fn leading(&self) -> Result<(i64, &C), SeriesError> {
        match self.terms.iter().next() {
            Some((k, c)) if c.is_known_nonzero() => Ok((*k, c)),
            _ => Err(SeriesError::InsufficientPrecision(
                "leading coefficient not determinable".into(),
            )),
        }
    }

    pub fn valuation(&self) -> Result<i64, SeriesError> {
        self.leading().map(|(k, _)| k)
    }

    /// Coefficient of `x^k`; refuses exponents at or beyond the precision.
    pub fn coeff(&self, k: i64) -> Result<C, SeriesError> {
        if self.prec.is_some_and(|p| k >= p) {
            return Err(SeriesError::InsufficientPrecision(format!(
                "coefficient of exponent {k} requested, known below {}",
                self.prec.unwrap()
            )));
        }
        Ok(self.terms.get(&k).cloned().unwrap_or_else(<C as Zero>::zero))
    }

    pub fn truncate(&self, p: i64) -> Self {
        let prec = Some(self.prec.map_or(p, |q| q.min(p)));
        Self::new(self.terms.iter().map(|(k, c)| (*k, c.clone())), prec)
    }

    pub fn shift(&self, k: i64) -> Self {
        Laurent {
            terms: self.terms.iter().map(|(e, c)| (e + k, c.clone())).collect(),
            prec: self.prec.map(|p| p + k),
        }
    }

    pub fn map_coeffs(&self, f: impl Fn(&C) -> C) -> Self {
        Self::new(self.terms.iter().map(|(k, c)| (*k, f(c))), self.prec)
    }

    pub fn scale(&self, c: &C) -> Self {
        self.map_coeffs(|x| x.times(c))
    }

    /// Derivative with respect to the series variable.
    pub fn derivative(&self) -> Self {
        Self::new(
            self.terms.iter().map(|(k, c)| (k - 1, c.mul_int(*k))),
            self.prec.map(|p| p - 1),
        )
    }

    pub fn add_ref(&self, other: &Self) -> Self {
        let prec = min_prec(self.prec, other.prec);
        let mut terms: BTreeMap<i64, C> = BTreeMap::new();
        for (k, c) in self.terms.iter().chain(other.terms.iter()) {
            if prec.is_some_and(|p| *k >= p) {
                continue;
            }
            let v = match terms.remove(k) {
                Some(old) => old.plus(c),
                None => c.clone(),
            };
            terms.insert(*k, v);
        }
        terms.retain(|_, c| !c.is_exact_zero());
        Laurent { terms, prec }
    }

    pub fn neg_ref(&self) -> Self {
        Laurent { terms: self.terms.iter().map(|(k, c)| (*k, c.negated())).collect(), prec: self.prec }
    }

    pub fn sub_ref(&self, other: &Self) -> Self {
        self.add_ref(&other.neg_ref())
    }

    pub fn mul_ref(&self, other: &Self) -> Self {
        let (Some(va), Some(vb)) = (self.valuation_bound(), other.valuation_bound()) else {
            return Self::zero();
        };
        let prec = min_prec(self.prec.map(|p| p + vb), other.prec.map(|p| p + va));
        let mut terms: BTreeMap<i64, C> = BTreeMap::new();
        for (i, a) in &self.terms {
            for (j, b) in &other.terms {
                let k = i + j;
                if prec.is_some_and(|p| k >= p) {
                    break;
                }
                let prod = a.times(b);
                let v = match terms.remove(&k) {
                    Some(old) => old.plus(&prod),
                    None => prod,
                };
                terms.insert(k, v);
            }
        }
        terms.retain(|_, c| !c.is_exact_zero());
        Laurent { terms, prec }
    }

    /// Coefficient of exponent `k` in `self · other`, without forming the product.
    pub fn product_coeff(&self, other: &Self, k: i64) -> Result<C, SeriesError> {
        let (Some(va), Some(vb)) = (self.valuation_bound(), other.valuation_bound()) else {
            return Ok(<C as Zero>::zero());
        };
        if let Some(p) = min_prec(self.prec.map(|p| p + vb), other.prec.map(|p| p + va)) {
            if k >= p {
                return Err(SeriesError::InsufficientPrecision(format!(
                    "product coefficient of exponent {k} requested, known below {p}"
                )));
            }
        }
        let mut acc = <C as Zero>::zero();
        for (i, a) in &self.terms {
            if let Some(b) = other.terms.get(&(k - i)) {
                acc = acc.plus(&a.times(b));
            }
        }
        Ok(acc)
    }

    /// Multiplicative inverse.
    ///
    /// `caps[0]` bounds the relative precision of the result at this level; the
    /// remaining entries are handed to the coefficient ring. Exact monomials
    /// invert exactly.
    pub fn inv(&self, caps: &[i64]) -> Result<Self, SeriesError> {
        let (a, c) = self.leading().map_err(|_| SeriesError::NotAUnit)?;
        let c_inv = c.inv_capped(caps.get(1..).unwrap_or(&[]))?;
        if self.terms.len() == 1 && self.prec.is_none() {
            return Ok(Self::monomial(c_inv, -a));
        }
        let cap = caps.first().copied().unwrap_or(super::DEFAULT_PRECISION);
        let rel = self.prec.map_or(cap, |p| (p - a).min(cap));
        let neg_c_inv = c_inv.negated();
        let mut b: Vec<C> = Vec::with_capacity(rel.max(0) as usize);
        b.push(c_inv);
        for k in 1..rel {
            let mut acc = <C as Zero>::zero();
            for j in 1..=k {
                if let Some(s) = self.terms.get(&(a + j)) {
                    let bk = &b[(k - j) as usize];
                    if !bk.is_exact_zero() {
                        acc = acc.plus(&s.times(bk));
                    }
                }
            }
            b.push(neg_c_inv.times(&acc));
        }
        Ok(Self::new(b.into_iter().enumerate().map(|(k, c)| (k as i64 - a, c)), Some(rel - a)))
    }

    pub fn div_ref(&self, other: &Self, caps: &[i64]) -> Result<Self, SeriesError> {
        Ok(self.mul_ref(&other.inv(caps)?))
    }

    pub fn pow(&self, n: i64, caps: &[i64]) -> Result<Self, SeriesError> {
        let base = if n < 0 { self.inv(caps)? } else { self.clone() };
        let mut acc = Self::one();
        let mut sq = base;
        let mut e = n.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_ref(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul_ref(&sq);
            }
        }
        Ok(acc)
    }

    /// Equality on every coefficient known in both operands.
    pub fn agrees_with(&self, other: &Self) -> bool {
        let window = min_prec(self.prec, other.prec);
        let keys: std::collections::BTreeSet<i64> =
            self.terms.keys().chain(other.terms.keys()).copied().collect();
        keys.into_iter()
            .filter(|k| window.is_none_or(|p| *k < p))
            .all(|k| {
                let zero = <C as Zero>::zero();
                let a = self.terms.get(&k).unwrap_or(&zero);
                let b = other.terms.get(&k).unwrap_or(&zero);
                a.agrees(b)
            })
    }

    /// True if every known coefficient vanishes.
    pub fn is_zero_within(&self) -> bool {
        self.terms.values().all(|c| c.agrees(&<C as Zero>::zero()))
    }
}

pub(crate) fn min_prec(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl<C: Coeff> Zero for Laurent<C> {
    fn zero() -> Self {
        Laurent { terms: BTreeMap::new(), prec: None }
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.prec.is_none()
    }
}

impl<C: Coeff> One for Laurent<C> {
    fn one() -> Self {
        Self::constant(<C as One>::one())
    }
}

impl<C: Coeff> Coeff for Laurent<C> {
    type Scalar = C::Scalar;

    fn from_elem(e: FieldElement<Self::Scalar>) -> Self {
        Self::constant(C::from_elem(e))
    }
    fn is_exact_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_known_nonzero(&self) -> bool {
        self.terms.values().any(|c| c.is_known_nonzero())
    }
    fn plus(&self, o: &Self) -> Self {
        self.add_ref(o)
    }
    fn negated(&self) -> Self {
        self.neg_ref()
    }
    fn times(&self, o: &Self) -> Self {
        self.mul_ref(o)
    }
    fn mul_int(&self, n: i64) -> Self {
        if n == 0 {
            return Self::new([], self.prec);
        }
        self.map_coeffs(|c| c.mul_int(n))
    }
    fn inv_capped(&self, caps: &[i64]) -> Result<Self, SeriesError> {
        self.inv(caps)
    }
    fn agrees(&self, o: &Self) -> bool {
        self.agrees_with(o)
    }
}

impl<S: Scalar> Coeff for FieldElement<S> {
    type Scalar = S;

    fn from_elem(e: FieldElement<S>) -> Self {
        e
    }
    fn is_exact_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_known_nonzero(&self) -> bool {
        !Zero::is_zero(self)
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn negated(&self) -> Self {
        -self
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn mul_int(&self, n: i64) -> Self {
        self.scale(&S::from_int(n))
    }
    fn inv_capped(&self, _caps: &[i64]) -> Result<Self, SeriesError> {
        self.inv().map_err(|_| SeriesError::NotAUnit)
    }
    fn agrees(&self, o: &Self) -> bool {
        self == o
    }
}

macro_rules! laurent_ops {
    ($tr:ident, $m:ident, $imp:ident) => {
        impl<'a, C: Coeff> $tr<&'a Laurent<C>> for &'a Laurent<C> {
            type Output = Laurent<C>;
            fn $m(self, rhs: &Laurent<C>) -> Laurent<C> {
                self.$imp(rhs)
            }
        }
        impl<C: Coeff> $tr for Laurent<C> {
            type Output = Laurent<C>;
            fn $m(self, rhs: Laurent<C>) -> Laurent<C> {
                self.$imp(&rhs)
            }
        }
    };
}
laurent_ops!(Add, add, add_ref);
laurent_ops!(Sub, sub, sub_ref);
laurent_ops!(Mul, mul, mul_ref);

impl<C: Coeff> Neg for &Laurent<C> {
    type Output = Laurent<C>;
    fn neg(self) -> Laurent<C> {
        self.neg_ref()
    }
}

impl<C: Coeff> Neg for Laurent<C> {
    type Output = Laurent<C>;
    fn neg(self) -> Laurent<C> {
        self.neg_ref()
    }
}

/// Machine-readable rendering: `[e:c, e:c | O(p)]`, or `| exact` for polynomials.
impl<C: Coeff> fmt::Display for Laurent<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.terms.iter().map(|(k, c)| format!("{k}:{c}")).collect();
        write!(f, "[{}", parts.join(", "))?;
        match self.prec {
            Some(p) => write!(f, " | O({p})]"),
            None => write!(f, " | exact]"),
        }
    }
}
