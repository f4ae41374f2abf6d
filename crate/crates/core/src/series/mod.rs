//! One-variable Laurent series and iterated series `k((u))((t))` with explicit
//! precision tracking.
//!
//! [`Laurent`] is generic over its coefficient ring. Nesting it gives the
//! iterated field: the outer variable `t` carries coefficients that are Laurent
//! series in the inner variable `u`. Every operation propagates precision so
//! that a coefficient is either known exactly or reported as unknown.

mod iterated;
mod laurent;

use std::fmt::{Debug, Display};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::coefficients::FieldElement;
use crate::scalar::Scalar;

pub use iterated::{Iterated, UnitDecomposition};
pub use laurent::Laurent;


/// Relative precision used when an infinite expansion must be truncated.
pub const DEFAULT_PRECISION: i64 = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("not a unit at tracked precision")]
    NotAUnit,
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("invalid substitution: {0}")]
    InvalidSubstitution(String),
}

/// A coefficient ring for [`Laurent`].
pub trait Coeff: Clone + Debug + Display + PartialEq + Send + Sync + Zero + One {
    type Scalar: Scalar;

    fn from_elem(e: FieldElement<Self::Scalar>) -> Self;
    /// Exactly zero, with nothing unknown.
    fn is_exact_zero(&self) -> bool;
    /// Provably nonzero.
    fn is_known_nonzero(&self) -> bool;
    fn plus(&self, o: &Self) -> Self;
    fn negated(&self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn mul_int(&self, n: i64) -> Self;
    fn inv_capped(&self, caps: &[i64]) -> Result<Self, SeriesError>;
    /// Equality on all jointly known data.
    fn agrees(&self, o: &Self) -> bool;
}

/// Truncation policy: relative precision for the outer and inner variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Precision {
    pub outer: i64,
    pub inner: i64,
}

impl Precision {
    pub const fn uniform(n: i64) -> Self {
        Precision { outer: n, inner: n }
    }

    pub fn caps(&self) -> [i64; 2] {
        [self.outer, self.inner]
    }

    pub fn doubled(&self) -> Self {
        Precision { outer: 2 * self.outer, inner: 2 * self.inner }
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision::uniform(DEFAULT_PRECISION)
    }
}

/// Series in one variable over the residue field.
pub type Series<S> = Laurent<FieldElement<S>>;

impl<S: Scalar> Laurent<FieldElement<S>> {
    pub fn from_ints(lowest: i64, coeffs: &[i64], prec: Option<i64>) -> Self {
        Self::new(
            coeffs.iter().enumerate().map(|(i, &c)| (lowest + i as i64, FieldElement::int(c))),
            prec,
        )
    }

    /// `log(1 + x)` for `x` of positive valuation, truncated at absolute exponent `cap`
    /// when `x` is exact.
    pub fn log1p(&self, cap: i64) -> Result<Self, SeriesError> {
        let v = match self.valuation_bound() {
            None => return Ok(Self::zero()),
            Some(v) => v,
        };
        if v < 1 {
            return Err(SeriesError::NotAUnit);
        }
        let target = self.prec().map_or(cap, |p| p.min(cap));
        let x = self.truncate(target);
        let mut acc = Self::big_o(target);
        let mut power = x.clone();
        let mut n = 1i64;
        while power.valuation_bound().is_some_and(|w| w < target) {
            let c = S::from_int(if n % 2 == 1 { 1 } else { -1 }) / S::from_int(n);
            acc = acc.add_ref(&power.scale(&FieldElement::scalar(c)));
            power = power.mul_ref(&x);
            n += 1;
        }
        Ok(acc)
    }

    /// `exp(x)` for `x` of positive valuation.
    pub fn exp(&self, cap: i64) -> Result<Self, SeriesError> {
        let v = match self.valuation_bound() {
            None => return Ok(Self::one()),
            Some(v) => v,
        };
        if v < 1 {
            return Err(SeriesError::NotAUnit);
        }
        let target = self.prec().map_or(cap, |p| p.min(cap));
        let x = self.truncate(target);
        let mut acc = Self::one().truncate(target);
        let mut term = Self::one();
        let mut n = 1i64;
        loop {
            term = term.mul_ref(&x).scale(&FieldElement::scalar(S::one() / S::from_int(n)));
            if !term.valuation_bound().is_some_and(|w| w < target) {
                break;
            }
            acc = acc.add_ref(&term);
            n += 1;
        }
        Ok(acc)
    }
}
