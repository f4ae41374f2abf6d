//! Exact scalar types usable as the prime field of every construction.

use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{NumOps, One, ToPrimitive, Zero};

/// An exact field of characteristic zero.
///
/// Zero tests must be exact: every residue and reciprocity check in this crate
/// compares coefficients with `==`, so floating point types are deliberately
/// not implementors.
pub trait Scalar:
    Clone + PartialEq + Debug + Display + Zero + One + NumOps + Neg<Output = Self> + Send + Sync + 'static
{
    fn from_int(n: i64) -> Self;

    /// Conversion from an arbitrary-precision rational; `None` if not representable.
    fn from_ratio(r: &BigRational) -> Option<Self>;

    fn to_ratio(&self) -> BigRational;

    fn pow_i(&self, n: i64) -> Self {
        let mut acc = Self::one();
        let base = if n < 0 { Self::one() / self.clone() } else { self.clone() };
        for _ in 0..n.unsigned_abs() {
            acc = acc * base.clone();
        }
        acc
    }
}

impl Scalar for BigRational {
    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn from_ratio(r: &BigRational) -> Option<Self> {
        Some(r.clone())
    }

    fn to_ratio(&self) -> BigRational {
        self.clone()
    }
}

/// Fixed-width rationals. Overflow panics; intended for small fixtures only.
impl Scalar for Rational64 {
    fn from_int(n: i64) -> Self {
        Rational64::from_integer(n)
    }

    fn from_ratio(r: &BigRational) -> Option<Self> {
        let n = r.numer().to_i64()?;
        let d = r.denom().to_i64()?;
        Some(Rational64::new(n, d))
    }

    fn to_ratio(&self) -> BigRational {
        BigRational::new(BigInt::from(*self.numer()), BigInt::from(*self.denom()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions() {
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(Rational64::from_ratio(&half), Some(Rational64::new(1, 2)));
        assert_eq!(Rational64::new(3, 4).to_ratio(), BigRational::new(3.into(), 4.into()));
        assert_eq!(BigRational::from_int(2).pow_i(-3), BigRational::new(1.into(), 8.into()));
    }
}
