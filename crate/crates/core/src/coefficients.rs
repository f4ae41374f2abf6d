//! Base-field scalars and finite residue-field extensions `k(x)/k(s)`.
//!
//! A [`ResidueExtension`] is a quotient `k[X]/(m(X))` by a monic polynomial. A
//! [`FieldElement`] either lives in the base field (no parent) or carries the
//! extension it belongs to; base elements coerce into any extension.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::poly;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoeffError {
    #[error("minimal polynomial must be monic of degree at least 1")]
    NotMonic,
    #[error("minimal polynomial is reducible: factor {factor}")]
    Reducible { factor: String },
    #[error("minimal polynomial has a repeated factor (zero discriminant)")]
    ZeroDiscriminant,
    #[error("division by zero")]
    DivisionByZero,
    #[error("elements belong to different extensions")]
    ParentMismatch,
}

/// Whether the minimal polynomial was proven irreducible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Irreducibility {
    Verified,
    /// Degree above 4: only squarefreeness was checked.
    Unchecked,
}

#[derive(Debug, Clone)]
pub struct ResidueExtension<S: Scalar> {
    minpoly: Vec<S>,
    generator_name: String,
    irreducibility: Irreducibility,
}

impl<S: Scalar> PartialEq for ResidueExtension<S> {
    fn eq(&self, other: &Self) -> bool {
        self.minpoly == other.minpoly
    }
}

impl<S: Scalar> ResidueExtension<S> {
    /// Builds `k[θ]/(minpoly)`; `minpoly` is given low degree first.
    pub fn new(minpoly: Vec<S>, generator_name: &str) -> Result<Arc<Self>, CoeffError> {
        let mut minpoly = minpoly;
        poly::trim(&mut minpoly);
        let d = match poly::degree(&minpoly) {
            Some(d) if d >= 1 && minpoly[d].is_one() => d,
            _ => return Err(CoeffError::NotMonic),
        };
        if poly::degree(&poly::gcd(&minpoly, &poly::derivative(&minpoly))) != Some(0) {
            return Err(CoeffError::ZeroDiscriminant);
        }
        let irreducibility = if d == 1 {
            Irreducibility::Verified
        } else if d <= 4 {
            let ratios: Vec<BigRational> = minpoly.iter().map(|c| c.to_ratio()).collect();
            if let Some(factor) = find_rational_factor(&ratios) {
                return Err(CoeffError::Reducible { factor });
            }
            Irreducibility::Verified
        } else {
            Irreducibility::Unchecked
        };
        Ok(Arc::new(ResidueExtension { minpoly, generator_name: generator_name.to_string(), irreducibility }))
    }

    pub fn degree(&self) -> usize {
        self.minpoly.len() - 1
    }

    pub fn minpoly(&self) -> &[S] {
        &self.minpoly
    }

    pub fn generator_name(&self) -> &str {
        &self.generator_name
    }

    pub fn irreducibility(&self) -> Irreducibility {
        self.irreducibility
    }

    pub fn generator(self: &Arc<Self>) -> FieldElement<S> {
        FieldElement::from_coords(Some(self.clone()), vec![S::zero(), S::one()])
    }

    /// Element with the given coordinates in the basis `1, θ, …, θ^{d-1}`.
    pub fn element(self: &Arc<Self>, coords: Vec<S>) -> FieldElement<S> {
        FieldElement::from_coords(Some(self.clone()), coords)
    }

    fn coords_of(&self, e: &FieldElement<S>) -> Result<Vec<S>, CoeffError> {
        if let Some(p) = &e.ext {
            if **p != *self {
                return Err(CoeffError::ParentMismatch);
            }
        }
        let mut c = e.coords.clone();
        c.resize(self.degree(), S::zero());
        Ok(c)
    }

    /// Matrix of multiplication by `e`; column `j` holds the coordinates of `e·θ^j`.
    pub fn mul_matrix(&self, e: &FieldElement<S>) -> Result<Vec<Vec<S>>, CoeffError> {
        let d = self.degree();
        let base = self.coords_of(e)?;
        let mut cols = Vec::with_capacity(d);
        let mut cur = base;
        for _ in 0..d {
            cols.push(cur.clone());
            let mut shifted = vec![S::zero()];
            shifted.extend(cur);
            let (_, r) = poly::divrem(&shifted, &self.minpoly);
            cur = r;
            cur.resize(d, S::zero());
        }
        Ok((0..d).map(|i| (0..d).map(|j| cols[j][i].clone()).collect()).collect())
    }

    pub fn trace(&self, e: &FieldElement<S>) -> Result<S, CoeffError> {
        let m = self.mul_matrix(e)?;
        Ok((0..m.len()).fold(S::zero(), |acc, i| acc + m[i][i].clone()))
    }

    pub fn norm(&self, e: &FieldElement<S>) -> Result<S, CoeffError> {
        Ok(determinant(self.mul_matrix(e)?))
    }
}

/// Determinant over a field by Gaussian elimination.
pub(crate) fn determinant<S: Scalar>(mut m: Vec<Vec<S>>) -> S {
    let n = m.len();
    let mut det = S::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return S::zero();
        };
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        let p = m[col][col].clone();
        det = det * p.clone();
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone() / p.clone();
            for c in col..n {
                m[r][c] = m[r][c].clone() - f.clone() * m[col][c].clone();
            }
        }
    }
    det
}

/// Looks for a factor of degree 1 or 2 of a monic rational polynomial of degree ≤ 4.
fn find_rational_factor(p: &[BigRational]) -> Option<String> {
    let d = p.len() - 1;
    // Scale x ↦ x/D to obtain a monic integer polynomial with the same factorization pattern.
    let den = p.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = p
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let scaled = c * BigRational::from_integer(num_traits::pow(den.clone(), d - i));
            scaled.to_integer()
        })
        .collect();
    let eval = |x: &BigInt| ints.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c);
    let roots = integer_divisors(&ints[0]);
    for r in roots.iter().flat_map(|r| [r.clone(), -r.clone()]) {
        if eval(&r).is_zero() {
            let root = BigRational::new(r, den.clone());
            return Some(format!("x - ({root})"));
        }
    }
    if d == 4 {
        // (x² + a x + b)(x² + c x + e) with b·e = a0.
        let (a0, a1, a2, a3) = (&ints[0], &ints[1], &ints[2], &ints[3]);
        for b in roots.iter().flat_map(|r| [r.clone(), -r.clone()]) {
            let e = a0 / &b;
            let candidates: Vec<(BigInt, BigInt)> = if e != b {
                let num = a1 - &b * a3;
                let dd = &e - &b;
                if !(&num % &dd).is_zero() {
                    continue;
                }
                let a = num / dd;
                let c = a3 - &a;
                vec![(a, c)]
            } else {
                if *a1 != &b * a3 {
                    continue;
                }
                // a + c = a3, a·c = a2 − 2b.
                let disc = a3 * a3 - BigInt::from(4) * (a2 - BigInt::from(2) * &b);
                if disc.is_negative() {
                    continue;
                }
                let s = disc.sqrt();
                if &s * &s != disc {
                    continue;
                }
                let two = BigInt::from(2);
                if !((a3 + &s) % &two).is_zero() {
                    continue;
                }
                let a = (a3 + &s) / &two;
                let c = a3 - &a;
                vec![(a, c)]
            };
            for (a, c) in candidates {
                if &b + &e + &a * &c == *a2 && &a * &e + &b * &c == *a1 {
                    return Some(format!("x^2 + ({a})/{den} x + ({b})/{den}^2"));
                }
            }
        }
    }
    None
}

fn integer_divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    if n.is_zero() {
        return vec![BigInt::zero()];
    }
    let mut out = Vec::new();
    let mut k = BigInt::one();
    while &k * &k <= n {
        if (&n % &k).is_zero() {
            out.push(k.clone());
            out.push(&n / &k);
        }
        k += 1;
    }
    out
}

/// An element of the base field or of a residue extension.
#[derive(Debug, Clone)]
pub struct FieldElement<S: Scalar> {
    ext: Option<Arc<ResidueExtension<S>>>,
    coords: Vec<S>,
}

impl<S: Scalar> FieldElement<S> {
    pub fn from_coords(ext: Option<Arc<ResidueExtension<S>>>, mut coords: Vec<S>) -> Self {
        if let Some(e) = &ext {
            if coords.len() > e.degree() {
                coords = poly::divrem(&coords, &e.minpoly).1;
            }
        }
        poly::trim(&mut coords);
        FieldElement { ext, coords }
    }

    pub fn scalar(c: S) -> Self {
        Self::from_coords(None, vec![c])
    }

    pub fn int(n: i64) -> Self {
        Self::scalar(S::from_int(n))
    }

    pub fn parent(&self) -> Option<&Arc<ResidueExtension<S>>> {
        self.ext.as_ref()
    }

    /// Coordinates in the power basis, trailing zeros trimmed.
    pub fn coords(&self) -> &[S] {
        &self.coords
    }

    /// The value as a base scalar, if it has no θ-component.
    pub fn as_base(&self) -> Option<S> {
        match self.coords.len() {
            0 => Some(S::zero()),
            1 => Some(self.coords[0].clone()),
            _ => None,
        }
    }

    fn join(&self, other: &Self) -> Option<Arc<ResidueExtension<S>>> {
        match (&self.ext, &other.ext) {
            (Some(a), Some(b)) => {
                assert!(Arc::ptr_eq(a, b) || **a == **b, "{}", CoeffError::ParentMismatch);
                Some(a.clone())
            }
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (None, None) => None,
        }
    }

    pub fn inv(&self) -> Result<Self, CoeffError> {
        if self.coords.is_empty() {
            return Err(CoeffError::DivisionByZero);
        }
        if self.coords.len() == 1 {
            return Ok(Self::from_coords(self.ext.clone(), vec![S::one() / self.coords[0].clone()]));
        }
        let ext = self.ext.as_ref().expect("non-scalar element without parent");
        let inv = poly::inverse_mod(&self.coords, &ext.minpoly).ok_or(CoeffError::DivisionByZero)?;
        Ok(Self::from_coords(self.ext.clone(), inv))
    }

    pub fn pow(&self, n: i64) -> Result<Self, CoeffError> {
        let base = if n < 0 { self.inv()? } else { self.clone() };
        let mut acc = Self::one();
        for _ in 0..n.unsigned_abs() {
            acc = &acc * &base;
        }
        Ok(acc)
    }

    pub fn scale(&self, c: &S) -> Self {
        Self::from_coords(self.ext.clone(), poly::scale(&self.coords, c))
    }
}

impl<S: Scalar> PartialEq for FieldElement<S> {
    fn eq(&self, other: &Self) -> bool {
        if let (Some(a), Some(b)) = (&self.ext, &other.ext) {
            if **a != **b {
                return false;
            }
        }
        self.coords == other.coords
    }
}

impl<S: Scalar> Zero for FieldElement<S> {
    fn zero() -> Self {
        FieldElement { ext: None, coords: Vec::new() }
    }

    fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }
}

impl<S: Scalar> One for FieldElement<S> {
    fn one() -> Self {
        Self::scalar(S::one())
    }
}

impl<'a, S: Scalar> Add<&'a FieldElement<S>> for &'a FieldElement<S> {
    type Output = FieldElement<S>;
    fn add(self, rhs: &FieldElement<S>) -> FieldElement<S> {
        FieldElement::from_coords(self.join(rhs), poly::add(&self.coords, &rhs.coords))
    }
}

impl<'a, S: Scalar> Sub<&'a FieldElement<S>> for &'a FieldElement<S> {
    type Output = FieldElement<S>;
    fn sub(self, rhs: &FieldElement<S>) -> FieldElement<S> {
        self + &(-rhs)
    }
}

impl<S: Scalar> Neg for &FieldElement<S> {
    type Output = FieldElement<S>;
    fn neg(self) -> FieldElement<S> {
        FieldElement::from_coords(self.ext.clone(), poly::scale(&self.coords, &-S::one()))
    }
}

impl<'a, S: Scalar> Mul<&'a FieldElement<S>> for &'a FieldElement<S> {
    type Output = FieldElement<S>;
    fn mul(self, rhs: &FieldElement<S>) -> FieldElement<S> {
        let ext = self.join(rhs);
        if let ([a], [b]) = (self.coords.as_slice(), rhs.coords.as_slice()) {
            return FieldElement { ext, coords: vec![a.clone() * b.clone()] };
        }
        let prod = poly::mul(&self.coords, &rhs.coords);
        let prod = match &ext {
            Some(e) if prod.len() > e.degree() => poly::reduce_monic(prod, &e.minpoly),
            _ => prod,
        };
        FieldElement::from_coords(ext, prod)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<S: Scalar> $tr for FieldElement<S> {
            type Output = FieldElement<S>;
            fn $m(self, rhs: FieldElement<S>) -> FieldElement<S> {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<S: Scalar> Neg for FieldElement<S> {
    type Output = FieldElement<S>;
    fn neg(self) -> FieldElement<S> {
        -&self
    }
}

/// Renders base elements as plain rationals and extension elements as `(c0|c1|…)`.
impl<S: Scalar> fmt::Display for FieldElement<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.ext, self.coords.len()) {
            (_, 0) => write!(f, "0"),
            (None, 1) => write!(f, "{}", self.coords[0]),
            (Some(e), _) => {
                let mut c = self.coords.clone();
                c.resize(e.degree(), S::zero());
                let parts: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                write!(f, "({})", parts.join("|"))
            }
            (None, _) => unreachable!("base element with several coordinates"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    type Q = BigRational;

    fn q(n: i64) -> Q {
        Q::from_int(n)
    }

    fn sqrt2() -> Arc<ResidueExtension<Q>> {
        ResidueExtension::new(vec![q(-2), q(0), q(1)], "theta").unwrap()
    }

    #[test]
    fn create_degree_one_and_two() {
        let e = ResidueExtension::new(vec![q(-1), q(1)], "a").unwrap();
        assert_eq!(e.degree(), 1);
        let x = e.element(vec![q(5)]);
        assert_eq!(e.trace(&x).unwrap(), q(5));
        assert_eq!(e.norm(&x).unwrap(), q(5));
        let g = e.generator();
        assert_eq!(g, FieldElement::int(1));

        let k = sqrt2();
        let t = k.generator();
        assert_eq!(&t * &t, FieldElement::int(2));
    }

    #[test]
    fn reducible_rejected() {
        let err = ResidueExtension::new(vec![q(-1), q(0), q(1)], "a").unwrap_err();
        assert!(matches!(err, CoeffError::Reducible { .. }));
        // (x² + 1)(x² + 2)
        let err = ResidueExtension::new(vec![q(2), q(0), q(3), q(0), q(1)], "a").unwrap_err();
        assert!(matches!(err, CoeffError::Reducible { .. }), "{err:?}");
        // (x² + x + 1)(x² − x + 1) = x⁴ + x² + 1, the e == b branch
        let err = ResidueExtension::new(vec![q(1), q(0), q(1), q(0), q(1)], "a").unwrap_err();
        assert!(matches!(err, CoeffError::Reducible { .. }), "{err:?}");
        // x² − 1/4 has the rational root 1/2
        let quarter = Q::new(1.into(), 4.into());
        assert!(ResidueExtension::new(vec![-quarter, q(0), q(1)], "a").is_err());
        assert!(ResidueExtension::new(vec![q(-2), q(0), q(0), q(0), q(1)], "a").is_ok());
        assert_eq!(ResidueExtension::new(vec![q(1), q(2)], "a").unwrap_err(), CoeffError::NotMonic);
    }

    #[test]
    fn trace_and_norm_examples() {
        let k = sqrt2();
        let t = k.generator();
        assert_eq!(k.trace(&t).unwrap(), q(0));
        assert_eq!(k.trace(&FieldElement::one()).unwrap(), q(2));
        assert_eq!(k.trace(&(&FieldElement::int(3) + &t)).unwrap(), q(6));
        assert_eq!(k.norm(&t).unwrap(), q(-2));
        assert_eq!(k.norm(&FieldElement::one()).unwrap(), q(1));
        assert_eq!(k.norm(&FieldElement::zero()).unwrap(), q(0));
    }

    #[test]
    fn inverse_in_extension() {
        let k = sqrt2();
        let x = k.element(vec![q(3), q(1)]);
        let y = x.inv().unwrap();
        assert_eq!(&x * &y, FieldElement::one());
        assert_eq!(FieldElement::<Q>::zero().inv(), Err(CoeffError::DivisionByZero));
    }

    #[test]
    fn display() {
        let k = sqrt2();
        assert_eq!(k.element(vec![q(1), Q::new(3.into(), 2.into())]).to_string(), "(1|3/2)");
        assert_eq!(FieldElement::<Q>::int(-4).to_string(), "-4");
    }
}
