//! Dense univariate polynomials over a scalar field, coefficients stored low to high.

use crate::scalar::Scalar;

pub(crate) fn trim<S: Scalar>(p: &mut Vec<S>) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

pub(crate) fn degree<S: Scalar>(p: &[S]) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

pub(crate) fn add<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    let n = a.len().max(b.len());
    let mut out: Vec<S> = (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_else(S::zero);
            let y = b.get(i).cloned().unwrap_or_else(S::zero);
            x + y
        })
        .collect();
    trim(&mut out);
    out
}

pub(crate) fn scale<S: Scalar>(a: &[S], c: &S) -> Vec<S> {
    let mut out: Vec<S> = a.iter().map(|x| x.clone() * c.clone()).collect();
    trim(&mut out);
    out
}

pub(crate) fn mul<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![S::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].clone() + x.clone() * y.clone();
        }
    }
    trim(&mut out);
    out
}

/// Quotient and remainder; `b` must be nonzero.
pub(crate) fn divrem<S: Scalar>(a: &[S], b: &[S]) -> (Vec<S>, Vec<S>) {
    let db = degree(b).expect("division by zero polynomial");
    let lead = b[db].clone();
    let mut rem: Vec<S> = a.to_vec();
    trim(&mut rem);
    let mut quot = vec![S::zero(); rem.len().saturating_sub(db)];
    while let Some(dr) = degree(&rem) {
        if dr < db {
            break;
        }
        let c = rem[dr].clone() / lead.clone();
        let shift = dr - db;
        for (j, y) in b.iter().enumerate().take(db + 1) {
            rem[shift + j] = rem[shift + j].clone() - c.clone() * y.clone();
        }
        quot[shift] = c;
        trim(&mut rem);
    }
    trim(&mut quot);
    (quot, rem)
}

/// Remainder modulo a monic `m`, without divisions.
pub(crate) fn reduce_monic<S: Scalar>(mut a: Vec<S>, m: &[S]) -> Vec<S> {
    let d = m.len() - 1;
    for k in (d..a.len()).rev() {
        let c = std::mem::replace(&mut a[k], S::zero());
        if c.is_zero() {
            continue;
        }
        for (j, mj) in m[..d].iter().enumerate() {
            a[k - d + j] = a[k - d + j].clone() - c.clone() * mj.clone();
        }
    }
    a.truncate(d);
    trim(&mut a);
    a
}

pub(crate) fn derivative<S: Scalar>(a: &[S]) -> Vec<S> {
    let mut out: Vec<S> = a
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c.clone() * S::from_int(i as i64))
        .collect();
    trim(&mut out);
    out
}

pub(crate) fn gcd<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let (_, r) = divrem(&x, &y);
        x = y;
        y = r;
    }
    x
}

/// Inverse of `a` modulo `m`, if `gcd(a, m)` is a unit.
pub(crate) fn inverse_mod<S: Scalar>(a: &[S], m: &[S]) -> Option<Vec<S>> {
    let (mut r0, mut r1) = (m.to_vec(), a.to_vec());
    trim(&mut r0);
    trim(&mut r1);
    let (mut s0, mut s1): (Vec<S>, Vec<S>) = (Vec::new(), vec![S::one()]);
    while !r1.is_empty() {
        let (q, r) = divrem(&r0, &r1);
        let s2 = add(&s0, &scale(&mul(&q, &s1), &-S::one()));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s2);
    }
    if degree(&r0) != Some(0) {
        return None;
    }
    let c = S::one() / r0[0].clone();
    let (_, out) = divrem(&scale(&s0, &c), m);
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(v: &[i64]) -> Vec<BigRational> {
        v.iter().map(|&n| BigRational::from_int(n)).collect()
    }

    #[test]
    fn division_and_inverse() {
        let (quot, rem) = divrem(&q(&[-1, 0, 1]), &q(&[-1, 1]));
        assert_eq!(quot, q(&[1, 1]));
        assert!(rem.is_empty());
        let m = q(&[-2, 0, 1]);
        let inv = inverse_mod(&q(&[3, 1]), &m).unwrap();
        let (_, prod) = divrem(&mul(&inv, &q(&[3, 1])), &m);
        assert_eq!(prod, q(&[1]));
        assert_eq!(gcd(&q(&[-1, 0, 1]), &q(&[1, 1])).len(), 2);
    }
}
