//! Finite extensions `L/K_s` of one-dimensional local fields, presented by a
//! residue extension, a ramification index and the image of `t_s` as a series
//! in the uniformizer `π` of `L`.
//!
//! Coordinates in the `K_s`-basis `{θ^i π^j}` are found by peeling off leading
//! digits; trace and norm are then read from the multiplication matrix.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::coefficients::{CoeffError, FieldElement, ResidueExtension};
use crate::scalar::Scalar;
use crate::series::{Coeff, Series, SeriesError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LocalExtError {
    #[error("invalid embedding: {0}")]
    BadEmbedding(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
}

/// Upper bound on digit extraction steps; reached only for runaway inputs.
const MAX_DIGITS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LocalExtension<S: Scalar> {
    residue: Option<Arc<ResidueExtension<S>>>,
    e: i64,
    /// `t_s` as a series in `π` over `k(x)`.
    embedding: Series<S>,
    embedding_lead: FieldElement<S>,
}

impl<S: Scalar> LocalExtension<S> {
    pub fn new(
        residue: Option<Arc<ResidueExtension<S>>>,
        e: i64,
        embedding: Series<S>,
    ) -> Result<Self, LocalExtError> {
        if e < 1 {
            return Err(LocalExtError::BadEmbedding(format!("ramification index {e} < 1")));
        }
        let (v, lead) = embedding
            .leading()
            .map_err(|_| LocalExtError::BadEmbedding("leading term of t_s undeterminable".into()))?;
        if v != e {
            return Err(LocalExtError::BadEmbedding(format!(
                "t_s has valuation {v} in the uniformizer, expected {e}"
            )));
        }
        let embedding_lead = lead.clone();
        let ext = LocalExtension { residue, e, embedding, embedding_lead };
        // every basis product must have well-defined digits
        let basis = ext.basis();
        for a in &basis {
            for b in &basis {
                ext.digits(&a.mul_ref(b), 2)?;
            }
        }
        Ok(ext)
    }

    /// `k(x)((t_s))/K_s`: unramified, `t_s` itself is the uniformizer.
    pub fn unramified(residue: Option<Arc<ResidueExtension<S>>>) -> Self {
        Self::new(residue, 1, Series::var()).expect("t_s ↦ π is a valid embedding")
    }

    /// `k(s)((π))` with `t_s = π^e`.
    pub fn totally_ramified(e: i64) -> Result<Self, LocalExtError> {
        Self::new(None, e, Series::monomial(FieldElement::one(), e))
    }

    pub fn residue(&self) -> Option<&Arc<ResidueExtension<S>>> {
        self.residue.as_ref()
    }

    pub fn residue_degree(&self) -> usize {
        self.residue.as_ref().map_or(1, |r| r.degree())
    }

    pub fn ramification(&self) -> i64 {
        self.e
    }

    pub fn embedding(&self) -> &Series<S> {
        &self.embedding
    }

    pub fn degree(&self) -> usize {
        self.residue_degree() * self.e as usize
    }

    fn theta_pow(&self, i: usize) -> FieldElement<S> {
        match &self.residue {
            Some(r) => {
                let mut coords = vec![S::zero(); i + 1];
                coords[i] = S::one();
                r.element(coords)
            }
            None => FieldElement::one(),
        }
    }

    /// Basis `θ^i π^j`, index `i·e + j`.
    pub fn basis(&self) -> Vec<Series<S>> {
        let mut out = Vec::with_capacity(self.degree());
        for i in 0..self.residue_degree() {
            for j in 0..self.e {
                out.push(Series::monomial(self.theta_pow(i), j));
            }
        }
        out
    }

    /// Coordinates of `g` in the basis, as series in `t_s` over `k(s)`.
    ///
    /// `cap` bounds the number of `t_s`-digits taken from an exact `g` whose
    /// expansion does not terminate.
    pub fn digits(&self, g: &Series<S>, cap: i64) -> Result<Vec<Series<S>>, LocalExtError> {
        let (f, e) = (self.residue_degree(), self.e);
        let n = self.degree();
        let Some(low) = g.valuation_bound() else {
            return Ok(vec![Series::zero(); n]);
        };
        let emb_monomial = self.embedding.is_exact() && self.embedding.terms().count() == 1;
        let mut rest = if g.is_exact() && !emb_monomial { g.truncate(low + cap * e) } else { g.clone() };
        let lead_inv = self.embedding_lead.inv()?;
        let target = rest.prec().unwrap_or(low + cap * e);
        let mut emb_pows: BTreeMap<i64, Series<S>> = BTreeMap::new();
        let mut acc: Vec<BTreeMap<i64, FieldElement<S>>> = vec![BTreeMap::new(); n];

        let mut steps = 0;
        loop {
            let Some((m, a)) = rest.terms().next().map(|(m, a)| (m, a.clone())) else {
                break;
            };
            steps += 1;
            if steps > MAX_DIGITS {
                return Err(SeriesError::InsufficientPrecision("digit expansion does not terminate".into()).into());
            }
            if !a.is_known_nonzero() {
                return Err(SeriesError::InsufficientPrecision("digit undeterminable".into()).into());
            }
            let (k, j) = (m.div_euclid(e), m.rem_euclid(e));
            let digit = &a * &lead_inv.pow(k)?;
            for (i, d) in digit.coords().iter().enumerate().take(f) {
                if !d.is_zero() {
                    acc[i * e as usize + j as usize].insert(k, FieldElement::scalar(d.clone()));
                }
            }
            if !emb_pows.contains_key(&k) {
                // relative cap so that e·k + cap reaches the target
                let caps = [(target - e * k).max(1)];
                emb_pows.insert(k, self.embedding.pow(k, &caps)?);
            }
            let term = emb_pows[&k].shift(j).scale(&digit);
            rest = rest.sub_ref(&term);
        }
        let p = rest.prec();
        Ok(acc
            .into_iter()
            .enumerate()
            .map(|(idx, terms)| {
                let j = idx as i64 % e;
                let prec = p.map(|p| (p - j + e - 1).div_euclid(e));
                Series::new(terms, prec)
            })
            .collect())
    }

    /// Matrix of multiplication by `g`; column `l` holds the digits of `g·b_l`.
    pub fn mul_matrix(&self, g: &Series<S>, cap: i64) -> Result<Vec<Vec<Series<S>>>, LocalExtError> {
        let n = self.degree();
        let mut m = vec![vec![Series::zero(); n]; n];
        for (col, b) in self.basis().iter().enumerate() {
            for (row, d) in self.digits(&g.mul_ref(b), cap)?.into_iter().enumerate() {
                m[row][col] = d;
            }
        }
        Ok(m)
    }

    pub fn trace(&self, g: &Series<S>, cap: i64) -> Result<Series<S>, LocalExtError> {
        let m = self.mul_matrix(g, cap)?;
        Ok((0..m.len()).fold(Series::zero(), |acc, i| acc.add_ref(&m[i][i])))
    }

    pub fn norm(&self, g: &Series<S>, cap: i64) -> Result<Series<S>, LocalExtError> {
        g.leading().map_err(|_| SeriesError::NotAUnit)?;
        let det = determinant(&self.mul_matrix(g, cap)?);
        det.leading().map_err(|_| SeriesError::NotAUnit)?;
        Ok(det)
    }
}

/// Leibniz expansion; the matrices here have size `e·f ≤ 6` or so.
fn determinant<S: Scalar>(m: &[Vec<Series<S>>]) -> Series<S> {
    let n = m.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = Series::zero();
    loop {
        let mut prod = Series::one();
        for (r, &c) in perm.iter().enumerate() {
            prod = prod.mul_ref(&m[r][c]);
            if prod.is_exact_zero() {
                break;
            }
        }
        if parity(&perm) {
            total = total.sub_ref(&prod);
        } else {
            total = total.add_ref(&prod);
        }
        if !next_permutation(&mut perm) {
            return total;
        }
    }
}

fn parity(p: &[usize]) -> bool {
    let mut odd = false;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                odd = !odd;
            }
        }
    }
    odd
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let Some(i) = (0..n - 1).rev().find(|&i| p[i] < p[i + 1]) else {
        return false;
    };
    let j = (i + 1..n).rev().find(|&j| p[j] > p[i]).expect("successor exists");
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}
