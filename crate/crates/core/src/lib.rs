//! Exact arithmetic on two-dimensional local fields `k((u))((t))`.
//!
//! The crate computes residues of differential forms, tame symbols and the
//! relative pushforwards along a fibration `f: X → S`, and checks the
//! reciprocity laws these maps satisfy on explicit fibred surfaces.
//!
//! All constructions are generic over an exact [`Scalar`]; the aliases below
//! fix it to arbitrary-precision rationals.

pub mod coefficients;
pub mod forms;
pub mod localext;
pub mod pushforward;
mod poly;
pub mod scalar;
pub mod scenarios;
pub mod series;
pub mod symbols;

pub use coefficients::{CoeffError, FieldElement, ResidueExtension};
pub use scalar::Scalar;
pub use series::{Coeff, Laurent, Precision, SeriesError};

/// Arbitrary-precision rationals.
pub type Rational = num_rational::BigRational;
/// Residue-field element over [`Rational`].
pub type Elem = FieldElement<Rational>;
/// One-variable Laurent series over the residue field.
pub type Series = series::Series<Rational>;
/// Element of the iterated field `k((u))((t))`.
pub type Iterated = series::Iterated<Rational>;
