//! Limiting unipotent flows of polynomial trajectories in `SL(N, R)`, and a
//! numerical harness on the space of unimodular lattices.

// `!(x > 0.0)` style guards are there to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod experiment;
pub mod flowlimit;
pub mod homspace;
pub mod goodness;
pub mod linalg;
pub mod par;
pub mod polyalg;
pub mod run;
pub mod scalar;

pub use num_rational::BigRational;

/// Exact coefficient field.
pub type Rational = BigRational;
/// Generalized polynomial over the rationals.
pub type GenPoly = polyalg::Poly<Rational>;
/// Square matrix of [`GenPoly`].
pub type PolyMatrix = polyalg::PolyMat<Rational>;
/// Floating-point polynomial, for fast evaluation.
pub type RealPoly = polyalg::Poly<f64>;
pub type Real = f64;
