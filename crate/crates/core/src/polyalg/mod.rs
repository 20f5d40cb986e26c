//! Generalized polynomials with rational coefficients and rational exponents
//! in `t`, and square matrices of them.

mod dense;
mod matrix;
mod poly;
mod text;
mod var;

use thiserror::Error;

pub use dense::DensePoly;
pub use matrix::{parse_matrix, PolyMat};
pub use poly::{Limit, Monomial, Poly};
pub use text::parse_poly;
pub use var::{Degree, Exponent, Var};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("exponent {exp} of {var} is not allowed (only t may have fractional or negative exponents)")]
    BadExponent { var: Var, exp: Exponent },
    #[error("binding for {0} must be a single monomial to take a fractional or negative power")]
    FractionalPower(Var),
    #[error("exact evaluation needs an integer exponent, got {var}^{exp}")]
    NonIntegerExponent { var: Var, exp: Exponent },
    #[error("t = {0} is not positive but the polynomial has fractional or negative t-exponents")]
    NonPositiveT(f64),
    #[error("pole at {0} = 0")]
    Pole(Var),
    #[error("variable {0} is unbound")]
    Unbound(Var),
    #[error("limit as t -> infinity diverges (t-degree {0})")]
    Divergent(Exponent),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix is not square")]
    NotSquare,
    #[error("determinant is not identically 1: {0}")]
    NotSl(String),
    #[error("parse error: {0}")]
    Parse(String),
}
