//! Distance between the shifted orbit and the limiting flow.
//!
//! Evaluating `theta(a, t + s t^-q) theta(a, t)^-1` directly loses all digits
//! once `t` is large: the entries of `theta` grow like a power of `t` while
//! the residual decays. Instead the product is expanded as the Taylor series
//! `sum_j theta^(j)(t) theta(t)^-1 h^j / j!` with `h = s t^-q`, and the
//! `M_j` are subtracted symbolically, so only small remainders are ever
//! evaluated in floating point.

use std::collections::BTreeMap;

use super::local::{flow_of, Derivatives};
use super::{FlowError, FlowResult};
use crate::linalg::Matrix;
use crate::polyalg::Var;
use crate::PolyMatrix;

/// Extra Taylor terms beyond order `d`. Term `j` decays like
/// `t^{-(1+q) j}`, so for `t >= 10` a dozen is far below `f64` resolution.
const EXTRA_TERMS: u32 = 12;

/// Precomputed remainders `theta^(j) theta^-1 t^{-qj} - M_j`.
pub struct FlowExpansion {
    alphas: Vec<Var>,
    remainders: Vec<PolyMatrix>,
}

impl FlowExpansion {
    pub fn new(theta: &PolyMatrix, result: &FlowResult) -> Result<Self, FlowError> {
        let mut ders = Derivatives::new(theta)?;
        let mut remainders = Vec::new();
        for j in 1..=result.d + EXTRA_TERMS {
            let term = ders.product(j).mul_t_power(-(result.q * i64::from(j)));
            let r = match result.limits.get(j as usize - 1) {
                Some(m) => term.sub(m)?,
                None => term,
            };
            remainders.push(r);
        }
        Ok(Self {
            alphas: result.alphas.clone(),
            remainders,
        })
    }

    /// Max-entry deviation at `(a, s, t)`.
    pub fn residual(&self, alpha: &[f64], s: f64, t: f64) -> Result<f64, FlowError> {
        let mut pt: BTreeMap<Var, f64> = self.alphas.iter().copied().zip(alpha.iter().copied()).collect();
        pt.insert(Var::T, t);
        let n = self.remainders[0].dim();
        let mut acc = Matrix::<f64>::zeros(n, n);
        let mut coeff = 1.0;
        for (i, r) in self.remainders.iter().enumerate() {
            coeff *= s / (i + 1) as f64;
            if r.is_zero() {
                continue;
            }
            acc = acc.add(&r.evaluate(&pt)?.scale(&coeff));
        }
        Ok(acc.max_abs())
    }
}

/// `max |theta(a, t + s t^-q) theta(a, t)^-1 - rho_a(s)|`, computed through
/// [`FlowExpansion`].
pub fn limit_residual(
    theta: &PolyMatrix,
    result: &FlowResult,
    alpha: &[f64],
    s: f64,
    t: f64,
) -> Result<f64, FlowError> {
    FlowExpansion::new(theta, result)?.residual(alpha, s, t)
}

/// The same quantity evaluated literally. Only meaningful for moderate `t`.
pub fn limit_residual_direct(
    theta: &PolyMatrix,
    result: &FlowResult,
    alpha: &[f64],
    s: f64,
    t: f64,
) -> Result<f64, FlowError> {
    let inv = theta.inverse_sl()?;
    let mut pt: BTreeMap<Var, f64> = result.alphas.iter().copied().zip(alpha.iter().copied()).collect();
    pt.insert(Var::s(), s);
    let rho = flow_of(result, Var::s()).evaluate(&pt)?;
    let q = *result.q.numer() as f64 / *result.q.denom() as f64;
    pt.insert(Var::T, t + s * t.powf(-q));
    let shifted = theta.evaluate(&pt)?;
    pt.insert(Var::T, t);
    let base_inv = inv.evaluate(&pt)?;
    Ok(shifted.mul(&base_inv).sub(&rho).max_abs())
}
