use num_traits::{Float, FromPrimitive};

use super::{Poly, PolyError, Var};
use crate::scalar::{float_from_f64, Coefficient};

/// A polynomial frozen for fast floating evaluation at points given as a
/// slice in a fixed variable order. Integer exponents only.
#[derive(Clone, Debug, PartialEq)]
pub struct DensePoly<F> {
    terms: Vec<(F, Vec<i32>)>,
}

impl<F: Float + FromPrimitive> DensePoly<F> {
    pub fn new<C: Coefficient>(p: &Poly<C>, vars: &[Var]) -> Result<Self, PolyError> {
        let mut terms = Vec::with_capacity(p.len());
        for (m, c) in p.terms() {
            let mut exps = vec![0i32; vars.len()];
            for &(v, e) in m.factors() {
                let i = vars.iter().position(|w| *w == v).ok_or(PolyError::Unbound(v))?;
                if !e.is_integer() {
                    return Err(PolyError::NonIntegerExponent { var: v, exp: e });
                }
                exps[i] = *e.numer() as i32;
            }
            terms.push((float_from_f64(c.to_f64()), exps));
        }
        Ok(Self { terms })
    }

    /// Terms are summed in canonical term order.
    pub fn eval(&self, x: &[F]) -> F {
        let mut acc = F::zero();
        for (c, exps) in &self.terms {
            let mut v = *c;
            for (xi, &e) in x.iter().zip(exps) {
                if e != 0 {
                    v = v * xi.powi(e);
                }
            }
            acc = acc + v;
        }
        acc
    }
}
