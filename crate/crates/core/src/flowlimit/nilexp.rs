use num_traits::{Float, FromPrimitive};

use super::FlowError;
use crate::linalg::Matrix;
use crate::scalar::Scalar;

const NILPOTENCY_TOL: f64 = 1e-9;

/// `exp(sY)` for nilpotent `Y` as the finite sum `sum_{j<N} (sY)^j / j!`.
pub fn nilpotent_exp<F: Float + FromPrimitive + Scalar>(y: &Matrix<F>, s: F) -> Result<Matrix<F>, FlowError> {
    let n = y.rows();
    let top = y.pow(n as u32).max_abs();
    if !(top < NILPOTENCY_TOL) {
        return Err(FlowError::NotNilpotent(top));
    }
    let sy = y.scale(&s);
    let mut term = Matrix::identity(n);
    let mut acc = Matrix::identity(n);
    for j in 1..n {
        let inv_j = F::one() / F::from_usize(j).expect("small");
        term = term.mul(&sy).scale(&inv_j);
        acc = acc.add(&term);
    }
    Ok(acc)
}
