//! Flows of two-variable maps along `x -> x + s y^-d x^-q`.
//!
//! Internally `x` is renamed to `t`, the only variable allowed negative and
//! fractional exponents, so that `x^-q` is representable.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::FlowError;
use crate::linalg::Matrix;
use crate::polyalg::{Degree, Exponent, Poly, Var};
use crate::scalar::factorial;
use crate::{GenPoly, PolyMatrix, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct TwoDimFlowResult {
    pub q: Exponent,
    /// `deg_x Theta`.
    pub d0: i64,
    /// `lambda_l(y)` for `l = 1..=d0`.
    pub lambda_l: Vec<PolyMatrix>,
    /// `lambda(y) = lambda_1(y)`.
    pub lambda_of_y: PolyMatrix,
    /// `deg_y lambda(y)`.
    pub d: i64,
    /// Leading `y`-coefficient of `lambda(y)`.
    pub lambda0: Matrix<Rational>,
    /// `exp(s lambda_0)` in the variable `s`.
    pub rho: PolyMatrix,
    /// `deg_y` of `Theta' Theta^-1`.
    pub p: i64,
    pub b: Exponent,
    /// Pairs `(t, r)` with `y^t x^-r` a monomial of `Theta' Theta^-1 x^-q`.
    pub ratio_set_a: Vec<(Exponent, Exponent)>,
    pub dominant_ratio: Option<(Exponent, Exponent)>,
}

fn x_to_t(m: &PolyMatrix) -> PolyMatrix {
    m.map(|p| p.rename(Var::x(), Var::T))
}

fn t_to_x(m: &PolyMatrix) -> PolyMatrix {
    m.map(|p| p.rename(Var::T, Var::x()))
}

fn integer_degree(d: Degree) -> i64 {
    d.finite().map_or(i64::MIN, |e| e.to_integer())
}

/// `Theta^(l) Theta^-1` for `l = 1..=d0`, in the renamed variables.
fn log_derivatives(theta: &PolyMatrix, inv: &PolyMatrix, d0: i64) -> Vec<PolyMatrix> {
    let mut out = Vec::new();
    let mut der = theta.clone();
    for _ in 1..=d0 {
        der = der.differentiate(Var::T);
        out.push(der.multiply(inv).expect("same dimension"));
    }
    out
}

pub fn twodim_flow(theta_map: &PolyMatrix) -> Result<TwoDimFlowResult, FlowError> {
    let origin: BTreeMap<Var, GenPoly> = [(Var::x(), Poly::zero()), (Var::y(), Poly::zero())].into();
    if !theta_map.substitute(&origin)?.is_identity() {
        return Err(FlowError::NotIdentityAtOrigin);
    }
    let theta = x_to_t(theta_map);
    let inv = theta.inverse_sl()?;
    let d0 = integer_degree(theta.degree_in(Var::T));
    if d0 <= 0 {
        return Err(FlowError::DegreeZero);
    }
    let logs = log_derivatives(&theta, &inv, d0);
    let q = logs
        .iter()
        .enumerate()
        .filter_map(|(i, m)| m.degree_in(Var::T).finite().map(|e| e / (i as i64 + 1)))
        .max()
        .ok_or(FlowError::DegreeZero)?;

    let mut lambda_l = Vec::new();
    for (i, m) in logs.iter().enumerate() {
        let l = i as i64 + 1;
        let (lim, _) = m
            .mul_t_power(-(q * l))
            .limit_t_to_infinity()
            .map_err(|source| FlowError::Divergent {
                order: l as u32,
                source,
            })?;
        lambda_l.push(lim);
    }
    let lambda_of_y = lambda_l[0].clone();
    if lambda_of_y.is_zero() {
        return Err(FlowError::ZeroLeading);
    }
    let d = integer_degree(lambda_of_y.degree_in(Var::y()));
    let n = theta.dim();
    let lambda0 = Matrix::from_fn(n, n, |i, j| {
        lambda_of_y
            .get(i, j)
            .coefficient_of(Var::y(), Exponent::from_integer(d))
            .constant_value()
            .expect("lambda(y) depends on y only")
    });
    let top = lambda0.pow(n as u32);
    if !top.is_zero() {
        return Err(FlowError::NotNilpotent(top.max_abs()));
    }
    let rho = exp_symbolic(&lambda0);

    let p = integer_degree(logs[0].degree_in(Var::y()));
    let b = Exponent::from_integer(p + 1);

    let mut ratio_set_a: Vec<(Exponent, Exponent)> = Vec::new();
    for entry in logs[0].mul_t_power(-q).entries() {
        for (m, _) in entry.terms() {
            let r = -m.exponent_of(Var::T);
            if !r.is_zero() {
                ratio_set_a.push((m.exponent_of(Var::y()), r));
            }
        }
    }
    ratio_set_a.sort();
    ratio_set_a.dedup();
    let mut dominant_ratio: Option<(Exponent, Exponent)> = None;
    for &(t, r) in &ratio_set_a {
        if dominant_ratio.is_none_or(|(t0, r0)| t / r > t0 / r0) {
            dominant_ratio = Some((t, r));
        }
    }

    Ok(TwoDimFlowResult {
        q,
        d0,
        lambda_l: lambda_l.iter().map(t_to_x).collect(),
        lambda_of_y,
        d,
        lambda0,
        rho,
        p,
        b,
        ratio_set_a,
        dominant_ratio,
    })
}

fn exp_symbolic(y: &Matrix<Rational>) -> PolyMatrix {
    let n = y.rows();
    let mut acc = PolyMatrix::identity(n);
    let mut power = Matrix::<Rational>::identity(n);
    for j in 1..n as u32 {
        power = power.mul(y);
        if power.is_zero() {
            break;
        }
        let c = Poly::power_of(
            Rational::one() / factorial::<Rational>(j),
            Var::s(),
            Exponent::from_integer(i64::from(j)),
        )
        .expect("integer power");
        acc = acc
            .add(&PolyMatrix::from_constant(&power).scale_poly(&c))
            .expect("same dimension");
    }
    acc
}

/// Remainders `Theta^(l) Theta^-1 x^{-ql} - y^{dl} lambda_0^l`, so that
/// `Theta(x + h, y) Theta(x, y)^-1 - rho(s)` with `h = s y^-d x^-q` equals
/// `sum_l s^l / l! * G_l(x, y) * y^{-dl}` exactly.
pub struct TwoDimExpansion {
    remainders: Vec<PolyMatrix>,
    d: i64,
}

impl TwoDimExpansion {
    pub fn new(theta_map: &PolyMatrix, result: &TwoDimFlowResult) -> Result<Self, FlowError> {
        let theta = x_to_t(theta_map);
        let inv = theta.inverse_sl()?;
        let logs = log_derivatives(&theta, &inv, result.d0);
        let n = theta.dim();
        let count = (result.d0 as usize).max(n - 1);
        let mut remainders = Vec::with_capacity(count);
        let mut lam_pow = Matrix::<Rational>::identity(n);
        for l in 1..=count {
            lam_pow = lam_pow.mul(&result.lambda0);
            let f = match logs.get(l - 1) {
                Some(m) => m.mul_t_power(-(result.q * l as i64)),
                None => PolyMatrix::zeros(n),
            };
            let yd = Poly::power_of(Rational::one(), Var::y(), Exponent::from_integer(result.d * l as i64))?;
            let lead = PolyMatrix::from_constant(&lam_pow).scale_poly(&yd);
            remainders.push(f.sub(&lead)?);
        }
        Ok(Self {
            remainders,
            d: result.d,
        })
    }

    /// `max |Theta(x + h, y) Theta(x, y)^-1 - rho(s)|`, `h = s y^-d x^-q`.
    pub fn residual(&self, s: f64, x: f64, y: f64) -> Result<f64, FlowError> {
        let pt: BTreeMap<Var, f64> = [(Var::T, x), (Var::y(), y)].into();
        let n = self.remainders[0].dim();
        let mut acc = Matrix::<f64>::zeros(n, n);
        let mut coeff = 1.0;
        for (i, r) in self.remainders.iter().enumerate() {
            let l = i as i32 + 1;
            coeff *= s / f64::from(l);
            if r.is_zero() {
                continue;
            }
            let scale = coeff * y.powi(-(self.d as i32) * l);
            acc = acc.add(&r.evaluate(&pt)?.scale(&scale));
        }
        Ok(acc.max_abs())
    }
}

pub fn twodim_residual(
    theta_map: &PolyMatrix,
    result: &TwoDimFlowResult,
    s: f64,
    x: f64,
    y: f64,
) -> Result<f64, FlowError> {
    TwoDimExpansion::new(theta_map, result)?.residual(s, x, y)
}

impl TwoDimFlowResult {
    /// `exp(s lambda_0)` at a numeric `s`.
    pub fn rho_at(&self, s: f64) -> Matrix<f64> {
        let pt: BTreeMap<Var, f64> = [(Var::s(), s)].into();
        self.rho.evaluate(&pt).expect("rho depends on s only")
    }
}
