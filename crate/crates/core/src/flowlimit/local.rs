use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{nilpotent_exp, FlowError};
use crate::polyalg::{Degree, Exponent, Poly, Var};
use crate::scalar::{factorial, rational_from_i64s, ratio_to_f64};
use crate::{GenPoly, PolyMatrix, Rational};

/// Cap on the Taylor order explored by the iteration.
const MAX_ORDER: u32 = 64;

/// Substitutes `x_i -> a_i t^{lambda_i}`.
pub fn rescale(theta_map: &PolyMatrix, lambda: &[Exponent]) -> Result<PolyMatrix, FlowError> {
    if theta_map.contains_var(Var::T) {
        return Err(FlowError::AlreadyRescaled);
    }
    let k = lambda.len();
    for e in theta_map.entries() {
        for v in e.vars() {
            match v {
                Var::X(i) if usize::from(i) < k => {}
                Var::X(i) => {
                    return Err(FlowError::LambdaLength {
                        got: k,
                        want: usize::from(i) + 1,
                    })
                }
                _ => {}
            }
        }
    }
    if let Some(l) = lambda.iter().find(|l| !l.is_positive()) {
        return Err(FlowError::NonPositiveLambda(*l));
    }
    let origin: BTreeMap<Var, GenPoly> = (0..k).map(|i| (Var::X(i as u8), Poly::zero())).collect();
    if !theta_map.substitute(&origin)?.is_identity() {
        return Err(FlowError::NotIdentityAtOrigin);
    }
    let bindings: BTreeMap<Var, GenPoly> = lambda
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let a = Poly::var(Var::Alpha(i as u8));
            let tl = Poly::power_of(Rational::one(), Var::T, *l).expect("t power");
            (Var::X(i as u8), &a * &tl)
        })
        .collect();
    Ok(theta_map.substitute(&bindings)?)
}

/// Grid `1, 1 + 1/den, 1 + 2/den, ...` with `den = 4` unless every exponent
/// is a multiple of 4; then `den` doubles until some exponent is not a
/// multiple of it, since otherwise no grid point yields a non-integer.
fn search_grid(lambda: &[Exponent]) -> impl Iterator<Item = Exponent> {
    let mut den: i64 = 4;
    while lambda.iter().all(|l| (l / den).is_integer()) && den < (1 << 40) {
        den *= 2;
    }
    (den..).map(move |m| Exponent::new(m, den))
}

fn compliant(scaled: &[Exponent]) -> bool {
    scaled.iter().all(|l| *l > Exponent::one()) && scaled.iter().any(|l| !l.is_integer())
}

/// Smallest grid value `c` with every `c lambda_i > 1` and some `c lambda_i`
/// non-integral.
pub fn normalize_exponents(lambda: &[Exponent]) -> Result<(Exponent, Vec<Exponent>), FlowError> {
    if let Some(l) = lambda.iter().find(|l| !l.is_positive()) {
        return Err(FlowError::NonPositiveLambda(*l));
    }
    for c in search_grid(lambda) {
        let scaled: Vec<Exponent> = lambda.iter().map(|l| c * l).collect();
        if compliant(&scaled) {
            return Ok((c, scaled));
        }
    }
    unreachable!("grid is infinite")
}

/// Like [`normalize_exponents`], but keeps searching until the rescaled map
/// itself carries a non-integer power of `t`. Returns `(c, lambda', theta)`.
pub fn normalize_for_map(
    theta_map: &PolyMatrix,
    lambda: &[Exponent],
) -> Result<(Exponent, Vec<Exponent>, PolyMatrix), FlowError> {
    let (c0, _) = normalize_exponents(lambda)?;
    for c in search_grid(lambda).filter(|c| *c >= c0).take(4096) {
        let scaled: Vec<Exponent> = lambda.iter().map(|l| c * l).collect();
        if !compliant(&scaled) {
            continue;
        }
        let theta = rescale(theta_map, &scaled)?;
        let fractional = theta
            .entries()
            .iter()
            .any(|p| p.terms().any(|(m, _)| !m.exponent_of(Var::T).is_integer()));
        if fractional {
            return Ok((c, scaled, theta));
        }
    }
    Err(FlowError::NoFractionalExponent(0))
}

/// One step of the order iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct Stage {
    pub d: u32,
    pub q: Exponent,
    /// `deg_t` of the shifted stopping expression; the iteration stops at the
    /// first negative value.
    pub test_degree: Degree,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowResult {
    pub q: Exponent,
    pub d: u32,
    /// `M_1, ..., M_d`.
    pub limits: Vec<PolyMatrix>,
    /// `Y = M_1`.
    pub generator: PolyMatrix,
    /// Nonzero entries of all `M_l`; `a` is degenerate iff all vanish there.
    pub degenerate_locus: Vec<GenPoly>,
    pub alphas: Vec<Var>,
    pub stages: Vec<Stage>,
}

impl FlowResult {
    pub fn dim(&self) -> usize {
        self.generator.dim()
    }

    pub fn alpha_point(&self, alpha: &[Rational]) -> BTreeMap<Var, Rational> {
        self.alphas.iter().copied().zip(alpha.iter().cloned()).collect()
    }

    pub fn is_degenerate(&self, alpha: &[Rational]) -> Result<bool, FlowError> {
        let pt = self.alpha_point(alpha);
        for p in &self.degenerate_locus {
            if !p.evaluate_exact(&pt)?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `rho_a(s)` as a polynomial matrix in the alphas and `s`.
    pub fn flow(&self) -> PolyMatrix {
        flow_of(self, Var::s())
    }
}

fn alpha_vars(theta: &PolyMatrix) -> Vec<Var> {
    let mut vars: Vec<Var> = theta
        .entries()
        .iter()
        .flat_map(|p| p.vars())
        .filter(|v| matches!(v, Var::Alpha(_)))
        .collect();
    vars.sort();
    vars.dedup();
    vars
}

/// Derivatives of `theta` in `t`, with the products `theta^(l) theta^-1`.
pub(crate) struct Derivatives {
    pub inverse: PolyMatrix,
    derivs: Vec<PolyMatrix>,
    products: Vec<Option<PolyMatrix>>,
}

impl Derivatives {
    pub fn new(theta: &PolyMatrix) -> Result<Self, FlowError> {
        let inverse = theta.inverse_sl()?;
        Ok(Self {
            inverse,
            derivs: vec![theta.clone()],
            products: vec![None],
        })
    }

    pub fn deriv(&mut self, l: u32) -> &PolyMatrix {
        let l = l as usize;
        while self.derivs.len() <= l {
            let next = self.derivs.last().expect("nonempty").differentiate(Var::T);
            self.derivs.push(next);
            self.products.push(None);
        }
        &self.derivs[l]
    }

    /// `theta^(l) theta^-1`.
    pub fn product(&mut self, l: u32) -> &PolyMatrix {
        self.deriv(l);
        let idx = l as usize;
        if self.products[idx].is_none() {
            let p = self.derivs[idx].multiply(&self.inverse).expect("same dimension");
            self.products[idx] = Some(p);
        }
        self.products[idx].as_ref().expect("just set")
    }
}

fn deg_over(d: Degree, l: u32) -> Option<Exponent> {
    d.finite().map(|e| e / i64::from(l))
}

fn critical_q(ders: &mut Derivatives, d: u32) -> Option<Exponent> {
    (1..=d)
        .filter_map(|l| deg_over(ders.product(l).degree_in(Var::T), l))
        .max()
}

fn ceil_nonneg(e: Exponent) -> u32 {
    if e <= Exponent::zero() {
        0
    } else {
        e.ceil().to_integer() as u32
    }
}

/// `deg_t` of `theta^(d+1)(a, t + xi) theta(a, t)^-1 t^{-q(d+1)}` with `xi`
/// formal. The binomial expansion is truncated where every dropped
/// `xi`-coefficient already has negative degree, so the sign test is exact.
fn stopping_degree(ders: &mut Derivatives, d: u32, q: Exponent) -> Degree {
    let scale = q * i64::from(d + 1);
    let inv_deg = ders.inverse.degree_in(Var::T);
    let next = ders.deriv(d + 1).clone();
    let Degree::Finite(e_max) = next.degree_in(Var::T) else {
        return Degree::NegInfinity;
    };
    let inv_deg = inv_deg.finite().expect("inverse of SL matrix is nonzero");
    let order = ceil_nonneg(e_max + inv_deg - scale) + 1;
    let shifted = next.map(|p| p.shift_t(Var::Xi, order));
    shifted
        .multiply(&ders.inverse)
        .expect("same dimension")
        .mul_t_power(-scale)
        .degree_in(Var::T)
}

/// Extracts `q`, `d`, `M_l`, `Y` from a rescaled trajectory `theta(a, t)`.
pub fn compute_flow(theta: &PolyMatrix) -> Result<FlowResult, FlowError> {
    if !theta.contains_var(Var::T) {
        return Err(FlowError::ConstantInT);
    }
    theta.check_exponents()?;
    let mut ders = Derivatives::new(theta)?;

    let mut d1 = None;
    for l in 1..=MAX_ORDER {
        if let Degree::Finite(e) = ders.deriv(l + 1).degree_in(Var::T) {
            if e < Exponent::zero() {
                d1 = Some(l);
                break;
            }
        }
    }
    let mut d = d1.ok_or(FlowError::NoFractionalExponent(MAX_ORDER))?;

    let mut stages = Vec::new();
    let q = loop {
        let q = critical_q(&mut ders, d).ok_or(FlowError::ConstantInT)?;
        let test = stopping_degree(&mut ders, d, q);
        stages.push(Stage {
            d,
            q,
            test_degree: test,
        });
        if test >= Degree::Finite(Exponent::zero()) {
            d += 1;
            if d > MAX_ORDER {
                return Err(FlowError::NoTermination(MAX_ORDER));
            }
        } else {
            break q;
        }
    };

    let mut limits = Vec::with_capacity(d as usize);
    for l in 1..=d {
        let scaled = ders.product(l).mul_t_power(-(q * i64::from(l)));
        let (lim, _) = scaled
            .limit_t_to_infinity()
            .map_err(|source| FlowError::Divergent { order: l, source })?;
        limits.push(lim);
    }
    let mut degenerate_locus: Vec<GenPoly> = Vec::new();
    for m in &limits {
        for p in m.entries() {
            if !p.is_zero() && !degenerate_locus.contains(p) {
                degenerate_locus.push(p.clone());
            }
        }
    }
    Ok(FlowResult {
        q,
        d,
        generator: limits[0].clone(),
        limits,
        degenerate_locus,
        alphas: alpha_vars(theta),
        stages,
    })
}

/// `Id + sum_l M_l s^l / l!`.
pub fn flow_of(result: &FlowResult, s: Var) -> PolyMatrix {
    let n = result.dim();
    let mut acc = PolyMatrix::identity(n);
    for (i, m) in result.limits.iter().enumerate() {
        let l = i as u32 + 1;
        let coeff = Poly::power_of(
            Rational::one() / factorial::<Rational>(l),
            s,
            Exponent::from_integer(i64::from(l)),
        )
        .expect("integer power");
        acc = acc.add(&m.scale_poly(&coeff)).expect("same dimension");
    }
    acc
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GroupLawReport {
    /// `rho(s1 + s2) = rho(s1) rho(s2)` as a polynomial identity.
    pub symbolic: bool,
    pub generator_is_m1: bool,
    /// `Y^N = 0` exactly.
    pub generator_nilpotent: bool,
    pub sampled: usize,
    /// Largest relative gap between `exp(sY(a))` and `rho_a(s)` at samples.
    pub max_exp_deviation: f64,
    pub failures: Vec<String>,
}

impl GroupLawReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn random_rational(rng: &mut ChaCha8Rng, lo: i64, hi: i64, den: i64) -> Rational {
    rational_from_i64s(rng.gen_range(lo * den..=hi * den), den)
}

/// Symbolic group law plus a sampled comparison of `exp(sY)` with `rho`.
pub fn group_law_check(result: &FlowResult, trials: usize) -> GroupLawReport {
    let mut report = GroupLawReport::default();
    let rho = flow_of(result, Var::S(0));
    let (s1, s2) = (Var::S(1), Var::S(2));
    let sum: BTreeMap<Var, GenPoly> = [(Var::S(0), &Poly::var(s1) + &Poly::var(s2))].into();
    let lhs = rho.substitute(&sum).expect("polynomial binding");
    let r1 = rho.substitute(&[(Var::S(0), Poly::var(s1))].into()).expect("rename");
    let r2 = rho.substitute(&[(Var::S(0), Poly::var(s2))].into()).expect("rename");
    report.symbolic = lhs == r1.multiply(&r2).expect("same dimension");
    if !report.symbolic {
        report.failures.push("rho(s1+s2) != rho(s1) rho(s2)".into());
    }
    report.generator_is_m1 = result.limits.first() == Some(&result.generator);
    if !report.generator_is_m1 {
        report.failures.push("Y != M_1".into());
    }
    report.generator_nilpotent = result.generator.pow(result.dim() as u32).is_zero();
    if !report.generator_nilpotent {
        report.failures.push("Y is not nilpotent".into());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x6c61_7773);
    for _ in 0..trials {
        let alpha: Vec<Rational> = result
            .alphas
            .iter()
            .map(|_| random_rational(&mut rng, 0, 1, 997))
            .collect();
        let s = random_rational(&mut rng, -2, 2, 64);
        let mut pt = result.alpha_point(&alpha);
        let y = match result.generator.evaluate_exact(&pt) {
            Ok(y) => y.to_f64(),
            Err(e) => {
                report.failures.push(format!("evaluating Y: {e}"));
                continue;
            }
        };
        pt.insert(Var::S(0), s.clone());
        let exact = rho.evaluate_exact(&pt).expect("all variables bound").to_f64();
        report.sampled += 1;
        match nilpotent_exp(&y, ratio_to_f64(&s)) {
            Ok(e) => {
                let dev = e.sub(&exact).max_abs() / exact.max_abs().max(1.0);
                report.max_exp_deviation = report.max_exp_deviation.max(dev);
                if dev > 1e-9 {
                    report
                        .failures
                        .push(format!("exp(sY) differs from rho by {dev:e} at a={}, s={s}", join(&alpha)));
                }
            }
            Err(e) => report.failures.push(format!("exp(sY): {e}")),
        }
    }
    report
}

fn join(v: &[Rational]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}
