use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{Float, FromPrimitive, Zero};

use super::var::{Degree, Exponent, Var};
use super::PolyError;
use crate::scalar::{float_from_f64, Coefficient};

/// Product of variable powers, sorted by variable, zero exponents dropped.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<(Var, Exponent)>);

impl Monomial {
    pub fn one() -> Self {
        Self(Vec::new())
    }

    pub fn var(v: Var) -> Self {
        Self(vec![(v, Exponent::from_integer(1))])
    }

    pub fn power(v: Var, e: Exponent) -> Self {
        if e.is_zero() {
            Self::one()
        } else {
            Self(vec![(v, e)])
        }
    }

    /// Builds from arbitrary `(var, exponent)` pairs, merging repeats.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, Exponent)>) -> Self {
        let mut map: BTreeMap<Var, Exponent> = BTreeMap::new();
        for (v, e) in pairs {
            *map.entry(v).or_insert_with(Exponent::zero) += e;
        }
        Self(map.into_iter().filter(|(_, e)| !e.is_zero()).collect())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Var, Exponent)] {
        &self.0
    }

    pub fn exponent_of(&self, v: Var) -> Exponent {
        self.0
            .iter()
            .find(|(w, _)| *w == v)
            .map_or_else(Exponent::zero, |(_, e)| *e)
    }

    pub fn without(&self, v: Var) -> Self {
        Self(self.0.iter().filter(|(w, _)| *w != v).cloned().collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            let (va, ea) = self.0[i];
            let (vb, eb) = other.0[j];
            match va.cmp(&vb) {
                std::cmp::Ordering::Less => {
                    out.push((va, ea));
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push((vb, eb));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let e = ea + eb;
                    if !e.is_zero() {
                        out.push((va, e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Self(out)
    }

    fn with_exponent(&self, v: Var, e: Exponent) -> Self {
        self.without(v).mul(&Self::power(v, e))
    }

    /// Total degree over the non-`t` variables (all integer exponents).
    pub fn total_degree(&self) -> Exponent {
        self.0.iter().map(|(_, e)| *e).sum()
    }

    fn check(&self) -> Result<(), PolyError> {
        for &(v, e) in &self.0 {
            if v != Var::T && (!e.is_integer() || e < Exponent::zero()) {
                return Err(PolyError::BadExponent { var: v, exp: e });
            }
        }
        Ok(())
    }
}

/// Part of a polynomial that survives `t -> infinity`, plus what was dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct Limit<C> {
    pub limit: Poly<C>,
    pub discarded: Poly<C>,
}

/// Generalized polynomial: finite sum of `c * m` with `m` a [`Monomial`].
///
/// The term map is the canonical form: no zero coefficient is ever stored, so
/// two values are equal exactly when their term maps are.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly<C> {
    terms: BTreeMap<Monomial, C>,
}

impl<C: Coefficient> Default for Poly<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Coefficient> Poly<C> {
    pub fn zero() -> Self {
        Self {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn constant(c: C) -> Self {
        Self::term(c, Monomial::one())
    }

    pub fn var(v: Var) -> Self {
        Self::term(C::one(), Monomial::var(v))
    }

    pub fn term(c: C, m: Monomial) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    /// `c * v^e`, validated against the exponent rules.
    pub fn power_of(c: C, v: Var, e: Exponent) -> Result<Self, PolyError> {
        let m = Monomial::power(v, e);
        m.check()?;
        Ok(Self::term(c, m))
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, C)>) -> Self {
        let mut p = Self::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                let sum = slot.get().clone() + c;
                if sum.is_zero() {
                    slot.remove();
                } else {
                    *slot.get_mut() = sum;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    /// Value of a constant polynomial.
    pub fn constant_value(&self) -> Option<C> {
        if self.is_zero() {
            Some(C::zero())
        } else if self.is_constant() {
            self.terms.values().next().cloned()
        } else {
            None
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms
            .keys()
            .flat_map(|m| m.factors().iter().map(|(v, _)| *v))
            .collect()
    }

    pub fn contains_var(&self, v: Var) -> bool {
        self.terms
            .keys()
            .any(|m| m.factors().iter().any(|(w, _)| *w == v))
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.clone(), k.clone() * c.clone()))
                .collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.mul(m), c.clone()))
                .collect(),
        }
    }

    /// Multiplies by `t^e`.
    pub fn mul_t_power(&self, e: Exponent) -> Self {
        self.mul_monomial(&Monomial::power(Var::T, e))
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Term-by-term power rule `c x^e -> c e x^(e-1)`.
    pub fn differentiate(&self, v: Var) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let e = m.exponent_of(v);
            if e.is_zero() {
                continue;
            }
            out.add_term(m.with_exponent(v, e - 1), c.clone() * C::from_ratio(&e));
        }
        out
    }

    /// Highest exponent of `v`; terms free of `v` count as exponent 0.
    pub fn degree_in(&self, v: Var) -> Degree {
        self.terms
            .keys()
            .map(|m| Degree::Finite(m.exponent_of(v)))
            .max()
            .unwrap_or(Degree::NegInfinity)
    }

    /// Highest total degree of a term.
    pub fn total_degree(&self) -> Degree {
        self.terms
            .keys()
            .map(|m| Degree::Finite(m.total_degree()))
            .max()
            .unwrap_or(Degree::NegInfinity)
    }

    /// Groups terms by the exponent of `v`; each value is free of `v`.
    pub fn collect_by(&self, v: Var) -> BTreeMap<Exponent, Self> {
        let mut out: BTreeMap<Exponent, Self> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(m.exponent_of(v))
                .or_insert_with(Self::zero)
                .add_term(m.without(v), c.clone());
        }
        out
    }

    /// The coefficient of `v^e`, as a polynomial free of `v`.
    pub fn coefficient_of(&self, v: Var, e: Exponent) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            if m.exponent_of(v) == e {
                out.add_term(m.without(v), c.clone());
            }
        }
        out
    }

    /// Renames `from` to `to`, keeping exponents. No validation.
    pub(crate) fn rename(&self, from: Var, to: Var) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, c)| {
            let e = m.exponent_of(from);
            (m.without(from).mul(&Monomial::power(to, e)), c.clone())
        }))
    }

    /// Checks that only `t` carries non-integer or negative exponents.
    pub fn check_exponents(&self) -> Result<(), PolyError> {
        self.terms.keys().try_for_each(Monomial::check)
    }

    /// Composition `p(v <- bindings[v])`; unbound variables are kept.
    ///
    /// A variable raised to a fractional or negative power can only receive a
    /// single-term binding with coefficient 1 (negative integer powers allow any
    /// nonzero coefficient).
    pub fn substitute(&self, bindings: &BTreeMap<Var, Poly<C>>) -> Result<Self, PolyError> {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut acc = Self::constant(c.clone());
            for &(v, e) in m.factors() {
                let factor = match bindings.get(&v) {
                    None => Self::term(C::one(), Monomial::power(v, e)),
                    Some(b) => power_of_binding(b, v, e)?,
                };
                acc = &acc * &factor;
                if acc.is_zero() {
                    break;
                }
            }
            out = &out + &acc;
        }
        out.check_exponents()?;
        Ok(out)
    }

    fn t_exponents_need_positive_t(&self) -> bool {
        self.terms.keys().any(|m| {
            let e = m.exponent_of(Var::T);
            !e.is_integer() || e < Exponent::zero()
        })
    }

    /// Floating evaluation. Terms are accumulated in canonical term order.
    pub fn evaluate<F: Float + FromPrimitive>(&self, point: &BTreeMap<Var, F>) -> Result<F, PolyError> {
        if self.t_exponents_need_positive_t() {
            match point.get(&Var::T) {
                Some(t) if *t > F::zero() => {}
                Some(t) => return Err(PolyError::NonPositiveT(t.to_f64().unwrap_or(f64::NAN))),
                None => return Err(PolyError::Unbound(Var::T)),
            }
        }
        let mut acc = F::zero();
        for (m, c) in &self.terms {
            let mut v: F = float_from_f64(c.to_f64());
            for &(var, e) in m.factors() {
                let x = *point.get(&var).ok_or(PolyError::Unbound(var))?;
                v = v * pow_float(x, e, var)?;
            }
            acc = acc + v;
        }
        Ok(acc)
    }

    /// Exact evaluation at a point of the coefficient field. All exponents of
    /// bound variables must be integers.
    pub fn evaluate_exact(&self, point: &BTreeMap<Var, C>) -> Result<C, PolyError> {
        let mut acc = C::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for &(var, e) in m.factors() {
                let x = point.get(&var).ok_or(PolyError::Unbound(var))?;
                if !e.is_integer() {
                    return Err(PolyError::NonIntegerExponent { var, exp: e });
                }
                let n = *e.numer();
                if n < 0 && x.is_zero() {
                    return Err(PolyError::Pole(var));
                }
                let mut p = C::one();
                for _ in 0..n.unsigned_abs() {
                    p = p * x.clone();
                }
                v = if n < 0 { v / p } else { v * p };
            }
            acc = acc + v;
        }
        Ok(acc)
    }

    /// Partial exact evaluation: binds some variables to constants.
    pub fn bind_exact(&self, point: &BTreeMap<Var, C>) -> Result<Self, PolyError> {
        let bindings = point
            .iter()
            .map(|(v, c)| (*v, Self::constant(c.clone())))
            .collect();
        self.substitute(&bindings)
    }

    /// `lim_{t -> inf}` of a polynomial with `deg_t <= 0`: the `t`-free part.
    pub fn limit_t_to_infinity(&self) -> Result<Limit<C>, PolyError> {
        if let Degree::Finite(d) = self.degree_in(Var::T) {
            if d > Exponent::zero() {
                return Err(PolyError::Divergent(d));
            }
        }
        let mut limit = Self::zero();
        let mut discarded = Self::zero();
        for (m, c) in &self.terms {
            if m.exponent_of(Var::T).is_zero() {
                limit.add_term(m.clone(), c.clone());
            } else {
                discarded.add_term(m.clone(), c.clone());
            }
        }
        Ok(Limit { limit, discarded })
    }

    /// `p(t + xi)` expanded by the generalized binomial theorem, truncated
    /// after `xi^order`. Exact whenever every `t` exponent is a nonnegative
    /// integer no larger than `order`.
    pub fn shift_t(&self, xi: Var, order: u32) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let e = m.exponent_of(Var::T);
            let rest = m.without(Var::T);
            let mut binom = Exponent::from_integer(1);
            for j in 0..=order {
                if binom.is_zero() {
                    break;
                }
                let j_exp = Exponent::from_integer(i64::from(j));
                let mono = rest
                    .mul(&Monomial::power(Var::T, e - j_exp))
                    .mul(&Monomial::power(xi, j_exp));
                out.add_term(mono, c.clone() * C::from_ratio(&binom));
                binom = binom * (e - j_exp) / (j_exp + 1);
            }
        }
        out
    }

    pub fn map_coefficients<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> Poly<D> {
        Poly::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }
}

fn pow_float<F: Float + FromPrimitive>(x: F, e: Exponent, var: Var) -> Result<F, PolyError> {
    if e.is_integer() {
        let n = *e.numer();
        if n < 0 && x == F::zero() {
            return Err(PolyError::Pole(var));
        }
        Ok(x.powi(n as i32))
    } else {
        let ef: F = float_from_f64(*e.numer() as f64 / *e.denom() as f64);
        Ok(x.powf(ef))
    }
}

fn power_of_binding<C: Coefficient>(b: &Poly<C>, v: Var, e: Exponent) -> Result<Poly<C>, PolyError> {
    if e.is_integer() && e >= Exponent::zero() {
        return Ok(b.pow(*e.numer() as u32));
    }
    // Fractional or negative power: single term only.
    if b.len() != 1 {
        return Err(PolyError::FractionalPower(v));
    }
    let (m, c) = b.terms().next().expect("one term");
    let coeff = if e.is_integer() {
        let n = e.numer().unsigned_abs();
        let mut p = C::one();
        for _ in 0..n {
            p = p * c.clone();
        }
        C::one() / p
    } else if c.is_one() {
        C::one()
    } else {
        return Err(PolyError::FractionalPower(v));
    };
    let mono = Monomial::from_pairs(m.factors().iter().map(|&(w, f)| (w, f * e)));
    Ok(Poly::term(coeff, mono))
}

impl<'a, C: Coefficient> Add<&'a Poly<C>> for &'a Poly<C> {
    type Output = Poly<C>;

    fn add(self, rhs: &'a Poly<C>) -> Poly<C> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<'a, C: Coefficient> Sub<&'a Poly<C>> for &'a Poly<C> {
    type Output = Poly<C>;

    fn sub(self, rhs: &'a Poly<C>) -> Poly<C> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl<'a, C: Coefficient> Mul<&'a Poly<C>> for &'a Poly<C> {
    type Output = Poly<C>;

    fn mul(self, rhs: &'a Poly<C>) -> Poly<C> {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<C: Coefficient> Neg for &Poly<C> {
    type Output = Poly<C>;

    fn neg(self) -> Poly<C> {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }
}

impl<C: Coefficient> Add for Poly<C> {
    type Output = Poly<C>;

    fn add(self, rhs: Poly<C>) -> Poly<C> {
        &self + &rhs
    }
}

impl<C: Coefficient> Sub for Poly<C> {
    type Output = Poly<C>;

    fn sub(self, rhs: Poly<C>) -> Poly<C> {
        &self - &rhs
    }
}

impl<C: Coefficient> Mul for Poly<C> {
    type Output = Poly<C>;

    fn mul(self, rhs: Poly<C>) -> Poly<C> {
        &self * &rhs
    }
}

impl<C: Coefficient> Neg for Poly<C> {
    type Output = Poly<C>;

    fn neg(self) -> Poly<C> {
        -&self
    }
}

/// Sign helper for printing.
pub(crate) fn is_negative<C: Coefficient>(c: &C) -> bool {
    c.is_negative()
}
