use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Float, FromPrimitive};

use super::poly::Poly;
use super::var::{Degree, Exponent, Var};
use super::PolyError;
use crate::linalg::Matrix;
use crate::scalar::Coefficient;

/// Square matrix of generalized polynomials.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyMat<C> {
    dim: usize,
    entries: Vec<Poly<C>>,
}

impl<C: Coefficient> PolyMat<C> {
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Poly<C>) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        Self { dim, entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_fn(dim, |_, _| Poly::zero())
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { Poly::one() } else { Poly::zero() })
    }

    pub fn from_rows(rows: Vec<Vec<Poly<C>>>) -> Result<Self, PolyError> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(PolyError::NotSquare);
        }
        Ok(Self {
            dim,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_constant(m: &Matrix<C>) -> Self {
        Self::from_fn(m.rows(), |i, j| Poly::constant(m[(i, j)].clone()))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly<C> {
        &self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[Poly<C>] {
        &self.entries
    }

    pub fn map(&self, f: impl Fn(&Poly<C>) -> Poly<C>) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn try_map(&self, f: impl Fn(&Poly<C>) -> Result<Poly<C>, PolyError>) -> Result<Self, PolyError> {
        Ok(Self {
            dim: self.dim,
            entries: self.entries.iter().map(f).collect::<Result<_, _>>()?,
        })
    }

    fn check_dim(&self, other: &Self) -> Result<(), PolyError> {
        if self.dim == other.dim {
            Ok(())
        } else {
            Err(PolyError::DimensionMismatch(self.dim, other.dim))
        }
    }

    pub fn multiply(&self, rhs: &Self) -> Result<Self, PolyError> {
        self.check_dim(rhs)?;
        let n = self.dim;
        Ok(Self::from_fn(n, |i, j| {
            let mut acc = Poly::zero();
            for k in 0..n {
                let a = self.get(i, k);
                let b = rhs.get(k, j);
                if !a.is_zero() && !b.is_zero() {
                    acc = &acc + &(a * b);
                }
            }
            acc
        }))
    }

    pub fn add(&self, rhs: &Self) -> Result<Self, PolyError> {
        self.check_dim(rhs)?;
        Ok(Self::from_fn(self.dim, |i, j| self.get(i, j) + rhs.get(i, j)))
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self, PolyError> {
        self.check_dim(rhs)?;
        Ok(Self::from_fn(self.dim, |i, j| self.get(i, j) - rhs.get(i, j)))
    }

    pub fn scale(&self, c: &C) -> Self {
        self.map(|p| p.scale(c))
    }

    pub fn scale_poly(&self, p: &Poly<C>) -> Self {
        self.map(|e| e * p)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::identity(self.dim);
        for _ in 0..n {
            acc = acc.multiply(self).expect("same dimension");
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Poly::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.dim)
    }

    /// Symbolic determinant by cofactor expansion.
    pub fn determinant(&self) -> Poly<C> {
        let idx: Vec<usize> = (0..self.dim).collect();
        self.minor_det(&idx, &idx)
    }

    fn minor_det(&self, rows: &[usize], cols: &[usize]) -> Poly<C> {
        match rows.len() {
            0 => Poly::one(),
            1 => self.get(rows[0], cols[0]).clone(),
            _ => {
                let r0 = rows[0];
                let rest = &rows[1..];
                let mut acc = Poly::zero();
                for (k, &c) in cols.iter().enumerate() {
                    let a = self.get(r0, c);
                    if a.is_zero() {
                        continue;
                    }
                    let sub: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
                    let term = a * &self.minor_det(rest, &sub);
                    acc = if k % 2 == 0 { &acc + &term } else { &acc - &term };
                }
                acc
            }
        }
    }

    /// Transposed cofactor matrix.
    pub fn adjugate(&self) -> Self {
        let n = self.dim;
        if n == 1 {
            return Self::identity(1);
        }
        Self::from_fn(n, |i, j| {
            let rows: Vec<usize> = (0..n).filter(|&r| r != j).collect();
            let cols: Vec<usize> = (0..n).filter(|&c| c != i).collect();
            let m = self.minor_det(&rows, &cols);
            if (i + j) % 2 == 0 {
                m
            } else {
                -m
            }
        })
    }

    /// Inverse of a matrix whose determinant is identically 1.
    pub fn inverse_sl(&self) -> Result<Self, PolyError> {
        let det = self.determinant();
        if det != Poly::one() {
            return Err(PolyError::NotSl(det.to_string()));
        }
        Ok(self.adjugate())
    }

    pub fn differentiate(&self, v: Var) -> Self {
        self.map(|p| p.differentiate(v))
    }

    /// `l`-th derivative.
    pub fn differentiate_n(&self, v: Var, l: u32) -> Self {
        let mut m = self.clone();
        for _ in 0..l {
            m = m.differentiate(v);
        }
        m
    }

    /// Maximum entry degree.
    pub fn degree_in(&self, v: Var) -> Degree {
        self.entries
            .iter()
            .map(|p| p.degree_in(v))
            .max()
            .unwrap_or(Degree::NegInfinity)
    }

    pub fn contains_var(&self, v: Var) -> bool {
        self.entries.iter().any(|p| p.contains_var(v))
    }

    pub fn mul_t_power(&self, e: Exponent) -> Self {
        self.map(|p| p.mul_t_power(e))
    }

    pub fn substitute(&self, bindings: &BTreeMap<Var, Poly<C>>) -> Result<Self, PolyError> {
        self.try_map(|p| p.substitute(bindings))
    }

    pub fn evaluate<F: Float + FromPrimitive + crate::scalar::Scalar>(
        &self,
        point: &BTreeMap<Var, F>,
    ) -> Result<Matrix<F>, PolyError> {
        let vals = self
            .entries
            .iter()
            .map(|p| p.evaluate(point))
            .collect::<Result<Vec<F>, _>>()?;
        Ok(Matrix::from_fn(self.dim, self.dim, |i, j| vals[i * self.dim + j]))
    }

    pub fn evaluate_exact(&self, point: &BTreeMap<Var, C>) -> Result<Matrix<C>, PolyError> {
        let vals = self
            .entries
            .iter()
            .map(|p| p.evaluate_exact(point))
            .collect::<Result<Vec<C>, _>>()?;
        Ok(Matrix::from_fn(self.dim, self.dim, |i, j| vals[i * self.dim + j].clone()))
    }

    /// Entrywise limit; returns the limit and the discarded remainder.
    pub fn limit_t_to_infinity(&self) -> Result<(Self, Self), PolyError> {
        let mut lim = Vec::with_capacity(self.entries.len());
        let mut rest = Vec::with_capacity(self.entries.len());
        for p in &self.entries {
            let l = p.limit_t_to_infinity()?;
            lim.push(l.limit);
            rest.push(l.discarded);
        }
        Ok((
            Self {
                dim: self.dim,
                entries: lim,
            },
            Self {
                dim: self.dim,
                entries: rest,
            },
        ))
    }

    pub fn check_exponents(&self) -> Result<(), PolyError> {
        self.entries.iter().try_for_each(Poly::check_exponents)
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j).to_string()).collect())
            .collect()
    }
}

impl<C: Coefficient> fmt::Display for PolyMat<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for i in 0..self.dim {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str("[")?;
            for j in 0..self.dim {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            f.write_str("]")?;
        }
        f.write_str("]")
    }
}

/// Parses a matrix from rows of entry strings.
pub fn parse_matrix<C: Coefficient, S: AsRef<str>>(rows: &[Vec<S>]) -> Result<PolyMat<C>, PolyError> {
    let parsed = rows
        .iter()
        .map(|r| r.iter().map(|s| super::parse_poly(s.as_ref())).collect())
        .collect::<Result<Vec<Vec<Poly<C>>>, _>>()?;
    PolyMat::from_rows(parsed)
}
