use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;

use super::reduce::reduce;
use super::HomError;
use crate::linalg::Matrix;
use crate::scalar::{ratio_to_f64, Scalar};
use crate::Rational;

/// Below this the enumeration would visit too many vectors.
pub const CUSP_GUARD: f64 = 1e-6;
const DET_TOL: f64 = 1e-9;
/// Enumeration budget.
const MAX_VISITS: u64 = 10_000_000;

/// A point `g SL(N, Z)` of the space of unimodular lattices.
#[derive(Clone, Debug, PartialEq)]
pub struct UnimodularLattice {
    g: Matrix<f64>,
    /// Reduced basis, one vector per row, sorted by length.
    reduced: Vec<Vec<f64>>,
    shortest: f64,
}

fn columns<S: Scalar>(g: &Matrix<S>) -> Vec<Vec<S>> {
    (0..g.cols()).map(|j| g.column(j)).collect()
}

impl UnimodularLattice {
    /// Reduces in floating point. Accurate while the entries of `g` stay
    /// moderate; use [`Self::from_exact`] for large entries.
    pub fn from_matrix(g: Matrix<f64>) -> Result<Self, HomError> {
        Self::from_matrix_with_tolerance(g, DET_TOL)
    }

    /// As [`Self::from_matrix`] with a caller-chosen determinant tolerance,
    /// for matrices known to be unimodular exactly whose floating
    /// determinant suffers cancellation.
    pub fn from_matrix_with_tolerance(g: Matrix<f64>, tol: f64) -> Result<Self, HomError> {
        let det = g.determinant();
        if !g.is_square() || (det - 1.0).abs() > tol {
            return Err(HomError::Determinant(det));
        }
        let mut basis = columns(&g);
        reduce(&mut basis);
        Self::finish(g, basis)
    }

    /// Reduces exactly: `g` is cleared of denominators, reduced over the
    /// integers, and only the reduced basis is rounded to `f64`.
    pub fn from_exact(g: &Matrix<Rational>) -> Result<Self, HomError> {
        let n = g.rows();
        let den = g
            .as_slice()
            .iter()
            .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let a: Matrix<BigInt> = Matrix::from_fn(n, n, |i, j| {
            let x = &g[(i, j)];
            x.numer() * (&den / x.denom())
        });
        Self::from_scaled_integers(&a, &den)
    }

    /// The lattice spanned by the columns of `a / den`, with `a` integral.
    pub fn from_scaled_integers(a: &Matrix<BigInt>, den: &BigInt) -> Result<Self, HomError> {
        let n = a.rows();
        let det = a.determinant();
        let target = num_traits::pow(den.clone(), n);
        if det != target {
            return Err(HomError::Determinant(ratio_to_f64(&Rational::new(det, target))));
        }
        let mut basis = columns(a);
        reduce(&mut basis);
        let reduced = basis
            .iter()
            .map(|v| {
                v.iter()
                    .map(|x| ratio_to_f64(&Rational::new_raw(x.clone(), den.clone())))
                    .collect()
            })
            .collect();
        let g = a.map(|x| ratio_to_f64(&Rational::new_raw(x.clone(), den.clone())));
        Self::finish(g, reduced)
    }

    fn finish(g: Matrix<f64>, reduced: Vec<Vec<f64>>) -> Result<Self, HomError> {
        let first = crate::linalg::norm(&reduced[0]);
        if first < CUSP_GUARD {
            return Err(HomError::Cusp(first));
        }
        let mut lat = Self {
            g,
            reduced,
            shortest: first,
        };
        // Certify: nothing shorter than the first reduced vector.
        let mut best = first * first;
        lat.enumerate(first, |r2| best = best.min(r2))?;
        lat.shortest = best.sqrt();
        Ok(lat)
    }

    pub fn dim(&self) -> usize {
        self.g.rows()
    }

    pub fn matrix(&self) -> &Matrix<f64> {
        &self.g
    }

    pub fn reduced_basis(&self) -> &[Vec<f64>] {
        &self.reduced
    }

    /// `lambda_1`.
    pub fn shortest_vector_length(&self) -> f64 {
        self.shortest
    }

    /// Calls `visit(|v|^2)` for every nonzero lattice vector with
    /// `|v| <= radius` (both `v` and `-v`).
    pub fn enumerate(&self, radius: f64, mut visit: impl FnMut(f64)) -> Result<(), HomError> {
        let n = self.reduced.len();
        // Gram–Schmidt: b_i = sum_{j<=i} mu_ij b*_j, processed from the last vector.
        let mut star: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut mu = vec![vec![0.0; n]; n];
        let mut bstar2 = vec![0.0; n];
        for i in 0..n {
            let mut v = self.reduced[i].clone();
            for j in 0..i {
                mu[i][j] = crate::linalg::dot(&self.reduced[i], &star[j]) / bstar2[j];
                for (a, b) in v.iter_mut().zip(&star[j]) {
                    *a -= mu[i][j] * b;
                }
            }
            bstar2[i] = crate::linalg::dot(&v, &v);
            star.push(v);
        }
        let r2 = radius * radius;
        // Prune with a little slack; the exact test uses the vector itself.
        let ctx = EnumCtx {
            basis: &self.reduced,
            mu: &mu,
            bstar2: &bstar2,
            prune: r2 * (1.0 + 1e-9),
            r2,
        };
        let mut z = vec![0i64; n];
        let mut visits = 0u64;
        enum_level(&ctx, n - 1, 0.0, &mut z, &mut visits, &mut visit)
    }

    pub fn in_compact(&self, eps0: f64) -> bool {
        self.shortest >= eps0
    }
}

struct EnumCtx<'a> {
    basis: &'a [Vec<f64>],
    mu: &'a [Vec<f64>],
    bstar2: &'a [f64],
    prune: f64,
    r2: f64,
}

fn enum_level(
    ctx: &EnumCtx<'_>,
    level: usize,
    partial: f64,
    z: &mut [i64],
    visits: &mut u64,
    visit: &mut impl FnMut(f64),
) -> Result<(), HomError> {
    let n = z.len();
    let center: f64 = -(level + 1..n).map(|j| ctx.mu[j][level] * z[j] as f64).sum::<f64>();
    let rem = ctx.prune - partial;
    if rem < 0.0 {
        return Ok(());
    }
    let w = (rem / ctx.bstar2[level]).sqrt();
    let lo = (center - w).ceil() as i64;
    let hi = (center + w).floor() as i64;
    for zl in lo..=hi {
        let dz = zl as f64 - center;
        let p = partial + dz * dz * ctx.bstar2[level];
        if p > ctx.prune {
            continue;
        }
        z[level] = zl;
        if level == 0 {
            if z.iter().all(|&c| c == 0) {
                continue;
            }
            *visits += 1;
            if *visits > MAX_VISITS {
                return Err(HomError::Budget);
            }
            let mut r2 = 0.0;
            for i in 0..ctx.basis[0].len() {
                let c: f64 = (0..n).map(|j| z[j] as f64 * ctx.basis[j][i]).sum();
                r2 += c * c;
            }
            if r2 <= ctx.r2 {
                visit(r2);
            }
        } else {
            enum_level(ctx, level - 1, p, z, visits, visit)?;
        }
    }
    z[level] = 0;
    Ok(())
}

/// Reduction of an exact matrix with a cheap floating path when the entries
/// are small enough for `f64` to be safe.
pub fn lattice_from_rational(g: &Matrix<Rational>, float_bound: f64) -> Result<UnimodularLattice, HomError> {
    let gf = g.to_f64();
    if gf.max_abs() <= float_bound {
        UnimodularLattice::from_matrix(gf)
    } else {
        UnimodularLattice::from_exact(g)
    }
}
