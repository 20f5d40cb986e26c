use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::homspace::{HomError, UnimodularLattice};
use crate::linalg::Matrix;
use crate::polyalg::{DensePoly, PolyError, Var};
use crate::PolyMatrix;

/// Sample coordinates are snapped to multiples of `2^-SNAP_BITS`, so the
/// exact path sees the same point as the floating one.
pub const SNAP_BITS: u32 = 20;
/// Above this entry size the lattice is reduced in exact arithmetic.
pub const FLOAT_BOUND: f64 = (1u64 << 20) as f64;

struct ExactTerm {
    coef: BigInt,
    exps: Vec<u32>,
    shift: u32,
}

/// A polynomial map `R^k -> SL(N, R)` prepared for repeated evaluation.
pub struct CompiledMap {
    n: usize,
    k: usize,
    float: Vec<DensePoly<f64>>,
    exact: Vec<Vec<ExactTerm>>,
    den: BigInt,
}

impl CompiledMap {
    pub fn new(theta: &PolyMatrix, k: usize) -> Result<Self, PolyError> {
        let vars: Vec<Var> = (0..k as u8).map(Var::X).collect();
        let float = theta
            .entries()
            .iter()
            .map(|e| DensePoly::new(e, &vars))
            .collect::<Result<Vec<_>, _>>()?;
        let mut lcm = BigInt::one();
        let mut max_deg = 0u32;
        for e in theta.entries() {
            for (m, c) in e.terms() {
                lcm = lcm.lcm(c.denom());
                max_deg = max_deg.max(*m.total_degree().numer() as u32);
            }
        }
        let exact = theta
            .entries()
            .iter()
            .map(|e| {
                e.terms()
                    .map(|(m, c)| {
                        let mut exps = vec![0u32; k];
                        for &(v, p) in m.factors() {
                            let i = vars.iter().position(|w| *w == v).expect("checked by DensePoly");
                            exps[i] = *p.numer() as u32;
                        }
                        let deg: u32 = exps.iter().sum();
                        ExactTerm {
                            coef: c.numer() * (&lcm / c.denom()),
                            exps,
                            shift: SNAP_BITS * (max_deg - deg),
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            n: theta.dim(),
            k,
            float,
            exact,
            den: lcm << (SNAP_BITS * max_deg) as usize,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn vars(&self) -> usize {
        self.k
    }

    /// Rounds `x` onto the snapping grid.
    pub fn snap(x: f64) -> f64 {
        let s = (1u64 << SNAP_BITS) as f64;
        (x * s).round() / s
    }

    pub fn matrix_at(&self, x: &[f64]) -> Matrix<f64> {
        let snapped: Vec<f64> = x.iter().map(|&v| Self::snap(v)).collect();
        Matrix::from_fn(self.n, self.n, |i, j| self.float[i * self.n + j].eval(&snapped))
    }

    /// The lattice `Theta(x) Z^N`.
    pub fn lattice(&self, x: &[f64]) -> Result<UnimodularLattice, HomError> {
        let g = self.matrix_at(x);
        let big = g.max_abs();
        if big <= FLOAT_BOUND {
            let tol = 1e-9 * big.max(1.0).powi(self.n as i32);
            return UnimodularLattice::from_matrix_with_tolerance(g, tol);
        }
        let scale = (1u64 << SNAP_BITS) as f64;
        let xs: Vec<BigInt> = x.iter().map(|&v| BigInt::from((v * scale).round() as i64)).collect();
        let a = Matrix::from_fn(self.n, self.n, |i, j| {
            let mut acc = BigInt::zero();
            for t in &self.exact[i * self.n + j] {
                let mut v = t.coef.clone();
                for (xi, &e) in xs.iter().zip(&t.exps) {
                    if e > 0 {
                        v *= num_traits::pow(xi.clone(), e as usize);
                    }
                }
                acc += v << t.shift as usize;
            }
            acc
        });
        UnimodularLattice::from_scaled_integers(&a, &self.den)
    }
}
