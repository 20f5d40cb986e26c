use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{HomError, UnimodularLattice};
use crate::linalg::Matrix;

/// Per-sample generator: stream `index` of the master seed, so sample `i`
/// is the same however the work is partitioned.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One Haar-random point of `SL(2,R)/SL(2,Z)`.
///
/// `z = x + iy` is drawn from the standard fundamental domain with density
/// proportional to `y^-2`: the `x`-marginal is `1/sqrt(1 - x^2)` on
/// `[-1/2, 1/2]`, i.e. `x = sin(theta)` with `theta` uniform on
/// `[-pi/6, pi/6]`, and given `x`, `y = sqrt(1 - x^2) / U`. With
/// `h = n(x) a(y) k(phi)` the coset `Gamma h` is Haar distributed, so the
/// lattice is `h^-1 Z^2`.
pub fn haar_matrix(rng: &mut impl Rng) -> Matrix<f64> {
    let theta: f64 = rng.gen_range(-PI / 6.0..PI / 6.0);
    let x = theta.sin();
    let u: f64 = 1.0 - rng.gen::<f64>();
    let y = (1.0 - x * x).sqrt() / u;
    let phi: f64 = rng.gen_range(0.0..PI);
    let (s, c) = phi.sin_cos();
    let sy = y.sqrt();
    // h = [[1, x], [0, 1]] [[sy, 0], [0, 1/sy]] [[c, -s], [s, c]]
    let h = Matrix::from_rows(vec![
        vec![sy * c + x / sy * s, -sy * s + x / sy * c],
        vec![s / sy, c / sy],
    ]);
    // Inverse of an SL(2) matrix.
    Matrix::from_rows(vec![vec![h[(1, 1)], -h[(0, 1)]], vec![-h[(1, 0)], h[(0, 0)]]])
}

/// `n` i.i.d. Haar lattices; sample `i` uses [`sample_rng`]`(seed, i)`.
pub fn haar_sample(n: usize, seed: u64) -> Result<Vec<UnimodularLattice>, HomError> {
    (0..n)
        .map(|i| UnimodularLattice::from_matrix(haar_matrix(&mut sample_rng(seed, i as u64))))
        .collect()
}
