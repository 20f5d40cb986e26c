//! Basis reduction over any [`Scalar`]. Basis vectors are the columns.

use crate::linalg::dot;
use crate::scalar::Scalar;

fn norm2<S: Scalar>(v: &[S]) -> S {
    dot(v, v)
}

fn sub_multiple<S: Scalar>(a: &mut [S], mu: &S, b: &[S]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x = x.clone() - mu.clone() * y.clone();
    }
}

/// Lagrange–Gauss reduction of a rank-2 basis; on return `|b0| <= |b1|` and
/// `|<b0, b1>| <= |b0|^2 / 2`.
pub fn gauss_reduce<S: Scalar>(basis: &mut [Vec<S>]) {
    assert_eq!(basis.len(), 2);
    loop {
        if norm2(&basis[0]) > norm2(&basis[1]) {
            basis.swap(0, 1);
        }
        let n0 = norm2(&basis[0]);
        if n0.is_zero() {
            return;
        }
        let mu = dot(&basis[0], &basis[1]).round_div(&n0);
        if mu.is_zero() {
            return;
        }
        let (lo, hi) = basis.split_at_mut(1);
        sub_multiple(&mut hi[0], &mu, &lo[0]);
        if norm2(&hi[0]) >= n0 {
            return;
        }
    }
}

/// Pairwise size reduction, repeated until no pair shortens a vector, then
/// sorted by length. Norms strictly decrease, so this terminates.
pub fn sweep_reduce<S: Scalar>(basis: &mut [Vec<S>]) {
    let n = basis.len();
    let mut rounds = 0;
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let nj = norm2(&basis[j]);
                if nj.is_zero() {
                    continue;
                }
                let mu = dot(&basis[i], &basis[j]).round_div(&nj);
                if mu.is_zero() {
                    continue;
                }
                let mut cand = basis[i].clone();
                sub_multiple(&mut cand, &mu, &basis[j]);
                if norm2(&cand) < norm2(&basis[i]) {
                    basis[i] = cand;
                    changed = true;
                }
            }
        }
        rounds += 1;
        if !changed || rounds > 10_000 {
            break;
        }
    }
    basis.sort_by(|a, b| norm2(a).partial_cmp(&norm2(b)).unwrap_or(std::cmp::Ordering::Equal));
}

/// Gauss for rank 2, pairwise sweeps otherwise.
pub fn reduce<S: Scalar>(basis: &mut [Vec<S>]) {
    if basis.len() == 2 {
        gauss_reduce(basis);
    } else {
        sweep_reduce(basis);
    }
}
