use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use super::{BoxRegion, GoodError};
use crate::homspace::sample_rng;
use crate::par::{map_chunks, CHUNK};

/// Largest `|f|` over the `grid^k` node grid (corners included).
pub fn sup_norm<F>(f: &F, b: &BoxRegion, grid: usize) -> f64
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    assert!(grid >= 2, "sup_norm needs at least 2 nodes per axis");
    let n = grid.pow(b.dim() as u32);
    map_chunks(n, CHUNK, 0, |r| {
        let mut p = vec![0.0; b.dim()];
        r.map(|i| {
            b.node(grid, i, &mut p);
            f(&p).abs()
        })
        .fold(0.0, f64::max)
    })
    .into_iter()
    .fold(0.0, f64::max)
}

/// `|f|` sampled at the cell midpoints of a `grid^k` grid, sorted, so that
/// sublevel measures for many `delta` cost a binary search each.
#[derive(Clone, Debug)]
pub struct SublevelSampler {
    values: Vec<f64>,
    volume: f64,
    norm: f64,
    dim: usize,
    grid: usize,
}

impl SublevelSampler {
    pub fn new<F>(f: &F, b: &BoxRegion, grid: usize) -> Result<Self, GoodError>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let norm = sup_norm(f, b, grid.max(2) + 1);
        if norm == 0.0 || !norm.is_finite() {
            return Err(GoodError::ZeroNorm);
        }
        let n = grid.pow(b.dim() as u32);
        let mut values: Vec<f64> = map_chunks(n, CHUNK, 0, |r| {
            let mut p = vec![0.0; b.dim()];
            r.map(|i| {
                b.midpoint(grid, i, &mut p);
                f(&p).abs()
            })
            .collect::<Vec<_>>()
        })
        .into_iter()
        .flatten()
        .collect();
        values.sort_by(f64::total_cmp);
        Ok(Self {
            values,
            volume: b.volume(),
            norm,
            dim: b.dim(),
            grid,
        })
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Grid estimate of `|{x in B : |f(x)| < delta}|`.
    pub fn measure(&self, delta: f64) -> f64 {
        let below = self.values.partition_point(|&v| v < delta);
        below as f64 / self.values.len() as f64 * self.volume
    }

    /// Additive allowance for cells cut by the sublevel boundary.
    pub fn slack(&self) -> f64 {
        2.0 * self.dim as f64 / self.grid as f64 * self.volume
    }

    pub fn bound(&self, delta: f64, c: f64, alpha: f64) -> f64 {
        c * (delta / self.norm).powf(alpha) * self.volume
    }

    pub fn check(&self, delta: f64, c: f64, alpha: f64) -> GoodCheck {
        let lhs = self.measure(delta);
        let rhs = self.bound(delta, c, alpha);
        GoodCheck {
            holds: lhs <= rhs + self.slack(),
            lhs,
            rhs,
            slack: self.slack(),
        }
    }

    pub fn fit(&self, alpha: f64, deltas: &[f64]) -> f64 {
        deltas
            .iter()
            .map(|&d| self.measure(d) / self.bound(d, 1.0, alpha))
            .fold(0.0, f64::max)
    }

    /// A constant valid for every `delta` between the smallest and largest
    /// grid value, not just at the grid: the sublevel measure is monotone,
    /// so on `[d_i, d_{i+1}]` it is at most `m(d_{i+1})` while the bound is
    /// at least its value at `d_i`.
    pub fn fit_bracketed(&self, alpha: f64, deltas: &[f64]) -> f64 {
        let mut d = deltas.to_vec();
        d.sort_by(f64::total_cmp);
        let pairs = d
            .windows(2)
            .map(|w| self.measure(w[1]) / self.bound(w[0], 1.0, alpha));
        pairs.fold(self.fit(alpha, &d), f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodCheck {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

pub fn good_inequality_check<F>(
    f: &F,
    b: &BoxRegion,
    delta: f64,
    c: f64,
    alpha: f64,
    grid: usize,
) -> Result<GoodCheck, GoodError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if !(delta > 0.0) || !(c >= 1.0) {
        return Err(GoodError::Precondition(format!("need delta > 0 and C >= 1, got {delta}, {c}")));
    }
    Ok(SublevelSampler::new(f, b, grid)?.check(delta, c, alpha))
}

/// Smallest `C` for which the inequality holds at every `delta` of the grid.
pub fn fit_min_c<F>(f: &F, b: &BoxRegion, alpha: f64, deltas: &[f64], grid: usize) -> Result<f64, GoodError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if deltas.is_empty() {
        return Err(GoodError::Precondition("empty delta grid".into()));
    }
    Ok(SublevelSampler::new(f, b, grid)?.fit(alpha, deltas))
}

/// `(C, alpha)` fitted on one delta grid and validated on another.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodCertificate {
    pub c: f64,
    pub alpha: f64,
    pub delta_grid: Vec<f64>,
    pub checks: Vec<GoodCheck>,
}

impl GoodCertificate {
    pub fn holds(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

/// Fits `C` on `train` (never below 1, bracketed so that it covers the
/// whole training range) and checks the inequality on `test` with
/// `alpha = 1/(k l)`. Test values must lie inside the training range.
pub fn certify<F>(
    f: &F,
    b: &BoxRegion,
    degree: u32,
    train: &[f64],
    test: &[f64],
    grid: usize,
) -> Result<GoodCertificate, GoodError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if degree == 0 || train.is_empty() {
        return Err(GoodError::Precondition("degree and training grid must be nonempty".into()));
    }
    let lo = train.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = train.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if let Some(d) = test.iter().find(|&&d| d < lo || d > hi) {
        return Err(GoodError::Precondition(format!("test delta {d} is outside the training range")));
    }
    let alpha = 1.0 / (b.dim() as f64 * degree as f64);
    let s = SublevelSampler::new(f, b, grid)?;
    let c = s.fit_bracketed(alpha, train).max(1.0);
    Ok(GoodCertificate {
        c,
        alpha,
        delta_grid: test.to_vec(),
        checks: test.iter().map(|&d| s.check(d, c, alpha)).collect(),
    })
}

/// Result of [`sup_extension`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupExtension {
    pub r_prime: f64,
    pub sup_e: f64,
    pub verified: bool,
}

/// `R' = C^{1/alpha} R (|E|/|E'|)^{1/alpha}`, checked against `sup_E |P|`.
pub fn sup_extension<F>(
    p: &F,
    e: &BoxRegion,
    e_prime: &BoxRegion,
    r: f64,
    c: f64,
    alpha: f64,
    grid: usize,
) -> Result<SupExtension, GoodError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if !e.contains_box(e_prime) {
        return Err(GoodError::Precondition("E' is not inside E".into()));
    }
    let inner = sup_norm(p, e_prime, grid);
    if !(inner < r) {
        return Err(GoodError::Precondition(format!("sup over E' is {inner}, not below R = {r}")));
    }
    let r_prime = c.powf(1.0 / alpha) * r * (e.volume() / e_prime.volume()).powf(1.0 / alpha);
    let sup_e = sup_norm(p, e, grid);
    Ok(SupExtension {
        r_prime,
        sup_e,
        verified: sup_e < r_prime,
    })
}

/// Monte Carlo sublevel measure with a one-sided 99% Clopper–Pearson upper
/// bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub upper: f64,
    pub hits: u64,
    pub samples: u64,
}

pub fn mc_sublevel_measure<F>(f: &F, b: &BoxRegion, delta: f64, samples: u64, seed: u64) -> McEstimate
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = samples as usize;
    let hits: u64 = map_chunks(n, CHUNK, 0, |r| {
        let mut p = vec![0.0; b.dim()];
        let mut count = 0u64;
        for i in r {
            let mut rng = sample_rng(seed, i as u64);
            for (j, x) in p.iter_mut().enumerate() {
                *x = b.lower()[j] + rng.gen::<f64>() * b.width(j);
            }
            if f(&p).abs() < delta {
                count += 1;
            }
        }
        count
    })
    .into_iter()
    .sum();
    let upper_frac = if hits == samples {
        1.0
    } else {
        Beta::new(hits as f64 + 1.0, (samples - hits) as f64)
            .expect("beta parameters")
            .inverse_cdf(0.99)
    };
    McEstimate {
        estimate: hits as f64 / samples as f64 * b.volume(),
        upper: upper_frac * b.volume(),
        hits,
        samples,
    }
}

/// Monte Carlo variant: the slack is the Clopper–Pearson padding, and
/// `sup |f|` comes from a node grid.
pub fn good_inequality_check_mc<F>(
    f: &F,
    b: &BoxRegion,
    delta: f64,
    c: f64,
    alpha: f64,
    samples: u64,
    seed: u64,
    norm_grid: usize,
) -> Result<GoodCheck, GoodError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let norm = sup_norm(f, b, norm_grid);
    if norm == 0.0 {
        return Err(GoodError::ZeroNorm);
    }
    let est = mc_sublevel_measure(f, b, delta, samples, seed);
    let rhs = c * (delta / norm).powf(alpha) * b.volume();
    Ok(GoodCheck {
        holds: est.estimate <= rhs + (est.upper - est.estimate),
        lhs: est.estimate,
        rhs,
        slack: est.upper - est.estimate,
    })
}
