use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{CompiledMap, ExperimentError};
use crate::goodness::BoxRegion;
use crate::homspace::{sample_rng, HomError, TestFunction};
use crate::par::{map_chunks, CHUNK};

/// Above this excluded fraction an average is not reported.
pub const MAX_EXCLUDED: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Sampling {
    /// Cell midpoints of a `per_axis^k` tensor grid.
    Grid { per_axis: usize },
    /// Uniform points, point `i` drawn from the stream `(seed, i)`.
    MonteCarlo { samples: u64, seed: u64 },
}

impl Sampling {
    pub fn count(&self, k: usize) -> usize {
        match *self {
            Sampling::Grid { per_axis } => per_axis.pow(k as u32),
            Sampling::MonteCarlo { samples, .. } => samples as usize,
        }
    }

    fn point(&self, b: &BoxRegion, idx: usize, out: &mut [f64]) {
        match *self {
            Sampling::Grid { per_axis } => b.midpoint(per_axis, idx, out),
            Sampling::MonteCarlo { seed, .. } => {
                let mut rng = sample_rng(seed, idx as u64);
                for (j, x) in out.iter_mut().enumerate() {
                    *x = b.lower()[j] + rng.gen::<f64>() * b.width(j);
                }
            }
        }
    }
}

/// Averages of several observables over one region, with compactness
/// fractions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub averages: Vec<f64>,
    /// Fraction of samples with `lambda_1 >= eps0`, per `eps0`.
    pub fractions: Vec<f64>,
    pub samples: u64,
    pub excluded: u64,
    /// `excluded / samples` times the largest admissible value, per
    /// observable: what the exclusions can move each average by.
    pub exclusion_bound: Vec<f64>,
}

#[derive(Clone, Default)]
struct Partial {
    sums: Vec<f64>,
    maxima: Vec<f64>,
    compact: Vec<u64>,
    excluded: u64,
}

/// Evaluates every observable at every sample point of `region`. One
/// enumeration at the largest radius serves all observables. Excluded
/// samples count as compact only for `eps0 <= 0`.
pub fn observe(
    map: &CompiledMap,
    region: &BoxRegion,
    sampling: &Sampling,
    observables: &[TestFunction],
    eps0: &[f64],
    workers: usize,
) -> Result<Observation, ExperimentError> {
    if region.dim() != map.vars() {
        return Err(ExperimentError::Precondition(format!(
            "box has {} axes but the map has {} variables",
            region.dim(),
            map.vars()
        )));
    }
    if let Sampling::Grid { per_axis } = sampling {
        if *per_axis < 8 {
            return Err(ExperimentError::Precondition(format!("grid {per_axis} is below 8 per axis")));
        }
    }
    let n = sampling.count(region.dim());
    if n == 0 {
        return Err(ExperimentError::Precondition("no samples".into()));
    }
    let radius = observables.iter().map(|f| f.radius).fold(0.0, f64::max);
    let parts = map_chunks(n, CHUNK, workers, |range| -> Result<Partial, ExperimentError> {
        let mut p = Partial {
            sums: vec![0.0; observables.len()],
            maxima: vec![0.0; observables.len()],
            compact: vec![0; eps0.len()],
            excluded: 0,
        };
        let mut x = vec![0.0; region.dim()];
        let mut vals = vec![0.0; observables.len()];
        for idx in range {
            sampling.point(region, idx, &mut x);
            let lat = match map.lattice(&x) {
                Ok(l) => l,
                Err(HomError::Cusp(_) | HomError::Budget) => {
                    p.excluded += 1;
                    for (c, &e) in p.compact.iter_mut().zip(eps0) {
                        if e <= 0.0 {
                            *c += 1;
                        }
                    }
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            vals.iter_mut().for_each(|v| *v = 0.0);
            let counted = lat.enumerate(radius, |r2| {
                for (v, f) in vals.iter_mut().zip(observables) {
                    *v += f.profile(r2);
                }
            });
            if let Err(HomError::Budget) = counted {
                p.excluded += 1;
                for (c, &e) in p.compact.iter_mut().zip(eps0) {
                    if e <= 0.0 {
                        *c += 1;
                    }
                }
                continue;
            }
            counted?;
            for ((s, m), &v) in p.sums.iter_mut().zip(&mut p.maxima).zip(&vals) {
                *s += v;
                *m = m.max(v);
            }
            let l1 = lat.shortest_vector_length();
            for (c, &e) in p.compact.iter_mut().zip(eps0) {
                if l1 >= e {
                    *c += 1;
                }
            }
        }
        Ok(p)
    });
    let mut total = Partial {
        sums: vec![0.0; observables.len()],
        maxima: vec![0.0; observables.len()],
        compact: vec![0; eps0.len()],
        excluded: 0,
    };
    for part in parts {
        let part = part?;
        for i in 0..observables.len() {
            total.sums[i] += part.sums[i];
            total.maxima[i] = total.maxima[i].max(part.maxima[i]);
        }
        for (c, d) in total.compact.iter_mut().zip(&part.compact) {
            *c += d;
        }
        total.excluded += part.excluded;
    }
    let samples = n as u64;
    if total.excluded as f64 > MAX_EXCLUDED * samples as f64 {
        return Err(ExperimentError::CuspExcursions {
            excluded: total.excluded,
            samples,
        });
    }
    let kept = (samples - total.excluded) as f64;
    let frac = total.excluded as f64 / samples as f64;
    Ok(Observation {
        averages: total.sums.iter().map(|s| s / kept).collect(),
        fractions: total.compact.iter().map(|&c| c as f64 / samples as f64).collect(),
        samples,
        excluded: total.excluded,
        exclusion_bound: total.maxima.iter().map(|m| m * frac).collect(),
    })
}
