use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{observe, scales, CompiledMap, ExperimentError, Sampling};
use crate::catalog::CatalogMap;
use crate::flowlimit::{twodim_flow, TwoDimExpansion};
use crate::goodness::BoxRegion;
use crate::homspace::{haar_expectation, TestFunction};
use crate::polyalg::Exponent;
use crate::scalar::ratio_to_f64;
use crate::PolyMatrix;

/// Midpoints used for the one-period reference integral.
pub const PERIOD_POINTS: usize = 1 << 18;
/// Stretch of the first side of the two-variable boxes, keeping
/// `T1 > T2^b` strict under rounding.
pub const BOX_MARGIN: f64 = 1.01;

/// What the averages should converge to.
#[derive(Clone, Debug, PartialEq)]
pub enum Reference {
    /// `int_{R^N} f`, the Haar average of the Siegel transform.
    Haar,
    /// Average over one period of a closed orbit `s -> orbit(s) Z^N`.
    Periodic { orbit: PolyMatrix, period: f64 },
}

impl Reference {
    /// Periodic for maps flagged as having a closed limiting orbit.
    pub fn for_map(map: &CatalogMap) -> Self {
        match (&map.orbit, &map.period) {
            (Some(orbit), Some(p)) if map.entry.closed_orbit => Reference::Periodic {
                orbit: orbit.clone(),
                period: ratio_to_f64(p),
            },
            _ => Reference::Haar,
        }
    }

    pub fn values(&self, n: usize, fs: &[TestFunction], workers: usize) -> Result<Vec<f64>, ExperimentError> {
        match self {
            Reference::Haar => Ok(fs.iter().map(|f| haar_expectation(f, n)).collect()),
            Reference::Periodic { orbit, period } => {
                let map = CompiledMap::new(orbit, 1)?;
                let b = BoxRegion::new(vec![0.0], vec![*period])?;
                let grid = Sampling::Grid {
                    per_axis: PERIOD_POINTS,
                };
                Ok(observe(&map, &b, &grid, fs, &[], workers)?.averages)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub sampling: Sampling,
    pub eps0: Vec<f64>,
    pub workers: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub t: f64,
    pub observable: String,
    pub average: f64,
    pub reference: f64,
    /// `|average - reference| / |reference|`.
    pub gap: f64,
    pub fractions: Vec<f64>,
    pub samples: u64,
    pub excluded: u64,
    pub exclusion_bound: f64,
    pub seed: u64,
}

/// `twodim_residual` at a point of a compliant box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualSample {
    pub t: f64,
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub eps0: Vec<f64>,
    pub rows: Vec<ExperimentRow>,
    pub diagnostics: Vec<ResidualSample>,
}

pub(crate) fn num(x: f64) -> String {
    format!("{x:.16e}")
}

impl ExperimentResult {
    pub fn rows_for(&self, observable: &str) -> Vec<&ExperimentRow> {
        self.rows.iter().filter(|r| r.observable == observable).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("T,observable,average,reference,gap");
        for e in &self.eps0 {
            let _ = write!(out, ",nondivergence@{e}");
        }
        out.push_str(",samples,excluded,exclusion_bound,seed\n");
        for r in &self.rows {
            let _ = write!(
                out,
                "{},{},{},{},{}",
                num(r.t),
                r.observable,
                num(r.average),
                num(r.reference),
                num(r.gap)
            );
            for f in &r.fractions {
                let _ = write!(out, ",{}", num(*f));
            }
            let _ = writeln!(out, ",{},{},{},{}", r.samples, r.excluded, num(r.exclusion_bound), r.seed);
        }
        out
    }

    /// `(T, gap)` pairs per observable.
    pub fn plot_csv(&self) -> String {
        let mut out = String::from("observable,T,gap\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{}", r.observable, num(r.t), num(r.gap));
        }
        out
    }

    pub fn diagnostics_csv(&self) -> String {
        let mut out = String::from("T,s,x,y,residual\n");
        for d in &self.diagnostics {
            let _ = writeln!(out, "{},{},{},{},{}", num(d.t), num(d.s), num(d.x), num(d.y), num(d.residual));
        }
        out
    }
}

fn check_increasing(ts: &[f64]) -> Result<(), ExperimentError> {
    if ts.is_empty() || ts.windows(2).any(|w| !(w[0] < w[1])) || !(ts[0] > 0.0) {
        return Err(ExperimentError::Precondition(format!("T list {ts:?} must be positive and increasing")));
    }
    Ok(())
}

fn rows_for_box(
    map: &CompiledMap,
    region: &BoxRegion,
    t: f64,
    fs: &[TestFunction],
    refs: &[f64],
    opts: &SweepOptions,
) -> Result<Vec<ExperimentRow>, ExperimentError> {
    let obs = observe(map, region, &opts.sampling, fs, &opts.eps0, opts.workers)?;
    Ok(fs
        .iter()
        .enumerate()
        .map(|(i, f)| ExperimentRow {
            t,
            observable: f.to_string(),
            average: obs.averages[i],
            reference: refs[i],
            gap: (obs.averages[i] - refs[i]).abs() / refs[i].abs(),
            fractions: obs.fractions.clone(),
            samples: obs.samples,
            excluded: obs.excluded,
            exclusion_bound: obs.exclusion_bound[i],
            seed: opts.seed,
        })
        .collect())
}

/// Averages over `B^J` for each `T`, against `reference`.
pub fn convergence_sweep(
    theta: &PolyMatrix,
    lambda: &[Exponent],
    ts: &[f64],
    fs: &[TestFunction],
    j: &BoxRegion,
    reference: &Reference,
    opts: &SweepOptions,
) -> Result<ExperimentResult, ExperimentError> {
    check_increasing(ts)?;
    if j.dim() != lambda.len() || !BoxRegion::unit(j.dim()).contains_box(j) {
        return Err(ExperimentError::Precondition(format!("subbox {j:?} is not inside the unit cube")));
    }
    let map = CompiledMap::new(theta, lambda.len())?;
    let refs = reference.values(theta.dim(), fs, opts.workers)?;
    let mut rows = Vec::new();
    for &t in ts {
        rows.extend(rows_for_box(&map, &j.scaled(&scales(lambda, t)), t, fs, &refs, opts)?);
    }
    Ok(ExperimentResult {
        eps0: opts.eps0.clone(),
        rows,
        diagnostics: Vec::new(),
    })
}

/// Boxes `[0, 1.01 T2^b] x [0, T2]`; rows are keyed by `T2`. When the map
/// has a two-variable flow limit, the residual at the far corner
/// `(T2^b, T2)` is recorded for `s = +-1`.
pub fn twodim_bcondition_sweep(
    theta: &PolyMatrix,
    b: Exponent,
    t2s: &[f64],
    fs: &[TestFunction],
    reference: &Reference,
    opts: &SweepOptions,
) -> Result<ExperimentResult, ExperimentError> {
    check_increasing(t2s)?;
    let map = CompiledMap::new(theta, 2)?;
    let refs = reference.values(theta.dim(), fs, opts.workers)?;
    let expansion = twodim_flow(theta)
        .ok()
        .and_then(|r| TwoDimExpansion::new(theta, &r).ok());
    let bf = *b.numer() as f64 / *b.denom() as f64;
    let mut rows = Vec::new();
    let mut diagnostics = Vec::new();
    for &t2 in t2s {
        let x = t2.powf(bf);
        let region = BoxRegion::new(vec![0.0, 0.0], vec![BOX_MARGIN * x, t2])?;
        rows.extend(rows_for_box(&map, &region, t2, fs, &refs, opts)?);
        if let Some(e) = &expansion {
            for s in [1.0, -1.0] {
                if let Ok(residual) = e.residual(s, x, t2) {
                    diagnostics.push(ResidualSample {
                        t: t2,
                        s,
                        x,
                        y: t2,
                        residual,
                    });
                }
            }
        }
    }
    Ok(ExperimentResult {
        eps0: opts.eps0.clone(),
        rows,
        diagnostics,
    })
}
