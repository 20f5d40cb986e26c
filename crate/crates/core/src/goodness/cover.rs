use serde::{Deserialize, Serialize};

use super::GoodError;

/// Closed cube `{x : |x - center|_inf <= half_width}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    pub center: Vec<f64>,
    pub half_width: f64,
    /// Position in the input list.
    pub index: usize,
}

impl Cube {
    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter().enumerate().all(|(a, x)| self.covers(a, *x))
    }

    /// Faces are computed one way only, so a face coordinate always tests
    /// as inside.
    fn covers(&self, axis: usize, x: f64) -> bool {
        self.lower(axis) <= x && x <= self.upper(axis)
    }

    fn lower(&self, axis: usize) -> f64 {
        self.center[axis] - self.half_width
    }

    fn upper(&self, axis: usize) -> f64 {
        self.center[axis] + self.half_width
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeCover {
    pub cubes: Vec<Cube>,
    /// Largest number of selected cubes through one point, found exactly.
    pub multiplicity: usize,
    /// `histogram[m]` = probe-grid points lying in exactly `m` cubes.
    pub histogram: Vec<usize>,
    pub covered: bool,
    pub nk: usize,
}

impl CubeCover {
    pub fn within_bound(&self) -> bool {
        self.multiplicity <= self.nk
    }
}

pub fn default_nk(k: usize) -> usize {
    (1 << k) + 1
}

/// Greedy selection by decreasing half-width (ties by input order); a cube
/// is admitted only if its center is not already covered.
pub fn besicovitch_select(centers: &[Vec<f64>], halfwidths: &[f64]) -> Result<CubeCover, GoodError> {
    let k = centers.first().map_or(0, Vec::len);
    besicovitch_select_with(centers, halfwidths, default_nk(k), 32)
}

pub fn besicovitch_select_with(
    centers: &[Vec<f64>],
    halfwidths: &[f64],
    nk: usize,
    probe: usize,
) -> Result<CubeCover, GoodError> {
    if centers.is_empty() || centers.len() != halfwidths.len() {
        return Err(GoodError::Precondition("need one half-width per center".into()));
    }
    let k = centers[0].len();
    if k == 0 || centers.iter().any(|c| c.len() != k) || halfwidths.iter().any(|h| !(*h > 0.0)) {
        return Err(GoodError::Precondition("centers must share a dimension and widths be positive".into()));
    }
    let mut order: Vec<usize> = (0..centers.len()).collect();
    order.sort_by(|&a, &b| halfwidths[b].total_cmp(&halfwidths[a]));
    let mut cubes: Vec<Cube> = Vec::new();
    for i in order {
        if !cubes.iter().any(|c| c.contains(&centers[i])) {
            cubes.push(Cube {
                center: centers[i].clone(),
                half_width: halfwidths[i],
                index: i,
            });
        }
    }
    let covered = centers.iter().all(|p| cubes.iter().any(|c| c.contains(p)));
    let all: Vec<usize> = (0..cubes.len()).collect();
    let mut point = vec![0.0; k];
    let multiplicity = max_overlap(&cubes, &all, 0, &mut point);
    let histogram = probe_histogram(&cubes, probe.max(2));
    Ok(CubeCover {
        cubes,
        multiplicity,
        histogram,
        covered,
        nk,
    })
}

/// The deepest point of a family of closed boxes can be taken with every
/// coordinate equal to some box's lower face, so it suffices to try those,
/// narrowing the family one axis at a time.
fn max_overlap(cubes: &[Cube], active: &[usize], axis: usize, point: &mut [f64]) -> usize {
    if axis == point.len() {
        return active.iter().filter(|&&i| cubes[i].contains(point)).count();
    }
    let mut cands: Vec<f64> = active.iter().map(|&i| cubes[i].lower(axis)).collect();
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    let mut best = 0;
    for x in cands {
        let next: Vec<usize> = active
            .iter()
            .copied()
            .filter(|&i| cubes[i].covers(axis, x))
            .collect();
        if next.len() <= best {
            continue;
        }
        point[axis] = x;
        best = best.max(max_overlap(cubes, &next, axis + 1, point));
    }
    best
}

fn probe_histogram(cubes: &[Cube], grid: usize) -> Vec<usize> {
    let k = cubes[0].center.len();
    let lo: Vec<f64> = (0..k)
        .map(|a| cubes.iter().map(|c| c.lower(a)).fold(f64::INFINITY, f64::min))
        .collect();
    let hi: Vec<f64> = (0..k)
        .map(|a| cubes.iter().map(|c| c.upper(a)).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let mut hist = vec![0usize; cubes.len() + 1];
    let mut p = vec![0.0; k];
    for idx in 0..grid.pow(k as u32) {
        let mut rest = idx;
        for a in (0..k).rev() {
            let c = rest % grid;
            rest /= grid;
            p[a] = lo[a] + (hi[a] - lo[a]) * c as f64 / (grid - 1) as f64;
        }
        hist[cubes.iter().filter(|c| c.contains(&p)).count()] += 1;
    }
    while hist.len() > 1 && hist[hist.len() - 1] == 0 {
        hist.pop();
    }
    hist
}
