use serde::{Deserialize, Serialize};

use super::{BoxRegion, GoodError};
use crate::polyalg::{Degree, DensePoly, Var};
use crate::{GenPoly, PolyMatrix};

/// `{v : |v| < radius, |P(v)| < bound}`, with `P` in the variables
/// `x, y, x3, ...` standing for the coordinates of `v`.
#[derive(Clone, Debug, PartialEq)]
pub struct Neighborhood {
    pub radius: f64,
    pub bound: f64,
    p: DensePoly<f64>,
}

impl Neighborhood {
    pub fn new(p: &GenPoly, dim: usize, radius: f64, bound: f64) -> Result<Self, GoodError> {
        Ok(Self {
            radius,
            bound,
            p: DensePoly::new(p, &coordinate_vars(dim))?,
        })
    }

    pub fn contains(&self, v: &[f64]) -> bool {
        crate::linalg::norm(v) < self.radius && self.p.eval(v).abs() < self.bound
    }

    /// Same `P`, smaller radius and bound.
    pub fn is_inside(&self, other: &Neighborhood) -> bool {
        self.p == other.p && self.radius <= other.radius && self.bound <= other.bound
    }
}

fn coordinate_vars(n: usize) -> Vec<Var> {
    (0..n as u8).map(Var::X).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelativeSize {
    pub delta: f64,
    pub d_radius: f64,
    pub alpha: f64,
    pub phi: Neighborhood,
    pub psi: Neighborhood,
}

/// `alpha = 1/(2 m l k)` for the composition of a degree-`m` variety
/// polynomial with a degree-`l` map in `k` variables.
pub fn relative_size_alpha(m: u32, l: u32, k: u32) -> f64 {
    1.0 / (2.0 * m as f64 * l as f64 * k as f64)
}

/// `delta = (eps / (c N_k))^{1/alpha}`, `D = r/sqrt(delta)`,
/// `Phi = {|v| < (r+beta)/sqrt(delta), |P| < beta}`,
/// `Psi = {|v| < r+beta, |P| < beta delta}`.
#[allow(clippy::too_many_arguments)]
pub fn neighborhoods_with_alpha(
    p: &GenPoly,
    dim: usize,
    r: f64,
    eps: f64,
    alpha: f64,
    c: f64,
    nk: usize,
    beta: f64,
) -> Result<RelativeSize, GoodError> {
    if !(eps > 0.0 && eps < 1.0) || !(r > 0.0) || !(c > 0.0) || !(beta > 0.0) || nk == 0 {
        return Err(GoodError::Precondition(format!(
            "need 0 < eps < 1 and positive r, c, beta, N_k (eps={eps}, r={r}, c={c}, beta={beta}, N_k={nk})"
        )));
    }
    let delta = (eps / (c * nk as f64)).powf(1.0 / alpha);
    let sd = delta.sqrt();
    Ok(RelativeSize {
        delta,
        d_radius: r / sd,
        alpha,
        phi: Neighborhood::new(p, dim, (r + beta) / sd, beta)?,
        psi: Neighborhood::new(p, dim, r + beta, beta * delta)?,
    })
}

/// As [`neighborhoods_with_alpha`], with `alpha` from the degrees of `P`
/// (`m`) and of the map (`l`).
#[allow(clippy::too_many_arguments)]
pub fn relative_size_neighborhoods(
    p: &GenPoly,
    dim: usize,
    r: f64,
    eps: f64,
    k: u32,
    l: u32,
    c: f64,
    nk: usize,
    beta: f64,
) -> Result<RelativeSize, GoodError> {
    let m = match p.total_degree() {
        Degree::Finite(d) if d.is_integer() && *d.numer() > 0 => *d.numer() as u32,
        _ => return Err(GoodError::Precondition("variety polynomial must have positive degree".into())),
    };
    neighborhoods_with_alpha(p, dim, r, eps, relative_size_alpha(m, l, k), c, nk, beta)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Holds,
    Fails,
    /// No grid point leaves `Phi`, so there is nothing to test.
    Vacuous,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelativeCheck {
    pub verdict: Verdict,
    pub lhs: f64,
    pub rhs: f64,
}

/// Grid measures of `{x in B : Theta(x) v0 in Psi}` and
/// `eps |{x in B : Theta(x) v0 in Phi}|`.
pub fn relative_size_check(
    theta: &PolyMatrix,
    v0: &[f64],
    b: &BoxRegion,
    psi: &Neighborhood,
    phi: &Neighborhood,
    eps: f64,
    grid: usize,
) -> Result<RelativeCheck, GoodError> {
    let n = theta.dim();
    if v0.len() != n {
        return Err(GoodError::Precondition(format!("v0 has length {}, expected {n}", v0.len())));
    }
    if !psi.is_inside(phi) {
        return Err(GoodError::Precondition("Psi is not inside Phi".into()));
    }
    let vars = coordinate_vars(b.dim());
    let entries = theta
        .entries()
        .iter()
        .map(|e| DensePoly::new(e, &vars))
        .collect::<Result<Vec<_>, _>>()?;
    let counts = crate::par::map_chunks(grid.pow(b.dim() as u32), crate::par::CHUNK, 0, |r| {
        let mut x = vec![0.0; b.dim()];
        let mut v = vec![0.0; n];
        let (mut in_psi, mut in_phi, mut outside) = (0u64, 0u64, 0u64);
        for idx in r {
            b.midpoint(grid, idx, &mut x);
            for (i, vi) in v.iter_mut().enumerate() {
                *vi = (0..n).map(|j| entries[i * n + j].eval(&x) * v0[j]).sum();
            }
            if psi.contains(&v) {
                in_psi += 1;
            }
            if phi.contains(&v) {
                in_phi += 1;
            } else {
                outside += 1;
            }
        }
        (in_psi, in_phi, outside)
    });
    let (in_psi, in_phi, outside) = counts
        .into_iter()
        .fold((0, 0, 0), |a, c| (a.0 + c.0, a.1 + c.1, a.2 + c.2));
    let cell = b.volume() / grid.pow(b.dim() as u32) as f64;
    let lhs = in_psi as f64 * cell;
    let rhs = eps * in_phi as f64 * cell;
    let verdict = if outside == 0 {
        Verdict::Vacuous
    } else if lhs <= rhs {
        Verdict::Holds
    } else {
        Verdict::Fails
    };
    Ok(RelativeCheck { verdict, lhs, rhs })
}
