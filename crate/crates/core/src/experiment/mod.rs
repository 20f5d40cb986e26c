//! Birkhoff averages of Siegel-transform observables along polynomial
//! trajectories on expanding boxes, and their gaps to the limit.

mod compiled;
mod sample;
mod sweep;

use thiserror::Error;

use crate::flowlimit::FlowError;
use crate::goodness::{BoxRegion, GoodError};
use crate::homspace::{HomError, TestFunction};
use crate::polyalg::{Exponent, PolyError};
use crate::PolyMatrix;

pub use compiled::{CompiledMap, FLOAT_BOUND, SNAP_BITS};
pub use sample::{observe, Observation, Sampling, MAX_EXCLUDED};
pub use sweep::{
    convergence_sweep, twodim_bcondition_sweep, ExperimentResult, ExperimentRow, Reference, ResidualSample,
    SweepOptions, BOX_MARGIN, PERIOD_POINTS,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("{0}")]
    Precondition(String),
    #[error("{excluded} of {samples} samples tripped the cusp guard")]
    CuspExcursions { excluded: u64, samples: u64 },
    #[error(transparent)]
    Hom(#[from] HomError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Good(#[from] GoodError),
}

/// `B^J = {(a_1 T^{lambda_1}, ..., a_k T^{lambda_k}) : a in J}` sampled on a
/// `grid^k` midpoint grid.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxSpec {
    pub lambda: Vec<Exponent>,
    pub t: f64,
    pub j: BoxRegion,
    pub grid: usize,
}

impl BoxSpec {
    pub fn new(lambda: Vec<Exponent>, t: f64, grid: usize) -> Self {
        let k = lambda.len();
        Self {
            lambda,
            t,
            j: BoxRegion::unit(k),
            grid,
        }
    }

    pub fn with_subbox(mut self, j: BoxRegion) -> Result<Self, ExperimentError> {
        if j.dim() != self.lambda.len() || !BoxRegion::unit(j.dim()).contains_box(&j) {
            return Err(ExperimentError::Precondition(format!("subbox {j:?} is not inside the unit cube")));
        }
        self.j = j;
        Ok(self)
    }

    pub fn scales(&self) -> Vec<f64> {
        scales(&self.lambda, self.t)
    }

    pub fn realized(&self) -> BoxRegion {
        self.j.scaled(&self.scales())
    }
}

fn scales(lambda: &[Exponent], t: f64) -> Vec<f64> {
    lambda
        .iter()
        .map(|l| t.powf(*l.numer() as f64 / *l.denom() as f64))
        .collect()
}

fn compile(theta: &PolyMatrix, k: usize) -> Result<CompiledMap, ExperimentError> {
    Ok(CompiledMap::new(theta, k)?)
}

/// `(1/|B|) int_B f(Theta(x) Z^N) dx` over the realized box.
pub fn birkhoff_average(theta: &PolyMatrix, spec: &BoxSpec, f: &TestFunction, workers: usize) -> Result<f64, ExperimentError> {
    let map = compile(theta, spec.lambda.len())?;
    let obs = observe(&map, &spec.realized(), &Sampling::Grid { per_axis: spec.grid }, &[*f], &[], workers)?;
    Ok(obs.averages[0])
}

/// `(1/|J|) int_J f(theta(a, T)) da` with `theta(a, T) = Theta(a_i T^{lambda_i})`.
pub fn subbox_average(
    theta: &PolyMatrix,
    lambda: &[Exponent],
    t: f64,
    j: &BoxRegion,
    grid: usize,
    f: &TestFunction,
    workers: usize,
) -> Result<f64, ExperimentError> {
    let spec = BoxSpec::new(lambda.to_vec(), t, grid).with_subbox(j.clone())?;
    birkhoff_average(theta, &spec, f, workers)
}

/// Fraction of grid samples whose shortest vector is at least `eps0`.
pub fn nondivergence_fraction(
    theta: &PolyMatrix,
    spec: &BoxSpec,
    eps0: &[f64],
    workers: usize,
) -> Result<Vec<f64>, ExperimentError> {
    let map = compile(theta, spec.lambda.len())?;
    let obs = observe(&map, &spec.realized(), &Sampling::Grid { per_axis: spec.grid }, &[], eps0, workers)?;
    Ok(obs.fractions)
}
