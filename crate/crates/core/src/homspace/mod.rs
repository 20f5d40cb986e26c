//! The space of unimodular lattices `SL(N,R)/SL(N,Z)` for `N = 2, 3`.

mod haar;
mod lattice;
mod observable;
pub mod reduce;

use thiserror::Error;

pub use haar::{haar_matrix, haar_sample, sample_rng};
pub use lattice::{lattice_from_rational, UnimodularLattice, CUSP_GUARD};
pub use observable::{haar_expectation, siegel_transform, Kind, TestFunction};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HomError {
    #[error("determinant {0} is not 1")]
    Determinant(f64),
    #[error("shortest vector {0:e} is below the cusp guard")]
    Cusp(f64),
    #[error("enumeration budget exceeded")]
    Budget,
    #[error("unknown observable `{0}` (expected siegel:indicator:R or siegel:bump:R)")]
    Observable(String),
}

/// Reduces `g` (floating path).
pub fn reduce_basis(g: crate::linalg::Matrix<f64>) -> Result<UnimodularLattice, HomError> {
    UnimodularLattice::from_matrix(g)
}

pub fn shortest_vector_length(lattice: &UnimodularLattice) -> f64 {
    lattice.shortest_vector_length()
}

pub fn in_compact(lattice: &UnimodularLattice, eps0: f64) -> bool {
    lattice.in_compact(eps0)
}
