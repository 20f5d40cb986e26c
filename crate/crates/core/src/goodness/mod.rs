//! Sublevel-set measure estimates for polynomials on boxes, the
//! sup-extension bound, greedy Besicovitch covers, and the relative-size
//! neighborhoods around a variety.

mod cover;
mod measure;
mod region;
mod relative;

use thiserror::Error;

use crate::polyalg::PolyError;

pub use cover::{besicovitch_select, besicovitch_select_with, default_nk, Cube, CubeCover};
pub use measure::{
    certify, fit_min_c, good_inequality_check, good_inequality_check_mc, mc_sublevel_measure, sup_extension,
    sup_norm, GoodCertificate, GoodCheck, McEstimate, SublevelSampler, SupExtension,
};
pub use region::BoxRegion;
pub use relative::{
    neighborhoods_with_alpha, relative_size_alpha, relative_size_check, relative_size_neighborhoods, Neighborhood,
    RelativeCheck, RelativeSize, Verdict,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GoodError {
    #[error("bad box: {0}")]
    BadBox(String),
    #[error("function vanishes on the box")]
    ZeroNorm,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}
