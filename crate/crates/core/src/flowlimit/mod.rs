//! Limiting unipotent flows of rescaled polynomial trajectories.
//!
//! For a one-box rescaling `theta(a, t) = Theta(a_1 t^l_1, ..., a_k t^l_k)` the
//! shifted orbit `theta(a, t + s t^-q) theta(a, t)^-1` converges to a unipotent
//! one-parameter subgroup `rho_a(s)` ([`compute_flow`]). For maps of two
//! variables growing at different rates, [`twodim_flow`] extracts the analogous
//! data along `x -> x + s y^-d x^-q`.

mod local;
mod nilexp;
mod residual;
mod twodim;

use thiserror::Error;

use crate::polyalg::{Exponent, PolyError};

pub use local::{
    compute_flow, flow_of, group_law_check, normalize_exponents, normalize_for_map, rescale,
    FlowResult, GroupLawReport, Stage,
};
pub use nilexp::nilpotent_exp;
pub use residual::{limit_residual, limit_residual_direct, FlowExpansion};
pub use twodim::{twodim_flow, twodim_residual, TwoDimExpansion, TwoDimFlowResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("map is not the identity at the origin")]
    NotIdentityAtOrigin,
    #[error("map already depends on t")]
    AlreadyRescaled,
    #[error("exponent vector has {got} entries, map has {want} variables")]
    LambdaLength { got: usize, want: usize },
    #[error("exponents must be positive, got {0}")]
    NonPositiveLambda(Exponent),
    #[error("trajectory is constant in t")]
    ConstantInT,
    #[error("no derivative of finite negative degree up to order {0}; all t-exponents integral?")]
    NoFractionalExponent(u32),
    #[error("order iteration did not stop below {0}")]
    NoTermination(u32),
    #[error("limit diverges at order {order}: {source}")]
    Divergent { order: u32, source: PolyError },
    #[error("map has degree 0 in x")]
    DegreeZero,
    #[error("leading matrix lambda_0 vanishes")]
    ZeroLeading,
    #[error("matrix is not nilpotent (max |Y^N| = {0:e})")]
    NotNilpotent(f64),
}
