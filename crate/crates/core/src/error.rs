//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("basis dimension {dim} exceeds cap {cap}; refuse to enumerate")]
    DimensionOverflow { dim: u128, cap: u128 },

    #[error("mode index {mode} out of range for {num_modes} modes")]
    InvalidMode { mode: usize, num_modes: usize },

    #[error("total particle number N = {total_n} must be at least the basis cap n = {cap}")]
    TotalBelowCap { total_n: usize, cap: usize },

    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    #[error("matrix-function iteration did not reach tolerance {tol:e} within {max_iter} iterations (best residual {residual:e})")]
    NonConvergence {
        tol: f64,
        max_iter: usize,
        residual: f64,
    },

    #[error("eigensolver failed to converge")]
    EigenFailure,

    #[error("mode set is not closed under negation (missing partner of {mode:?})")]
    ModeSetNotSymmetric { mode: [i64; 3] },

    #[error("potential must be nonnegative; V({r}) = {value}")]
    NegativePotential { r: f64, value: f64 },

    #[error("radial mesh too coarse: {context}")]
    MeshTooCoarse { context: String },

    #[error("shooting bracket failure: no sign change of the Neumann mismatch in [0, {upper}]")]
    ShootingBracketFailure { upper: f64 },

    #[error("eigenvalue collision: shooting landed on a state with {nodes} interior nodes")]
    EigenvalueCollision { nodes: usize },

    #[error("input is not symmetric under particle exchange (max deviation {deviation:e})")]
    AsymmetricInput { deviation: f64 },

    #[error("kernel matrix must be symmetric (max asymmetry {deviation:e})")]
    AsymmetricKernel { deviation: f64 },

    #[error("trap potential is not finite at grid point {x}")]
    NonFiniteTrap { x: f64 },

    #[error("gradient flow failed to converge: residual {residual:e} after {iterations} iterations (tol {tol:e})")]
    FlowNonConvergence {
        residual: f64,
        iterations: usize,
        tol: f64,
    },

    #[error("mesh cannot resolve the high-pass cutoff: {context}")]
    FilterUnresolved { context: String },

    #[error("series truncation tail {tail:e} above requested tolerance {tol:e}; increase the truncation order")]
    SeriesTruncation { tail: f64, tol: f64 },

    #[error("{0}")]
    Invalid(String),
}
