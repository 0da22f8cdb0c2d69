//! Optimization kernels: simplex LP, exact polytope vertex enumeration,
//! convex-hull membership and a block-diagonal SDP solver.

use thiserror::Error;

pub mod hull;
pub mod lp;
pub mod polytope;
pub mod sdp;

pub use hull::{hull_membership, HullVerdict};
pub use lp::{simplex_maximize, Constraint, LinearProgram, LpSolution, Relation, LP_TOL};
pub use polytope::{enumerate_model_vertices, ModelVertex, ProbabilisticModel, MAX_POLYTOPE_VERTICES};
pub use sdp::{sdp_maximize, BlockSdp, Entry, SdpOptions, SdpSolution, SemidefiniteProgram, SDP_TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptError {
    #[error("problem is infeasible")]
    Infeasible,
    #[error("problem is unbounded")]
    Unbounded,
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("no generators supplied")]
    NoGenerators,
    #[error("size {actual} exceeds limit {limit}")]
    TooLarge { actual: usize, limit: usize },
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error(
        "no convergence after {iterations} iterations \
         (primal residual {primal_residual:.3e}, dual residual {dual_residual:.3e}, gap {gap:.3e})"
    )]
    NotConverged { iterations: usize, primal_residual: f64, dual_residual: f64, gap: f64 },
    #[error("model does not satisfy hyperedge {edge} normalization (sum {sum})")]
    NotNormalized { edge: usize, sum: f64 },
    #[error("model value {value} at vertex {vertex} is outside [0, 1]")]
    OutOfRange { vertex: usize, value: f64 },
}
