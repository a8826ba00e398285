//! Symplectic capacities of convex polytopes.
//!
//! This crate computes EHZ capacities, volumes, and systolic ratios of convex
//! polytopes in `R^{2n}` by maximizing the quadratic form
//! `sum_{j<i} beta_i beta_j omega(n_i, n_j)` over ordered sequences of facet
//! normals subject to the closing and normalization constraints. On top of the
//! capacity solver it provides hyperplane cuts with additivity defects and
//! sweeps, combinatorial-cut search and verification, and reconstruction,
//! splitting, gluing, and edge classification of the polygonal closed
//! characteristics associated with maximizing sequences.
//!
//! Coordinates are ordered `(q_1..q_n, p_1..p_n)` throughout, with
//! `omega(e_{n+i}, e_i) = +1` and `J(q, p) = (p, -q)`.

pub use nalgebra;

pub mod bodies;
pub mod cuts;
pub mod exact;
pub mod faces;
pub mod json;
pub mod lp;
pub mod orbit;
pub mod polytope;
pub mod solver;
pub mod symplectic;

pub use cuts::{CombinatorialCut, CutPieces, CutSpec};
pub use orbit::ClosedOrbit;
pub use polytope::{HPolytope, VPolytope};
pub use solver::{CapacityResult, CapacitySequence, Engine, SolverConfig};
pub use symplectic::SymplecticSpace;

/// Errors shared across the geometry and solver layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("unbounded input: {0}")]
    Unbounded(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
