//! Singular simplices, integer chains, faces, subdivision, cones and prisms.
//!
//! The standard simplex `Δ_d` has coordinates `(a_1, …, a_d)` with
//! `a_i ≥ 0` and `Σ a_i ≤ 1`; vertex 0 is the origin and vertex `i` is
//! `e_i`. Face `i` is the face opposite vertex `i`, and the boundary is the
//! alternating sum `∂σ = Σ (−1)^i σ ∘ F_i`. With these conventions the cone
//! satisfies `∂(ĥσ) = σ − ĥ(∂σ)` for `d ≥ 1`, and `∂(ĥp) = p − [0]` for a
//! point `p`.

mod chain;
mod embedding;
mod prism;
mod simplex;

use thiserror::Error;

use crate::expr::{EvalError, ParseError};

pub use chain::Chain;
pub(crate) use chain::sample_grid;
pub use embedding::{face_map, std_vertex, subdivision_cells, Embedding};
pub use prism::{prism_q, prism_q_inverse, Prism};
pub use simplex::{AffineMap, PointKey, SimplexKind, SingularSimplex};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ChainError {
    #[error("face index {index} out of range for dimension {dim}")]
    FaceIndex { dim: usize, index: usize },
    #[error("expected a {expected}-simplex, found a {found}-simplex")]
    Degree { expected: usize, found: usize },
    #[error("a 0-chain has no boundary")]
    BoundaryOfPoint,
    #[error("{0}")]
    Shape(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Map(#[from] MapError),
}

/// Failure to evaluate a simplex or its Jacobian.
#[derive(Clone, Debug, PartialEq, Error)]
pub enum MapError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("expected a point with {expected} coordinates, found {found}")]
    Arity { expected: usize, found: usize },
    #[error("non-finite Jacobian for {0}")]
    NonFinite(String),
    #[error("cannot invert chart: {0}")]
    Inverse(String),
}
