//! Least-squares decompositions of an estimated source into target,
//! interference and artifact components, and the energy ratios built on
//! them.

mod decompose;
mod projection;
mod ratios;

pub use decompose::{decompose_bsseval, decompose_si, BssEvalParams, Decomposition, DecompositionMode};
pub use projection::{solve_normal_equations, solve_projection, Cholesky, DelayedBasis, SymMatrix};
pub use ratios::{raw_ratios, ratios, BssRatios, RATIO_LIMIT_DB};
