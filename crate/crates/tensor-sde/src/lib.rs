//! Schwinger-Dyson machinery for a rank-3 complex tensor field with pillow
//! interactions: boundary-graph combinatorics, scaling exponents, large-N
//! solvers and an exact perturbative verifier.

pub mod colored_graph;
pub mod error;
pub mod grid;
pub mod perturbation;
pub mod scaling;
pub mod sde_core;
pub mod series;

pub use error::{Error, Result};
