//! Chern-geometric quantities on model compact complex manifolds and
//! solvers for the constant Chern scalar curvature equation
//! `Δ^Ch f + S = λ·exp(2f/n)` within a Hermitian conformal class.

pub mod bifurcation;
pub mod chern;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod models;
pub mod solver;

pub use error::{Error, Result};
