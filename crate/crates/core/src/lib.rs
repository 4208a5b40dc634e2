//! Naturally reductive homogeneous spaces from Lie-algebra data: torsion,
//! canonical curvature, Jacobi operators and the relations they satisfy.

pub mod algebra;
pub mod catalog;
pub mod error;
pub mod jacobi;
pub mod liealg;
pub mod reductive;
pub mod sampling;
pub mod vcp;

pub use error::{Error, Result};
