//! Numerical Hermitian geometry: Chern and torsion-twisted connections,
//! holonomy, invariant models and the Hermitian curvature flow.

pub mod chart;
pub mod error;
pub mod hcf;
pub mod linalg;
pub mod models;
pub mod poly;
pub mod sampling;
pub mod twisted;

pub use chart::*;
pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, C64};
pub use sampling::SamplerConfig;
