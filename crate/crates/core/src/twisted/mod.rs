//! The torsion-twisted connection `∇^T = ∇ - T`, its curvature, transport,
//! holonomy and Killing fields.

pub mod bracket;
pub mod curvature;
pub mod holonomy;
pub mod killing;
pub mod transport;

pub use bracket::{bracket_structure, BracketStructure};
pub use curvature::{tt_coefficients, tt_curvature, TtCurvature, TtResiduals};
pub use holonomy::{
    curvature_operators, fixed_subspace, fixed_subspace_with, holonomy_json, random_loops, sample_holonomy,
    FixedSubspace, HolonomySample, LoopFamily,
};
pub use killing::{killing_residual, nt_parallel_residual, perturbed_fields, KillingResidual};
pub use transport::{parallel_transport, transport_matrix, PathSpec, TransportOptions, TransportResult};
