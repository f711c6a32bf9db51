//! Hermitian curvature flow: invariant reductions and variation checks.

pub mod flow;
pub mod variation;

pub use crate::chart::pack::hcf_velocity;
pub use flow::{chart_cross_check, flow_invariant, parallel_persistence_check, FlowTrajectory, PersistenceReport};
pub use variation::{hcf_velocity_jet, lemma_rhs, variation_check, HSource, VariationReport};
