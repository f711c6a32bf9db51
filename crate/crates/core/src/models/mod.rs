//! Lie-algebraic models, submersion metrics and the model registry.

pub mod algebra;
pub mod frame;
pub mod lie_chart;
pub mod registry;
pub mod submersion;

pub use algebra::{LieAlgebraData, SubalgebraData};
pub use frame::{frame_fixed_subspace, frame_geometry, frame_velocity, FrameGeometry, FrameMetric};
pub use registry::{model_registry, Model, MODEL_NAMES};
pub use submersion::{normalizer, null_rho_equals_normalizer_check, rho_form, submersion_rho, NormalizerCheck};
