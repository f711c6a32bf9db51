//! Chern-connection geometry of a Hermitian metric on one chart.

pub mod bianchi;
pub mod field;
pub mod griffiths;
pub mod jet;
pub mod pack;
pub mod ricci;
pub mod tensor;

pub use bianchi::{bianchi_residuals, BianchiResiduals};
pub use field::{ChartPoint, MetricField, Region, VectorField};
pub use griffiths::{griffiths_min, GriffithsMin};
pub use jet::{wirtinger_jet, wirtinger_jet_with, FdScheme, MetricJet};
pub use pack::{chern_pack, chern_tensors, hcf_velocity, ChernTensors, CurvaturePack};
pub use ricci::{rho_closedness_residual, rho_nullspace, RhoNullSpace};
