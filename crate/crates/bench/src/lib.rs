//! Fixtures shared by the criterion benches.

use chernlab::linalg::c;
use chernlab::models::{model_registry, FrameMetric, LieAlgebraData, Model};
use chernlab::twisted::PathSpec;
use chernlab::ChartPoint;

pub fn hopf() -> Model {
    model_registry("hopf_standard").expect("registry model")
}

pub fn hopf_point() -> ChartPoint {
    ChartPoint::new(vec![c(0.8, 0.2), c(-0.3, 0.4)])
}

/// A small circle through the base point of the Hopf loop family.
pub fn hopf_loop() -> PathSpec {
    PathSpec::circle(vec![c(1.0, 0.0), c(0.0, 0.0)], 1, 0.3)
}

pub fn sl2_metric() -> FrameMetric {
    let alg = LieAlgebraData::builtin("sl2").expect("builtin algebra");
    let n = alg.dim;
    FrameMetric::new(alg, chernlab::CMatrix::identity(n, n) * c(10.0, 0.0)).expect("positive metric")
}
