//! Invariant frames of a Lie group near the identity, in exponential
//! coordinates truncated at second order.

use super::algebra::LieAlgebraData;
use super::frame::FrameMetric;
use crate::chart::field::{MetricField, Region, VectorField};
use crate::linalg::{CMatrix, C64};

/// Radius of the polydisc on which the chart metric is declared.
pub const CHART_RADIUS: f64 = 0.5;
pub const SAMPLE_RADIUS: f64 = 0.2;

fn ad_z(alg: &LieAlgebraData, z: &[C64]) -> CMatrix {
    alg.ad(z)
}

/// `X_i(z) = e_i + ½ ad_z e_i + (1/12) ad_z² e_i`: the frame `X` with
/// `[X_i, X_j] = c^k_{ij} X_k` at the origin. Columns are the fields.
pub fn frame_matrix(alg: &LieAlgebraData, z: &[C64]) -> CMatrix {
    let n = alg.dim;
    let a = ad_z(alg, z);
    CMatrix::identity(n, n) + &a * C64::new(0.5, 0.0) + &a * &a * C64::new(1.0 / 12.0, 0.0)
}

/// `Y_i(z) = e_i - ½ ad_z e_i + (1/12) ad_z² e_i`, commuting with `X` to second order.
pub fn commuting_frame_matrix(alg: &LieAlgebraData, z: &[C64]) -> CMatrix {
    let n = alg.dim;
    let a = ad_z(alg, z);
    CMatrix::identity(n, n) - &a * C64::new(0.5, 0.0) + &a * &a * C64::new(1.0 / 12.0, 0.0)
}

/// Chart metric with `g(X_i, X̄_j) = G_{ij̄}` constant: `g = Fᵀ G conj(F)`, `F = E⁻¹`.
pub fn lie_group_metric(fm: &FrameMetric) -> MetricField {
    let alg = fm.algebra.clone();
    let big_g = fm.g.clone();
    let n = alg.dim;
    let center = vec![C64::new(0.0, 0.0); n];
    MetricField::new(
        format!("lie_group_chart({})", alg.name),
        n,
        Region::Polydisc {
            center: center.clone(),
            radius: CHART_RADIUS,
        },
        Region::Polydisc {
            center,
            radius: SAMPLE_RADIUS,
        },
        move |z| {
            let e = frame_matrix(&alg, z);
            let f = e
                .try_inverse()
                .unwrap_or_else(|| CMatrix::from_element(n, n, C64::new(f64::NAN, 0.0)));
            let g = f.transpose() * &big_g * f.map(|x| x.conj());
            // remove round-off asymmetry
            (&g + g.adjoint()) * C64::new(0.5, 0.0)
        },
    )
}

/// The Chern-parallel frame `X_i` as vector fields.
pub fn frame_fields(alg: &LieAlgebraData) -> Vec<VectorField> {
    columns(alg, frame_matrix, "X")
}

/// The commuting frame `Y_i`, parallel for the twisted connection at the origin.
pub fn commuting_fields(alg: &LieAlgebraData) -> Vec<VectorField> {
    columns(alg, commuting_frame_matrix, "Y")
}

fn columns(alg: &LieAlgebraData, m: fn(&LieAlgebraData, &[C64]) -> CMatrix, label: &str) -> Vec<VectorField> {
    (0..alg.dim)
        .map(|i| {
            let alg = alg.clone();
            VectorField::new(format!("{label}{i}"), alg.dim, move |z| {
                m(&alg, z).column(i).iter().cloned().collect()
            })
        })
        .collect()
}
