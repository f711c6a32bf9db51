//! Invariant metrics on complex Lie groups, computed in the invariant frame.

use super::algebra::LieAlgebraData;
use crate::chart::field::ChartPoint;
use crate::chart::pack::{q_from_torsion, MAX_CONDITION};
use crate::chart::tensor::CTensor;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_residual, inverse_checked, is_positive_definite, CMatrix, C64};
use crate::twisted::holonomy::{fixed_subspace, FixedSubspace, HolonomySample};

/// Invariant metric `g_{ij̄} = g(ξ_i, ξ̄_j)` on a Lie group.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameMetric {
    pub algebra: LieAlgebraData,
    pub g: CMatrix,
}

impl FrameMetric {
    pub fn new(algebra: LieAlgebraData, g: CMatrix) -> Result<FrameMetric> {
        let n = algebra.dim;
        if g.nrows() != n || g.ncols() != n {
            return Err(Error::BadParams(format!("frame metric must be {n}x{n}")));
        }
        check_metric(&g)?;
        Ok(FrameMetric { algebra, g })
    }

    pub fn identity(algebra: LieAlgebraData) -> FrameMetric {
        let n = algebra.dim;
        FrameMetric {
            algebra,
            g: CMatrix::identity(n, n),
        }
    }

    /// `g^{kl̄}` as `ginv[(k, l)]`.
    pub fn ginv(&self) -> Result<CMatrix> {
        Ok(inverse_checked(&self.g, MAX_CONDITION)?.transpose())
    }
}

pub(crate) fn check_metric(g: &CMatrix) -> Result<()> {
    let r = hermitian_residual(g);
    if r > 1e-12 * (1.0 + g.norm()) {
        return Err(Error::NonHermitian {
            field: "frame metric".into(),
            residual: r,
        });
    }
    if !is_positive_definite(g) {
        return Err(Error::BadParams("frame metric is not positive definite".into()));
    }
    Ok(())
}

/// Chern data of an invariant metric in the parallel frame.
#[derive(Debug, Clone)]
pub struct FrameGeometry {
    /// `T^k_{ij} = -c^k_{ij}`.
    pub torsion: CTensor,
    pub q: CMatrix,
    pub s2: CMatrix,
    /// The frame is Chern-parallel, so the curvature vanishes identically.
    pub omega_vanishes: bool,
}

pub fn frame_torsion(alg: &LieAlgebraData) -> CTensor {
    CTensor::from_fn(alg.dim, 3, |ix| -alg.coef(ix[0], ix[1], ix[2]))
}

pub fn frame_geometry(fm: &FrameMetric) -> Result<FrameGeometry> {
    let n = fm.algebra.dim;
    let torsion = frame_torsion(&fm.algebra);
    let q = q_from_torsion(&torsion, &fm.g, &fm.ginv()?);
    Ok(FrameGeometry {
        torsion,
        q,
        s2: CMatrix::zeros(n, n),
        omega_vanishes: true,
    })
}

/// HCF velocity `-Q` of an invariant metric (`S` vanishes in the frame).
pub fn frame_velocity(fm: &FrameMetric) -> Result<CMatrix> {
    Ok(-frame_geometry(fm)?.q)
}

/// Coefficients `A_i` of the twisted connection on the frame, `∇^T_{ξ_i} ξ_j = (A_i)^k_j ξ_k`.
pub fn frame_twisted_coefficients(alg: &LieAlgebraData) -> Vec<CMatrix> {
    let n = alg.dim;
    (0..n)
        .map(|i| CMatrix::from_fn(n, n, |k, j| alg.coef(i, j, k)))
        .collect()
}

/// Fixed subspace of the twisted holonomy of a Lie group with an invariant
/// metric. The connection coefficients in the frame are constant, so the
/// holonomy algebra is generated by the curvature operators
/// `[A_i, A_j] - c^k_{ij} A_k`.
pub fn frame_fixed_subspace(fm: &FrameMetric) -> FixedSubspace {
    let alg = &fm.algebra;
    let n = alg.dim;
    let a = frame_twisted_coefficients(alg);
    let mut ops = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut r = &a[i] * &a[j] - &a[j] * &a[i];
            for (k, ak) in a.iter().enumerate() {
                r -= ak * alg.coef(i, j, k);
            }
            ops.push(r);
        }
    }
    let base = ChartPoint::new(vec![C64::new(0.0, 0.0); n]);
    fixed_subspace(&HolonomySample::from_operators(base, fm.g.clone(), ops))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn affine_q_closed_form() {
        let alg = LieAlgebraData::builtin("affine").unwrap();
        let (a, b) = (2.0, 3.0);
        let g = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(a, 0.0), c(b, 0.0)]));
        let geo = frame_geometry(&FrameMetric::new(alg, g).unwrap()).unwrap();
        assert!((geo.q[(0, 0)]).norm() < 1e-15);
        assert!((geo.q[(1, 1)] - c(b / a, 0.0)).norm() < 1e-14);
        assert!((geo.torsion[[0, 1, 1]] - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn lie_group_frame_is_fixed() {
        for name in LieAlgebraData::builtin_names() {
            let fm = FrameMetric::identity(LieAlgebraData::builtin(name).unwrap());
            assert_eq!(frame_fixed_subspace(&fm).dim, fm.algebra.dim, "{name}");
        }
    }

    #[test]
    fn rejects_indefinite() {
        let alg = LieAlgebraData::builtin("affine").unwrap();
        let g = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]));
        assert!(FrameMetric::new(alg, g).is_err());
    }
}
