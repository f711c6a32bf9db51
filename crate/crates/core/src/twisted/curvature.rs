//! Coefficients and curvature of the torsion-twisted connection.

use serde::{Deserialize, Serialize};

use crate::chart::bianchi::{covariant_torsion, SCALE_FLOOR};
use crate::chart::jet::MetricJet;
use crate::chart::pack::{chern_tensors, ChernTensors};
use crate::chart::tensor::{CTensor, Dir, PolyTensor};
use crate::error::{Error, Result};
use crate::poly::Poly;

/// `Γ^{T,k}_{ij} = Γ^k_{ji}`, stored `[i, j, k]`; the (0,1) coefficients are zero.
pub fn tt_coefficients(jet: &MetricJet) -> Result<CTensor> {
    let t = chern_tensors(jet)?;
    Ok(twisted_gamma(&t.gamma).value())
}

pub fn twisted_gamma(gamma: &PolyTensor) -> PolyTensor {
    PolyTensor::from_fn(gamma.n, 3, |ix| gamma.get(&[ix[1], ix[0], ix[2]]).clone())
}

/// Curvature of a connection given by its coordinate matrices in holomorphic
/// directions (`holo[[a, j, k]]`: `∇_a ∂_j = holo^k_{aj} ∂_k`) and
/// antiholomorphic directions (`anti[[b, j, k]]`).
///
/// Returns the (2,0), (1,1) and (0,2) blocks, each stored `[d, e, j, k]` for
/// `R(∂_d, ∂_e) ∂_j = R^k ∂_k` (second slot barred where applicable).
pub fn connection_curvature(holo: &PolyTensor, anti: &PolyTensor) -> [CTensor; 3] {
    let n = holo.n;
    let basis = holo.basis().clone();
    let d_holo_h = holo.partial(Dir::Holo); // [x, a, j, k] = ∂_x holo^k_{aj}
    let d_anti_h = holo.partial(Dir::Anti);
    let d_holo_a = anti.partial(Dir::Holo);
    let d_anti_a = anti.partial(Dir::Anti);
    let block = |cd: &PolyTensor, ce: &PolyTensor, d_e_cd: &PolyTensor, d_d_ce: &PolyTensor| {
        // R(d,e)^k_j = ∂_d C_e^k_j - ∂_e C_d^k_j + C_d^k_p C_e^p_j - C_e^k_p C_d^p_j
        PolyTensor::from_fn(n, 4, |ix| {
            let (d, e, j, k) = (ix[0], ix[1], ix[2], ix[3]);
            let mut acc = d_d_ce.get(&[d, e, j, k]) - d_e_cd.get(&[e, d, j, k]);
            let mut quad = Poly::zero(&basis);
            for p in 0..n {
                quad.add_product(cd.get(&[d, p, k]), ce.get(&[e, j, p]));
                quad -= &(ce.get(&[e, p, k]) * cd.get(&[d, j, p]));
            }
            acc += &quad;
            acc
        })
        .value()
    };
    [
        block(holo, holo, &d_holo_h, &d_holo_h),
        block(holo, anti, &d_anti_h, &d_holo_a),
        block(anti, anti, &d_anti_a, &d_anti_a),
    ]
}

/// Direct and formula evaluations of the twisted curvature.
#[derive(Debug, Clone)]
pub struct TtCurvature {
    /// `(Ω^T(∂_a, ∂_b̄))^k_j`, stored `[a, b, j, k]`, from the connection.
    pub mixed: CTensor,
    /// `(Ω^T(∂_a, ∂_b))^k_j`, stored `[a, b, j, k]`, from the connection.
    pub holo: CTensor,
    /// Same blocks from `Ω(ζ, η̄)ξ` and `∇_ζ T(ξ, η)`.
    pub mixed_formula: CTensor,
    pub holo_formula: CTensor,
    pub residuals: TtResiduals,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TtResiduals {
    /// Relative discrepancy of the (1,1) blocks.
    pub mixed: f64,
    /// Relative discrepancy of the (2,0) blocks.
    pub holo: f64,
    /// Max-norm of the (0,2) block of the direct computation.
    pub anti_norm: f64,
}

impl TtResiduals {
    pub fn discrepancy(&self) -> f64 {
        self.mixed.max(self.holo)
    }
}

pub fn tt_curvature(jet: &MetricJet) -> Result<TtCurvature> {
    if jet.order < 3 {
        return Err(Error::InsufficientJet {
            have: jet.order,
            need: 3,
        });
    }
    let t = chern_tensors(jet)?;
    tt_curvature_from_tensors(&t)
}

pub fn tt_curvature_from_tensors(t: &ChernTensors) -> Result<TtCurvature> {
    t.require(2)?;
    let n = t.n;
    let holo = twisted_gamma(&t.gamma);
    let anti = PolyTensor::zeros(n, 3, t.gamma.basis());
    let [direct_holo, direct_mixed, direct_anti] = connection_curvature(&holo, &anti);
    let (mixed_formula, holo_formula) = formula_blocks(t)?;
    let rel = |a: &CTensor, b: &CTensor| a.max_diff(b) / a.max_abs().max(b.max_abs()).max(SCALE_FLOOR);
    let residuals = TtResiduals {
        mixed: rel(&direct_mixed, &mixed_formula),
        holo: rel(&direct_holo, &holo_formula),
        anti_norm: direct_anti.max_abs(),
    };
    Ok(TtCurvature {
        mixed: direct_mixed,
        holo: direct_holo,
        mixed_formula,
        holo_formula,
        residuals,
    })
}

/// `(Ω^T(∂_a, ∂_b̄))^k_j = Ω_{jb̄a}^k` and `(Ω^T(∂_a, ∂_b))^k_j = ∇_j T^k_{ab}`.
pub fn formula_blocks(t: &ChernTensors) -> Result<(CTensor, CTensor)> {
    let omega = t.omega()?.value();
    let d_tor = covariant_torsion(t);
    let n = t.n;
    let mixed = CTensor::from_fn(n, 4, |ix| omega[[ix[2], ix[1], ix[0], ix[3]]]);
    let holo = CTensor::from_fn(n, 4, |ix| d_tor[[ix[2], ix[0], ix[1], ix[3]]]);
    Ok((mixed, holo))
}

/// The (1,1) block as jet-valued tensor `[i, n, j, k] = Ω_{jn̄i}^k`.
pub fn mixed_block_jet(t: &ChernTensors) -> Result<PolyTensor> {
    let omega = t.omega()?;
    Ok(PolyTensor::from_fn(t.n, 4, |ix| {
        omega.get(&[ix[2], ix[1], ix[0], ix[3]]).clone()
    }))
}
