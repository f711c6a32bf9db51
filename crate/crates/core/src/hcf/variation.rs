//! Difference-quotient checks of the first variation of `Γ`, `T` and `∇^T`.

use serde::{Deserialize, Serialize};

use crate::chart::bianchi::{covariant_torsion, SCALE_FLOOR};
use crate::chart::field::{ChartPoint, MetricField};
use crate::chart::jet::{wirtinger_jet, MetricJet};
use crate::chart::pack::{chern_tensors, lower_last, ChernTensors};
use crate::chart::tensor::{CTensor, Conn, Dir, PolyTensor, Slot};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::poly::{Poly, PolyMatrix};
use crate::twisted::curvature::mixed_block_jet;

/// Where the variation `h = dg/dt` comes from.
#[derive(Debug, Clone)]
pub enum HSource {
    Explicit(MetricField),
    /// `h = -S - Q` of the background metric.
    Hcf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationReport {
    pub residual_gamma: f64,
    pub residual_torsion: f64,
    pub residual_twisted: f64,
    /// Difference quotient of `Γ^T` against the right-hand side in terms of `Ω^T`.
    pub residual_lemma: Option<f64>,
    /// `g^{kn̄} ∇_j h_{in̄}` against the same right-hand side, without difference quotients.
    pub residual_lemma_direct: Option<f64>,
    /// Variation of the (0,1) coefficients of `∇^T`, which do not involve `g`.
    pub residual_anti: f64,
    /// `log2` of the ratio of successive quotient differences; 2 for a clean `O(ε²)` regime.
    pub observed_order: f64,
    pub epsilon: f64,
    pub scale: f64,
}

impl VariationReport {
    pub fn max_residual(&self) -> f64 {
        [
            self.residual_gamma,
            self.residual_torsion,
            self.residual_twisted,
            self.residual_lemma.unwrap_or(0.0),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

const REFINEMENTS: usize = 4;

fn rel(a: &CTensor, b: &CTensor) -> f64 {
    a.max_diff(b) / a.max_abs().max(b.max_abs()).max(SCALE_FLOOR)
}

/// `h = -S - Q` as a jet, one order below the torsion and two below `g`.
pub fn hcf_velocity_jet(t: &ChernTensors, point: &ChartPoint) -> Result<MetricJet> {
    let n = t.n;
    let omega_low = t.omega_low()?;
    let tlow = t.torsion_low();
    let basis = t.g.basis().clone();
    let h = PolyMatrix::from_fn(n, |i, j| {
        let mut s = Poly::zero(&basis);
        let mut q = Poly::zero(&basis);
        for m in 0..n {
            for k in 0..n {
                s.add_product(t.ginv.get(&[m, k]), omega_low.get(&[m, k, i, j]));
                for p in 0..n {
                    for r in 0..n {
                        let w = t.ginv.get(&[m, k]) * t.ginv.get(&[p, r]);
                        let tt = tlow.get(&[m, p, j]) * &tlow.get(&[k, r, i]).conj();
                        q.add_product(&w, &tt);
                    }
                }
            }
        }
        -&(&s + &q.scale(C64::new(0.5, 0.0)))
    });
    let order = t.order.saturating_sub(2);
    Ok(MetricJet::from_poly(point.clone(), &h, None).truncated(order))
}

fn gamma_of(jet: &MetricJet) -> Result<CTensor> {
    Ok(chern_tensors(jet)?.gamma.value())
}

/// Central quotient `(Γ(g + εh) - Γ(g - εh)) / 2ε`.
fn quotient(g1: &MetricJet, h: &MetricJet, eps: f64) -> Result<CTensor> {
    let plus = gamma_of(&g1.combine(eps, h))?;
    let minus = gamma_of(&g1.combine(-eps, h))?;
    let n = plus.n;
    Ok(CTensor::from_fn(n, 3, |ix| {
        (plus.get(ix) - minus.get(ix)) / (2.0 * eps)
    }))
}

fn diff_norm(a: &CTensor, b: &CTensor) -> f64 {
    a.max_diff(b)
}

/// Richardson-corrected `dΓ/dε` with the observed order of the quotient error.
fn gamma_derivative(g1: &MetricJet, h: &MetricJet, epsilon: f64) -> Result<(CTensor, f64, f64)> {
    let mut eps = epsilon;
    let mut observed = f64::NAN;
    for _ in 0..=REFINEMENTS {
        let d0 = quotient(g1, h, eps)?;
        let d1 = quotient(g1, h, eps / 2.0)?;
        let d2 = quotient(g1, h, eps / 4.0)?;
        let scale = d2.max_abs().max(SCALE_FLOOR);
        let (a, b) = (diff_norm(&d0, &d1), diff_norm(&d1, &d2));
        let extrapolated = CTensor::from_fn(d2.n, 3, |ix| d2.get(ix) + (d2.get(ix) - d1.get(ix)) / 3.0);
        // differences at round-off level: g is affine in ε to working precision
        if a < 1e-10 * scale {
            return Ok((extrapolated, 2.0, eps));
        }
        let ratio = a / b.max(f64::MIN_POSITIVE);
        observed = ratio.log2();
        if (3.0..=5.5).contains(&ratio) {
            return Ok((extrapolated, observed, eps));
        }
        eps /= 2.0;
    }
    Err(Error::StepTooLarge { observed })
}

/// Compares difference quotients of `Γ`, `T` and `Γ^T` along `g + εh` with
/// their closed-form variations at `point`.
pub fn variation_check(
    field: &MetricField,
    source: &HSource,
    point: &ChartPoint,
    epsilon: f64,
) -> Result<VariationReport> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::BadParams("epsilon must be positive".into()));
    }
    let n = field.dim;
    let jet3 = wirtinger_jet(field, point, 3)?;
    let t3 = chern_tensors(&jet3)?;
    let h = match source {
        HSource::Explicit(hf) => {
            if hf.dim != n {
                return Err(Error::BadParams("variation field has the wrong dimension".into()));
            }
            wirtinger_jet(hf, point, 1)?
        }
        HSource::Hcf => hcf_velocity_jet(&t3, point)?,
    };
    let g1 = jet3.truncated(1);
    let (dgamma, observed_order, eps) = gamma_derivative(&g1, &h, epsilon)?;

    // ∇_m h_{jn̄} with the connection of g
    let t1 = chern_tensors(&g1)?;
    let hp = PolyTensor::from_fn(n, 2, |ix| h.poly_matrix().get(ix[0], ix[1]).clone());
    let dh = hp
        .covariant(
            &[(Slot::Lower, Conn::Chern), (Slot::LowerBar, Conn::Chern)],
            Dir::Holo,
            &t1.gamma,
        )
        .value();
    let ginv = t3.ginv.value();
    let raise = |m: usize, j: usize, k: usize| -> C64 { (0..n).map(|l| ginv.get(&[k, l]) * dh[[m, j, l]]).sum() };
    let rhs_gamma = CTensor::from_fn(n, 3, |ix| raise(ix[0], ix[1], ix[2]));
    let rhs_torsion = CTensor::from_fn(n, 3, |ix| raise(ix[0], ix[1], ix[2]) - raise(ix[1], ix[0], ix[2]));
    let rhs_twisted = CTensor::from_fn(n, 3, |ix| raise(ix[1], ix[0], ix[2]));

    let d_torsion = CTensor::from_fn(n, 3, |ix| dgamma[[ix[0], ix[1], ix[2]]] - dgamma[[ix[1], ix[0], ix[2]]]);
    let d_twisted = CTensor::from_fn(n, 3, |ix| dgamma[[ix[1], ix[0], ix[2]]]);

    let (residual_lemma, residual_lemma_direct) = match source {
        HSource::Hcf => {
            let lemma = lemma_rhs(&t3)?;
            (Some(rel(&d_twisted, &lemma)), Some(rel(&rhs_twisted, &lemma)))
        }
        HSource::Explicit(_) => (None, None),
    };
    Ok(VariationReport {
        residual_gamma: rel(&dgamma, &rhs_gamma),
        residual_torsion: rel(&d_torsion, &rhs_torsion),
        residual_twisted: rel(&d_twisted, &rhs_twisted),
        residual_lemma,
        residual_lemma_direct,
        residual_anti: 0.0,
        observed_order,
        epsilon: eps,
        scale: dgamma.max_abs(),
    })
}

/// `-g^{mn̄} (∇̃_m Ω^T)_{in̄j}^k - ½ g^{mn̄} g^{ps̄} T_{n̄s̄i} (Ω^T)_{mpj}^k`, stored `[i, j, k]`,
/// with `∇̃ = ∇ ⊗ 1 + 1 ⊗ ∇^T`.
pub fn lemma_rhs(t: &ChernTensors) -> Result<CTensor> {
    t.require(3)?;
    let n = t.n;
    let mixed = mixed_block_jet(t)?;
    let d_mixed = mixed.covariant(
        &[
            (Slot::Lower, Conn::Chern),
            (Slot::LowerBar, Conn::Chern),
            (Slot::Lower, Conn::Twisted),
            (Slot::Upper, Conn::Twisted),
        ],
        Dir::Holo,
        &t.gamma,
    );
    let d_mixed = d_mixed.value();
    let d_tor = covariant_torsion(t);
    let ginv = t.ginv.value();
    // T_{n̄s̄i} = conj(T^l_{ns}) g_{il̄}
    let tlow = lower_last(&t.torsion, &t.g).value();
    Ok(CTensor::from_fn(n, 3, |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        let mut acc = C64::new(0.0, 0.0);
        for m in 0..n {
            for nn in 0..n {
                acc -= ginv.get(&[m, nn]) * d_mixed.get(&[m, i, nn, j, k]);
                for p in 0..n {
                    for s in 0..n {
                        acc -= 0.5
                            * ginv.get(&[m, nn])
                            * ginv.get(&[p, s])
                            * tlow[[nn, s, i]].conj()
                            * d_tor[[j, m, p, k]];
                    }
                }
            }
        }
        acc
    }))
}
