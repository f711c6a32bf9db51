//! Sampled lower bound of the Griffiths curvature form.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::{ChartPoint, MetricField};
use super::jet::wirtinger_jet;
use super::pack::chern_pack;
use super::tensor::CTensor;
use crate::error::{Error, Result};
use crate::linalg::{g_norm, generalized_hermitian_eigen, CMatrix, C64};
use crate::sampling::{sample_point, sample_unit_vectors, SamplerConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GriffithsMin {
    pub value: f64,
    pub point: ChartPoint,
    pub xi: Vec<C64>,
    pub eta: Vec<C64>,
}

/// `Ω(ξ, ξ̄, η, η̄) / (|ξ|² |η|²)`.
pub fn griffiths_value(omega_low: &CTensor, g: &CMatrix, xi: &[C64], eta: &[C64]) -> f64 {
    let n = g.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    acc += omega_low[[i, j, k, l]] * xi[i] * xi[j].conj() * eta[k] * eta[l].conj();
                }
            }
        }
    }
    let norms = g_norm(g, xi).powi(2) * g_norm(g, eta).powi(2);
    acc.re / norms
}

/// Hermitian form `A_{ij̄} = Ω_{ij̄kl̄} η^k η̄^l`.
pub fn form_in_xi(omega_low: &CTensor, eta: &[C64]) -> CMatrix {
    let n = eta.len();
    CMatrix::from_fn(n, n, |i, j| {
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..n {
            for l in 0..n {
                acc += omega_low[[i, j, k, l]] * eta[k] * eta[l].conj();
            }
        }
        acc
    })
}

/// Minimum over `η` of the smallest eigenvalue of `ξ ↦ Ω(ξ, ξ̄, η, η̄)` relative to `g`.
pub fn griffiths_at(omega_low: &CTensor, g: &CMatrix, etas: &[Vec<C64>]) -> Result<(f64, Vec<C64>, Vec<C64>)> {
    let mut best: Option<(f64, Vec<C64>, Vec<C64>)> = None;
    for eta in etas {
        let a = form_in_xi(omega_low, eta);
        let (vals, vecs) = generalized_hermitian_eigen(&a, g)?;
        let eta_norm = g_norm(g, eta).powi(2);
        let value = vals[0] / eta_norm;
        if best.as_ref().is_none_or(|b| value < b.0) {
            best = Some((value, vecs[0].clone(), eta.clone()));
        }
    }
    Ok(best.expect("at least one vector sample"))
}

pub fn griffiths_min(field: &MetricField, sampler: &SamplerConfig) -> Result<GriffithsMin> {
    if sampler.points == 0 {
        return Err(Error::BadParams("griffiths sampler needs at least one point".into()));
    }
    let per_point: Vec<Result<GriffithsMin>> = (0..sampler.points)
        .into_par_iter()
        .map(|idx| {
            let point = sample_point(&field.sample_region, field.dim, sampler.seed, idx);
            let jet = wirtinger_jet(field, &point, 2)?;
            let pack = chern_pack(&jet)?;
            let etas = sample_unit_vectors(&pack.g, sampler.seed, idx, sampler.vectors.max(1));
            let (value, xi, eta) = griffiths_at(&pack.omega_low, &pack.g, &etas)?;
            Ok(GriffithsMin { value, point, xi, eta })
        })
        .collect();
    let mut best: Option<GriffithsMin> = None;
    // sequential scan in index order: ties resolve to the lowest index
    for r in per_point {
        let cand = r?;
        if best.as_ref().is_none_or(|b| cand.value.total_cmp(&b.value).is_lt()) {
            best = Some(cand);
        }
    }
    Ok(best.expect("sampler with at least one point"))
}
