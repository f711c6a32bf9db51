//! Chern connection, torsion and curvature from a metric jet.

use serde_json::{json, Value};

use super::field::{ChartPoint, MetricField};
use super::jet::{metric_function_jet, FdScheme, MetricJet};
use super::tensor::{matrix_json, vector_json, CTensor, Dir, PolyTensor};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_part, hermitian_residual, inverse_checked, CMatrix, C64};
use crate::poly::{Poly, PolyMatrix};

/// Metrics whose condition number exceeds this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Jet-valued Chern tensors, accurate to degree `order - (number of derivatives taken)`.
#[derive(Debug, Clone)]
pub struct ChernTensors {
    pub n: usize,
    pub order: usize,
    /// `g[[j, l]] = g_{jl̄}`.
    pub g: PolyTensor,
    /// `ginv[[k, l]] = g^{kl̄}`.
    pub ginv: PolyTensor,
    /// `gamma[[i, j, k]] = Γ^k_{ij}`.
    pub gamma: PolyTensor,
    /// `torsion[[i, j, k]] = T^k_{ij}`.
    pub torsion: PolyTensor,
    /// `omega[[i, j, k, l]] = Ω_{ij̄k}^l`; present from order 2.
    pub omega: Option<PolyTensor>,
    /// `omega_low[[i, j, k, l]] = Ω_{ij̄kl̄}`; present from order 2.
    pub omega_low: Option<PolyTensor>,
}

pub fn chern_tensors(jet: &MetricJet) -> Result<ChernTensors> {
    if jet.order < 1 {
        return Err(Error::InsufficientJet {
            have: jet.order,
            need: 1,
        });
    }
    let n = jet.dim;
    let inv0 = inverse_checked(&jet.g, MAX_CONDITION)?;
    let gm = jet.poly_matrix();
    let inv = gm.inverse(&inv0);
    let g = PolyTensor::from_fn(n, 2, |ix| gm.get(ix[0], ix[1]).clone());
    // g^{kl̄} = (G^{-1})[l][k]
    let ginv = PolyTensor::from_fn(n, 2, |ix| inv.get(ix[1], ix[0]).clone());
    let dg = g.partial(Dir::Holo); // dg[[i, j, l]] = d_i g_{jl̄}
    let basis = jet.basis().clone();
    let gamma = PolyTensor::from_fn(n, 3, |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        let mut acc = Poly::zero(&basis);
        for l in 0..n {
            acc.add_product(ginv.get(&[k, l]), dg.get(&[i, j, l]));
        }
        acc
    });
    let torsion = PolyTensor::from_fn(n, 3, |ix| {
        gamma.get(&[ix[0], ix[1], ix[2]]) - gamma.get(&[ix[1], ix[0], ix[2]])
    });
    let (omega, omega_low) = if jet.order >= 2 {
        // dbar[[j, i, k, l]] = d_j̄ Γ^l_{ik}
        let dbar = gamma.partial(Dir::Anti);
        let omega = PolyTensor::from_fn(n, 4, |ix| -dbar.get(&[ix[1], ix[0], ix[2], ix[3]]));
        let omega_low = lower_last(&omega, &g);
        (Some(omega), Some(omega_low))
    } else {
        (None, None)
    };
    Ok(ChernTensors {
        n,
        order: jet.order,
        g,
        ginv,
        gamma,
        torsion,
        omega,
        omega_low,
    })
}

/// Lowers the last (upper) index through `g`: `X_{..l̄} = g_{pl̄} X^p`.
pub fn lower_last(t: &PolyTensor, g: &PolyTensor) -> PolyTensor {
    let n = t.n;
    let basis = t.basis().clone();
    PolyTensor::from_fn(n, t.rank, |ix| {
        let last = ix.len() - 1;
        let mut src = ix.to_vec();
        let mut acc = Poly::zero(&basis);
        for p in 0..n {
            src[last] = p;
            acc.add_product(g.get(&[p, ix[last]]), t.get(&src));
        }
        acc
    })
}

impl ChernTensors {
    pub fn omega(&self) -> Result<&PolyTensor> {
        self.omega.as_ref().ok_or(Error::InsufficientJet {
            have: self.order,
            need: 2,
        })
    }

    pub fn omega_low(&self) -> Result<&PolyTensor> {
        self.omega_low.as_ref().ok_or(Error::InsufficientJet {
            have: self.order,
            need: 2,
        })
    }

    /// `T_{mpj̄} = T^l_{mp} g_{lj̄}` as a jet.
    pub fn torsion_low(&self) -> PolyTensor {
        lower_last(&self.torsion, &self.g)
    }

    pub fn require(&self, need: usize) -> Result<()> {
        if self.order < need {
            Err(Error::InsufficientJet { have: self.order, need })
        } else {
            Ok(())
        }
    }
}

/// Pointwise Chern data.
#[derive(Debug, Clone)]
pub struct CurvaturePack {
    pub point: Vec<C64>,
    pub g: CMatrix,
    pub gamma: CTensor,
    pub torsion: CTensor,
    pub omega: CTensor,
    pub omega_low: CTensor,
    pub rho: CMatrix,
    pub s2: CMatrix,
    pub q: CMatrix,
    pub s_hat: f64,
    /// Largest Hermitian defect of `rho`, `s2`, `q` before symmetrisation.
    pub symmetrization_residual: f64,
}

pub fn chern_pack(jet: &MetricJet) -> Result<CurvaturePack> {
    if jet.order < 2 {
        return Err(Error::InsufficientJet {
            have: jet.order,
            need: 2,
        });
    }
    let t = chern_tensors(jet)?;
    Ok(pack_from_tensors(jet, &t))
}

pub fn pack_from_tensors(jet: &MetricJet, t: &ChernTensors) -> CurvaturePack {
    let n = t.n;
    let ginv = t.ginv.value();
    let omega = t.omega.as_ref().expect("order >= 2").value();
    let omega_low = t.omega_low.as_ref().expect("order >= 2").value();
    let torsion = t.torsion.value();
    let g = jet.g.clone();
    let rho_raw = CMatrix::from_fn(n, n, |i, j| (0..n).map(|k| omega[[i, j, k, k]]).sum());
    let s2_raw = CMatrix::from_fn(n, n, |i, j| {
        let mut acc = C64::new(0.0, 0.0);
        for m in 0..n {
            for nn in 0..n {
                acc += ginv.get(&[m, nn]) * omega_low[[m, nn, i, j]];
            }
        }
        acc
    });
    let q_raw = q_from_torsion(&torsion, &g, &ginv.to_matrix());
    let residual = [&rho_raw, &s2_raw, &q_raw]
        .iter()
        .map(|m| hermitian_residual(m))
        .fold(0.0, f64::max);
    let s2 = hermitian_part(&s2_raw);
    let mut s_hat = 0.0;
    for i in 0..n {
        for j in 0..n {
            s_hat += (ginv.get(&[i, j]) * s2[(i, j)]).re;
        }
    }
    CurvaturePack {
        point: jet.point.coords.clone(),
        g,
        gamma: t.gamma.value(),
        torsion,
        omega,
        omega_low,
        rho: hermitian_part(&rho_raw),
        s2,
        q: hermitian_part(&q_raw),
        s_hat,
        symmetrization_residual: residual,
    }
}

/// `Q_{ij̄} = ½ g^{mn̄} g^{ps̄} T_{mpj̄} conj(T_{nsī})`, where `ginv[(k, l)] = g^{kl̄}`.
pub fn q_from_torsion(torsion: &CTensor, g: &CMatrix, ginv: &CMatrix) -> CMatrix {
    let n = g.nrows();
    // lowered torsion L[m, p, j] = T^l_{mp} g_{lj̄}
    let low = CTensor::from_fn(n, 3, |ix| {
        (0..n).map(|l| torsion[[ix[0], ix[1], l]] * g[(l, ix[2])]).sum()
    });
    // contract the first pair: A[m, p, i] = g^{mn̄} g^{ps̄} conj(L[n, s, i])
    let raised = CTensor::from_fn(n, 3, |ix| {
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..n {
            for b in 0..n {
                acc += ginv[(ix[0], a)] * ginv[(ix[1], b)] * low[[a, b, ix[2]]].conj();
            }
        }
        acc
    });
    CMatrix::from_fn(n, n, |i, j| {
        let mut acc = C64::new(0.0, 0.0);
        for m in 0..n {
            for p in 0..n {
                acc += low[[m, p, j]] * raised[[m, p, i]];
            }
        }
        acc * 0.5
    })
}

/// Chern coefficients `Γ^k_{ij}` at a point from first derivatives only.
pub fn gamma_at(field: &MetricField, point: &ChartPoint, scheme: &FdScheme) -> Result<CTensor> {
    let n = field.dim;
    let fj = metric_function_jet(field, point, 1, scheme)?;
    let g = CMatrix::from_fn(n, n, |i, j| fj.values[0][i * n + j]);
    let inv = inverse_checked(&g, MAX_CONDITION)?;
    let zero = vec![0u8; n];
    let mut unit = vec![0u8; n];
    let mut dg = Vec::with_capacity(n);
    for i in 0..n {
        unit[i] = 1;
        dg.push(fj.derivative(&unit, &zero).expect("order 1").to_vec());
        unit[i] = 0;
    }
    // g^{kl̄} = inv[(l, k)]
    Ok(CTensor::from_fn(n, 3, |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        (0..n).map(|l| inv[(l, k)] * dg[i][j * n + l]).sum()
    }))
}

/// HCF velocity `h = -S - Q`.
pub fn hcf_velocity(jet: &MetricJet) -> Result<CMatrix> {
    let pack = chern_pack(jet)?;
    Ok(-(&pack.s2 + &pack.q))
}

impl CurvaturePack {
    /// JSON report; `residuals` is attached verbatim.
    pub fn to_json(&self, residuals: Option<Value>) -> Value {
        json!({
            "point": vector_json(&self.point),
            "g": matrix_json(&self.g),
            "gamma": self.gamma.to_json(),
            "torsion": self.torsion.to_json(),
            "omega_low": self.omega_low.to_json(),
            "rho": matrix_json(&self.rho),
            "s2": matrix_json(&self.s2),
            "q": matrix_json(&self.q),
            "s_hat": self.s_hat,
            "residuals": residuals.unwrap_or(Value::Null),
        })
    }
}

/// `PolyMatrix` view of a rank-2 jet tensor.
pub fn as_poly_matrix(t: &PolyTensor) -> PolyMatrix {
    PolyMatrix::from_fn(t.n, |i, j| t.get(&[i, j]).clone())
}
