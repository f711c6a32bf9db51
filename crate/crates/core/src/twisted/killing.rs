//! Killing residuals and twisted parallelism of vector fields.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chart::field::{gaussian, ChartPoint, MetricField, VectorField};
use crate::chart::jet::{wirtinger_expand, FdScheme, FunctionJet};
use crate::chart::pack::gamma_at;
use crate::error::{Error, Result};
use crate::linalg::{c, max_abs, CMatrix, C64};
use crate::sampling::{rng, stream};

/// Residuals of the holomorphic Killing equations at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KillingResidual {
    /// `max_{ij} max(|(L_X g)_{ij̄}|, |(L_{JX} g)_{ij̄}|)` for `X = 2 Re ζ`.
    pub lie: f64,
    /// `max |∂̄ ζ|`.
    pub holomorphy: f64,
}

impl KillingResidual {
    pub fn total(&self) -> f64 {
        self.lie.max(self.holomorphy)
    }
}

/// First Wirtinger derivatives of a vector field: `(∂_i ζ^k, ∂_ī ζ^k)` as `[i][k]`.
fn field_derivatives(
    field: &MetricField,
    vf: &VectorField,
    point: &ChartPoint,
) -> Result<(Vec<Vec<C64>>, Vec<Vec<C64>>)> {
    let n = field.dim;
    if vf.dim != n || point.dim() != n {
        return Err(Error::BadParams(format!(
            "vector field `{}` and metric `{}` have different dimensions",
            vf.name, field.name
        )));
    }
    let eval = |z: &[C64]| Ok(vf.eval(z));
    let inside = |z: &[C64]| field.contains(z);
    let jet: FunctionJet = wirtinger_expand(&eval, point, 1, &FdScheme::default(), &inside, &vf.name)?;
    let zero = vec![0u8; n];
    let mut unit = vec![0u8; n];
    let mut holo = Vec::with_capacity(n);
    let mut anti = Vec::with_capacity(n);
    for i in 0..n {
        unit[i] = 1;
        holo.push(jet.derivative(&unit, &zero).expect("order 1").to_vec());
        anti.push(jet.derivative(&zero, &unit).expect("order 1").to_vec());
        unit[i] = 0;
    }
    Ok((holo, anti))
}

/// One classical RK4 step of `ż = w(z)`.
fn flow_step(w: &dyn Fn(&[C64]) -> Vec<C64>, z: &[C64], t: f64) -> Vec<C64> {
    let shift = |base: &[C64], k: &[C64], s: f64| -> Vec<C64> { base.iter().zip(k).map(|(a, b)| a + b * s).collect() };
    let k1 = w(z);
    let k2 = w(&shift(z, &k1, t / 2.0));
    let k3 = w(&shift(z, &k2, t / 2.0));
    let k4 = w(&shift(z, &k3, t));
    (0..z.len())
        .map(|i| z[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (t / 6.0))
        .collect()
}

/// `d/dt g(φ_t(p))` at `t = 0` for the real flow of `ż = w(z)`.
fn flow_derivative(field: &MetricField, w: &dyn Fn(&[C64]) -> Vec<C64>, p: &[C64]) -> Result<CMatrix> {
    let speed = w(p).iter().map(|x| x.norm()).fold(0.0, f64::max);
    let norm = p.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let eps = (1e-4 * (1.0 + norm) / speed.max(1e-8)).min(1e-2);
    let central = |e: f64| -> Result<CMatrix> {
        let fwd = flow_step(w, p, e);
        let bwd = flow_step(w, p, -e);
        for z in [&fwd, &bwd] {
            if !field.contains(z) {
                return Err(Error::DomainViolation {
                    field: field.name.clone(),
                    node: ChartPoint::new(z.clone()).as_pairs(),
                });
            }
        }
        Ok((field.eval(&fwd) - field.eval(&bwd)) / C64::new(2.0 * e, 0.0))
    };
    let coarse = central(eps)?;
    let fine = central(eps / 2.0)?;
    Ok((&fine * C64::new(4.0, 0.0) - coarse) / C64::new(3.0, 0.0))
}

/// `(L_Y g)_{ij̄} = Y(g_{ij̄}) + (∂_i w^k) g_{kj̄} + conj(∂_j w^l) g_{il̄}` for `Y = 2 Re w`.
fn lie_derivative(g: &CMatrix, flow: &CMatrix, dw: &[Vec<C64>]) -> CMatrix {
    let n = g.nrows();
    CMatrix::from_fn(n, n, |i, j| {
        let mut acc = flow[(i, j)];
        for k in 0..n {
            acc += dw[i][k] * g[(k, j)] + dw[j][k].conj() * g[(i, k)];
        }
        acc
    })
}

/// Lie derivatives of `g` along the real fields underlying `vf` and `i·vf`.
pub fn killing_residual(field: &MetricField, vf: &VectorField, point: &ChartPoint) -> Result<KillingResidual> {
    let (holo, anti) = field_derivatives(field, vf, point)?;
    let g = field.eval(point);
    let along = |w: &dyn Fn(&[C64]) -> Vec<C64>, dw: &[Vec<C64>]| -> Result<f64> {
        let flow = flow_derivative(field, w, point)?;
        Ok(max_abs(&lie_derivative(&g, &flow, dw)))
    };
    let real = |z: &[C64]| vf.eval(z);
    let rotated = |z: &[C64]| vf.eval(z).into_iter().map(|x| x * C64::i()).collect::<Vec<_>>();
    let i_holo: Vec<Vec<C64>> = holo.iter().map(|r| r.iter().map(|x| x * C64::i()).collect()).collect();
    let lie = along(&real, &holo)?.max(along(&rotated, &i_holo)?);
    let holomorphy = anti.iter().flatten().map(|x| x.norm()).fold(0.0, f64::max);
    Ok(KillingResidual { lie, holomorphy })
}

/// `max(|∂_i ζ^k + Γ^k_{ji} ζ^j|, |∂_ī ζ^k|)`.
pub fn nt_parallel_residual(field: &MetricField, vf: &VectorField, point: &ChartPoint) -> Result<f64> {
    let n = field.dim;
    let (holo, anti) = field_derivatives(field, vf, point)?;
    let gamma = gamma_at(field, point, &FdScheme::default())?;
    let zeta = vf.eval(point);
    let mut worst = anti.iter().flatten().map(|x| x.norm()).fold(0.0, f64::max);
    for i in 0..n {
        for k in 0..n {
            let mut v = holo[i][k];
            for j in 0..n {
                v += gamma[[j, i, k]] * zeta[j];
            }
            worst = worst.max(v.norm());
        }
    }
    Ok(worst)
}

/// Seeded perturbations `ζ + s·Bz + δ·conj(z_1) u` of a designated field, with
/// `B` trace-free of unit Frobenius norm, so none is a multiple of `ζ`.
pub fn perturbed_fields(base: &VectorField, seed: u64, count: usize, strength: f64, antiholo: f64) -> Vec<VectorField> {
    let n = base.dim;
    (0..count)
        .map(|idx| {
            let mut r = rng(seed, stream::FIELDS + idx as u64);
            let mut b = CMatrix::from_fn(n, n, |_, _| c(gaussian(&mut r), gaussian(&mut r)));
            let trace = b.trace() / C64::new(n as f64, 0.0);
            for i in 0..n {
                b[(i, i)] -= trace;
            }
            let norm = b.norm();
            let b = b / C64::new(norm.max(1e-12), 0.0);
            let u: Vec<C64> = (0..n)
                .map(|_| C64::from_polar(1.0, r.random_range(0.0..std::f64::consts::TAU)))
                .collect();
            let base = base.clone();
            VectorField::new(format!("{}+perturbation{idx}", base.name), n, move |z| {
                let mut v = base.eval(z);
                for k in 0..n {
                    for j in 0..n {
                        v[k] += b[(k, j)] * z[j] * strength;
                    }
                    v[k] += u[k] * z[0].conj() * antiholo;
                }
                v
            })
        })
        .collect()
}
