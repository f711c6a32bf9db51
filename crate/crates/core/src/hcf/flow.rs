//! HCF on invariant metrics: the ODE `dg/dt = -Q(g)` in the invariant frame.

use serde_json::{json, Value};

use crate::chart::jet::wirtinger_jet;
use crate::chart::pack::chern_tensors;
use crate::chart::tensor::matrix_json;
use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_part, is_positive_definite, max_abs, CMatrix, C64};
use crate::models::frame::{frame_velocity, FrameMetric};
use crate::models::lie_chart::{frame_fields, lie_group_metric};
use crate::models::LieAlgebraData;
use crate::ChartPoint;

/// Time samples of an invariant-metric trajectory.
#[derive(Debug, Clone)]
pub struct FlowTrajectory {
    pub algebra: LieAlgebraData,
    pub times: Vec<f64>,
    pub metrics: Vec<CMatrix>,
    /// Step-halving error estimate of each step.
    pub step_errors: Vec<f64>,
}

impl FlowTrajectory {
    pub fn final_metric(&self) -> &CMatrix {
        self.metrics.last().expect("trajectory has its initial point")
    }

    pub fn frame_metric(&self, index: usize) -> FrameMetric {
        FrameMetric {
            algebra: self.algebra.clone(),
            g: self.metrics[index].clone(),
        }
    }

    /// `d/dt log det g = -tr(g⁻¹ Q)` at every sample.
    pub fn log_det_rates(&self) -> Result<Vec<f64>> {
        (0..self.metrics.len())
            .map(|i| {
                let fm = self.frame_metric(i);
                let q = -frame_velocity(&fm)?;
                // g^{ij̄} Q_{ij̄}
                let ginv = fm.ginv()?;
                Ok(-(ginv.component_mul(&q)).sum().re)
            })
            .collect()
    }

    /// `t, g_00.re, g_00.im, g_01.re, ...` in row-major order.
    pub fn to_csv(&self) -> String {
        let n = self.algebra.dim;
        let mut out = String::from("t");
        for i in 0..n {
            for j in 0..n {
                out.push_str(&format!(",g{i}{j}_re,g{i}{j}_im"));
            }
        }
        out.push('\n');
        for (t, g) in self.times.iter().zip(&self.metrics) {
            out.push_str(&format!("{t:.17e}"));
            for i in 0..n {
                for j in 0..n {
                    out.push_str(&format!(",{:.17e},{:.17e}", g[(i, j)].re, g[(i, j)].im));
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "algebra": self.algebra.to_json(),
            "times": self.times,
            "metrics": self.metrics.iter().map(matrix_json).collect::<Vec<_>>(),
            "step_errors": self.step_errors,
        })
    }
}

fn rk4_step(alg: &LieAlgebraData, g: &CMatrix, h: f64) -> Result<CMatrix> {
    let velocity = |m: &CMatrix| -> Result<CMatrix> {
        if !is_positive_definite(m) {
            return Err(Error::PositivityLost { t_lo: 0.0, t_hi: 0.0 });
        }
        frame_velocity(&FrameMetric {
            algebra: alg.clone(),
            g: m.clone(),
        })
    };
    let hc = |s: f64| c(s, 0.0);
    let k1 = velocity(g)?;
    let k2 = velocity(&(g + &k1 * hc(h / 2.0)))?;
    let k3 = velocity(&(g + &k2 * hc(h / 2.0)))?;
    let k4 = velocity(&(g + &k3 * hc(h)))?;
    Ok(hermitian_part(
        &(g + (k1 + k2 * hc(2.0) + k3 * hc(2.0) + k4) * hc(h / 6.0)),
    ))
}

/// Two half steps, with the difference to one full step as the error estimate.
fn halved_step(alg: &LieAlgebraData, g: &CMatrix, h: f64) -> Result<(CMatrix, f64)> {
    let full = rk4_step(alg, g, h)?;
    let half = rk4_step(alg, g, h / 2.0)?;
    let two = rk4_step(alg, &half, h / 2.0)?;
    let err = max_abs(&(&two - &full)) / 15.0;
    Ok((two, err))
}

fn step_ok(alg: &LieAlgebraData, g: &CMatrix, h: f64) -> bool {
    matches!(halved_step(alg, g, h), Ok((next, _)) if is_positive_definite(&next))
}

/// Integrates `dg/dt = -Q(g)` over `[0, t_end]` in `steps` equal steps.
pub fn flow_invariant(fm: &FrameMetric, t_end: f64, steps: usize) -> Result<FlowTrajectory> {
    if !(t_end > 0.0 && t_end.is_finite()) || steps == 0 {
        return Err(Error::BadParams("flow needs t_end > 0 and at least one step".into()));
    }
    let alg = &fm.algebra;
    let h = t_end / steps as f64;
    let mut traj = FlowTrajectory {
        algebra: alg.clone(),
        times: vec![0.0],
        metrics: vec![fm.g.clone()],
        step_errors: Vec::with_capacity(steps),
    };
    let mut g = fm.g.clone();
    for s in 0..steps {
        let t = s as f64 * h;
        match halved_step(alg, &g, h) {
            Ok((next, err)) if is_positive_definite(&next) => {
                g = next;
                traj.times.push(if s + 1 == steps { t_end } else { t + h });
                traj.metrics.push(g.clone());
                traj.step_errors.push(err);
            }
            _ => {
                let (mut lo, mut hi) = (0.0, h);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if step_ok(alg, &g, mid) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                return Err(Error::PositivityLost {
                    t_lo: t + lo,
                    t_hi: t + hi,
                });
            }
        }
    }
    Ok(traj)
}

/// Persistence of twisted parallelism along an invariant trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceReport {
    /// `max_t max |∇^T_{ξ_i} ξ_j - c^k_{ij} ξ_k|` in the invariant frame.
    pub residual: f64,
    pub steps_checked: usize,
    /// Largest Chern curvature norm at the origin of the chart realisation,
    /// at the sampled times.
    pub chart_omega: f64,
    /// Largest deviation of `∇^T_{X_i} X_j` from `c^k_{ij} X_k` at the chart origin.
    pub chart_twisted: f64,
    pub chart_times: Vec<f64>,
}

/// Coefficients `∇^T_{ξ_i} ξ_j = (Γ^k_{ji} + c^k_{ij}) ξ_k` of an invariant frame
/// with metric `g`, where `Γ^k_{ji} = g^{kl̄} ξ_j(g_{il̄})`.
pub fn frame_twisted_from_metric(alg: &LieAlgebraData, g: &CMatrix) -> Result<Vec<C64>> {
    let n = alg.dim;
    let ginv = FrameMetric {
        algebra: alg.clone(),
        g: g.clone(),
    }
    .ginv()?;
    // frame derivatives of the (constant) metric components
    let dg = vec![CMatrix::zeros(n, n); n];
    let mut out = vec![c(0.0, 0.0); n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let chern: C64 = (0..n).map(|l| ginv[(k, l)] * dg[j][(i, l)]).sum();
                out[(i * n + j) * n + k] = chern + alg.coef(i, j, k);
            }
        }
    }
    Ok(out)
}

/// Twisted parallelism residual along the flow, and chart cross-checks at
/// the start, middle and end of the trajectory.
pub fn parallel_persistence_check(fm: &FrameMetric, t_end: f64, steps: usize) -> Result<PersistenceReport> {
    let traj = flow_invariant(fm, t_end, steps)?;
    let alg = &fm.algebra;
    let n = alg.dim;
    let mut residual: f64 = 0.0;
    for g in &traj.metrics {
        let b = frame_twisted_from_metric(alg, g)?;
        for (idx, v) in b.iter().enumerate() {
            let (i, j, k) = (idx / (n * n), (idx / n) % n, idx % n);
            residual = residual.max((v - alg.coef(i, j, k)).norm());
        }
    }
    let picks = [0, traj.metrics.len() / 2, traj.metrics.len() - 1];
    let mut report = PersistenceReport {
        residual,
        steps_checked: traj.metrics.len(),
        chart_omega: 0.0,
        chart_twisted: 0.0,
        chart_times: picks.iter().map(|&i| traj.times[i]).collect(),
    };
    for &i in &picks {
        let (omega, twisted) = chart_cross_check(&traj.frame_metric(i))?;
        report.chart_omega = report.chart_omega.max(omega);
        report.chart_twisted = report.chart_twisted.max(twisted);
    }
    Ok(report)
}

/// `(|Ω|, max |∇^T_{X_i} X_j - c^k_{ij} X_k|)` at the origin of the chart realisation.
pub fn chart_cross_check(fm: &FrameMetric) -> Result<(f64, f64)> {
    let alg = &fm.algebra;
    let n = alg.dim;
    let field = lie_group_metric(fm);
    let origin = ChartPoint::new(vec![c(0.0, 0.0); n]);
    let jet = wirtinger_jet(&field, &origin, 2)?;
    let t = chern_tensors(&jet)?;
    let omega = t.omega_low()?.value().max_abs();
    let gamma = t.gamma.value();
    // at the origin X_j = e_j and ∂_i X_j^k = ½ c^k_{ij}
    let fields = frame_fields(alg);
    let mut twisted: f64 = 0.0;
    for (j, xj) in fields.iter().enumerate() {
        let eps = 1e-3;
        let mut dx = Vec::with_capacity(n);
        for i in 0..n {
            let shift = |s: f64| {
                let mut z = vec![c(0.0, 0.0); n];
                z[i] = c(s, 0.0);
                xj.eval(&z)
            };
            let (p1, m1, p2, m2) = (shift(eps), shift(-eps), shift(2.0 * eps), shift(-2.0 * eps));
            // holomorphic field: ∂_i = d/dx_i
            dx.push(
                (0..n)
                    .map(|k| (p1[k] - m1[k]) * (8.0 / (12.0 * eps)) - (p2[k] - m2[k]) * (1.0 / (12.0 * eps)))
                    .collect::<Vec<C64>>(),
            );
        }
        for i in 0..n {
            for k in 0..n {
                // (∇^T_{∂_i} X_j)^k = ∂_i X_j^k + Γ^k_{pi} X_j^p, X_j = e_j at 0
                let v = dx[i][k] + gamma[[j, i, k]];
                twisted = twisted.max((v - alg.coef(i, j, k)).norm());
            }
        }
    }
    Ok((omega, twisted))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn diag(a: f64, b: f64) -> CMatrix {
        CMatrix::from_diagonal(&DVector::from_vec(vec![c(a, 0.0), c(b, 0.0)]))
    }

    #[test]
    fn abelian_flow_is_constant() {
        let fm = FrameMetric::new(LieAlgebraData::builtin("abelian").unwrap(), diag(2.0, 3.0)).unwrap();
        let traj = flow_invariant(&fm, 5.0, 10).unwrap();
        assert_eq!(traj.final_metric(), &fm.g);
    }

    #[test]
    fn affine_flow_matches_closed_form() {
        let (a0, b0) = (2.0, 1.5);
        let fm = FrameMetric::new(LieAlgebraData::builtin("affine").unwrap(), diag(a0, b0)).unwrap();
        let g = flow_invariant(&fm, 1.0, 50).unwrap().final_metric().clone();
        assert!((g[(0, 0)].re - a0).abs() < 1e-14);
        let exact = b0 * (-1.0 / a0).exp();
        assert!((g[(1, 1)].re - exact).abs() / exact < 1e-9);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let fm = FrameMetric::identity(LieAlgebraData::builtin("affine").unwrap());
        let csv = flow_invariant(&fm, 1.0, 4).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[0].split(',').count(), 9);
    }

    #[test]
    fn bad_arguments() {
        let fm = FrameMetric::identity(LieAlgebraData::builtin("affine").unwrap());
        assert!(flow_invariant(&fm, 0.0, 4).is_err());
        assert!(flow_invariant(&fm, 1.0, 0).is_err());
    }
}
