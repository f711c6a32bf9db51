//! Parallel transport for the torsion-twisted connection.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::chart::field::{ChartPoint, MetricField, Region};
use crate::chart::jet::FdScheme;
use crate::chart::pack::gamma_at;
use crate::chart::tensor::{matrix_json, vector_json};
use crate::error::{Error, Result};
use crate::linalg::{max_abs, CMatrix, C64};

/// Image of a path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Curve {
    /// `base + Σ_m [a_m (cos 2πms - 1) + b_m sin 2πms]`, closed.
    Fourier {
        base: Vec<C64>,
        terms: Vec<(Vec<C64>, Vec<C64>)>,
    },
    /// Straight segment `from + s (to - from)`.
    Segment { from: Vec<C64>, to: Vec<C64> },
}

/// A curve restricted to the parameter interval `[start, end]`, traversed
/// from `start` to `end` (which may be decreasing).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub curve: Curve,
    pub start: f64,
    pub end: f64,
}

impl PathSpec {
    pub fn fourier(base: Vec<C64>, terms: Vec<(Vec<C64>, Vec<C64>)>) -> PathSpec {
        PathSpec {
            curve: Curve::Fourier { base, terms },
            start: 0.0,
            end: 1.0,
        }
    }

    pub fn segment(from: Vec<C64>, to: Vec<C64>) -> PathSpec {
        PathSpec {
            curve: Curve::Segment { from, to },
            start: 0.0,
            end: 1.0,
        }
    }

    /// Circle of radius `radius` through `base`, in the coordinate plane `axis`.
    pub fn circle(base: Vec<C64>, axis: usize, radius: f64) -> PathSpec {
        let n = base.len();
        let mut a = vec![C64::new(0.0, 0.0); n];
        let mut b = vec![C64::new(0.0, 0.0); n];
        a[axis] = C64::new(radius, 0.0);
        b[axis] = C64::new(0.0, radius);
        PathSpec::fourier(base, vec![(a, b)])
    }

    pub fn reversed(&self) -> PathSpec {
        PathSpec {
            curve: self.curve.clone(),
            start: self.end,
            end: self.start,
        }
    }

    /// Sub-path over the fraction `[from, to]` of this path.
    pub fn portion(&self, from: f64, to: f64) -> PathSpec {
        let len = self.end - self.start;
        PathSpec {
            curve: self.curve.clone(),
            start: self.start + from * len,
            end: self.start + to * len,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.curve {
            Curve::Fourier { base, .. } => base.len(),
            Curve::Segment { from, .. } => from.len(),
        }
    }

    pub fn closed(&self) -> bool {
        let (a, b) = (self.point(0.0), self.point(1.0));
        a.iter().zip(&b).all(|(x, y)| (x - y).norm() < 1e-12 * (1.0 + x.norm()))
    }

    fn raw_point(&self, t: f64) -> Vec<C64> {
        match &self.curve {
            Curve::Fourier { base, terms } => {
                let mut z = base.clone();
                for (m, (a, b)) in terms.iter().enumerate() {
                    let w = TAU * (m + 1) as f64 * t;
                    let (s, c) = w.sin_cos();
                    for k in 0..z.len() {
                        z[k] += a[k] * (c - 1.0) + b[k] * s;
                    }
                }
                z
            }
            Curve::Segment { from, to } => from.iter().zip(to).map(|(x, y)| x + (y - x) * t).collect(),
        }
    }

    fn raw_velocity(&self, t: f64) -> Vec<C64> {
        match &self.curve {
            Curve::Fourier { base, terms } => {
                let mut v = vec![C64::new(0.0, 0.0); base.len()];
                for (m, (a, b)) in terms.iter().enumerate() {
                    let k = TAU * (m + 1) as f64;
                    let (s, c) = (k * t).sin_cos();
                    for i in 0..v.len() {
                        v[i] += (b[i] * c - a[i] * s) * k;
                    }
                }
                v
            }
            Curve::Segment { from, to } => from.iter().zip(to).map(|(x, y)| y - x).collect(),
        }
    }

    /// Point at path parameter `s ∈ [0, 1]`.
    pub fn point(&self, s: f64) -> Vec<C64> {
        self.raw_point(self.start + s * (self.end - self.start))
    }

    /// `dγ/ds`.
    pub fn velocity(&self, s: f64) -> Vec<C64> {
        let scale = self.end - self.start;
        self.raw_velocity(self.start + s * scale)
            .into_iter()
            .map(|v| v * scale)
            .collect()
    }

    /// Whether `samples` evenly spaced points all lie in `region`.
    pub fn stays_in(&self, region: &Region, samples: usize) -> bool {
        (0..=samples).all(|i| region.contains(&self.point(i as f64 / samples as f64)))
    }

    pub fn to_json(&self) -> Value {
        match &self.curve {
            Curve::Fourier { base, terms } => json!({
                "base": vector_json(base),
                "fourier_coeffs": terms
                    .iter()
                    .map(|(a, b)| json!({"cos": vector_json(a), "sin": vector_json(b)}))
                    .collect::<Vec<_>>(),
                "closed": self.closed(),
            }),
            Curve::Segment { from, to } => json!({
                "base": vector_json(from),
                "end": vector_json(to),
                "closed": false,
            }),
        }
    }
}

/// Transport matrix `V(end) = matrix · V(start)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportResult {
    pub matrix: CMatrix,
    pub error_estimate: f64,
    pub steps: usize,
}

impl TransportResult {
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        (0..v.len())
            .map(|k| (0..v.len()).map(|j| self.matrix[(k, j)] * v[j]).sum())
            .collect()
    }

    pub fn to_json(&self) -> Value {
        json!({"matrix": matrix_json(&self.matrix), "error": self.error_estimate, "steps": self.steps})
    }
}

/// Step control of the transport integrator.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportOptions {
    /// Local error target per accepted step.
    pub tol: f64,
    pub max_steps: usize,
    pub scheme: FdScheme,
}

impl Default for TransportOptions {
    fn default() -> Self {
        TransportOptions {
            tol: 1e-12,
            max_steps: 20_000,
            scheme: FdScheme::fast(),
        }
    }
}

/// Transports `v0` along `path`.
pub fn parallel_transport(field: &MetricField, path: &PathSpec, v0: &[C64]) -> Result<(Vec<C64>, TransportResult)> {
    let result = transport_matrix(field, path, &TransportOptions::default())?;
    Ok((result.apply(v0), result))
}

/// Transport of the full coordinate basis, integrating
/// `dV^k/ds = -Γ^k_{ji}(γ(s)) γ'^i(s) V^j` by step-doubling RK4.
pub fn transport_matrix(field: &MetricField, path: &PathSpec, opts: &TransportOptions) -> Result<TransportResult> {
    let n = field.dim;
    if path.dim() != n {
        return Err(Error::BadParams("path and field dimensions differ".into()));
    }
    let generator = |s: f64| -> Result<CMatrix> {
        let z = path.point(s);
        let v = path.velocity(s);
        let gamma = gamma_at(field, &ChartPoint::new(z), &opts.scheme)?;
        Ok(CMatrix::from_fn(n, n, |k, j| {
            -(0..n).map(|i| gamma[[j, i, k]] * v[i]).sum::<C64>()
        }))
    };
    let rk4 = |a0: &CMatrix, ah: &CMatrix, a1: &CMatrix, v: &CMatrix, h: f64| -> CMatrix {
        let k1 = a0 * v;
        let k2 = ah * (v + &k1 * C64::new(h / 2.0, 0.0));
        let k3 = ah * (v + &k2 * C64::new(h / 2.0, 0.0));
        let k4 = a1 * (v + &k3 * C64::new(h, 0.0));
        v + (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0)
    };
    let mut s: f64 = 0.0;
    let mut v = CMatrix::identity(n, n);
    let mut h: f64 = 1.0 / 16.0;
    let mut a_s = generator(0.0)?;
    let mut steps = 0;
    let mut total_error = 0.0;
    let mut attempts = 0;
    while s < 1.0 {
        attempts += 1;
        if attempts > opts.max_steps || h < 1e-10 {
            return Err(Error::IntegrationDiverged { at: s });
        }
        h = h.min(1.0 - s);
        let a_q1 = generator(s + h / 4.0)?;
        let a_mid = generator(s + h / 2.0)?;
        let a_q3 = generator(s + 3.0 * h / 4.0)?;
        let a_end = generator(s + h)?;
        let full = rk4(&a_s, &a_mid, &a_end, &v, h);
        let half = rk4(&a_s, &a_q1, &a_mid, &v, h / 2.0);
        let two = rk4(&a_mid, &a_q3, &a_end, &half, h / 2.0);
        let err = max_abs(&(&two - &full)) / 15.0;
        if !err.is_finite() {
            return Err(Error::IntegrationDiverged { at: s });
        }
        let scale = 1.0 + max_abs(&v);
        if err <= opts.tol * scale {
            v = &two + (&two - &full) * C64::new(1.0 / 15.0, 0.0);
            s += h;
            steps += 1;
            total_error += err;
            a_s = a_end;
            let grow = if err > 0.0 {
                0.9 * (opts.tol * scale / err).powf(0.2)
            } else {
                2.0
            };
            h *= grow.clamp(0.2, 2.0);
        } else {
            h *= (0.9 * (opts.tol * scale / err).powf(0.2)).clamp(0.1, 0.9);
        }
        if s > 1.0 - 1e-14 {
            s = 1.0;
        }
    }
    Ok(TransportResult {
        matrix: v,
        error_estimate: total_error,
        steps,
    })
}
