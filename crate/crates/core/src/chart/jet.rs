//! Finite-difference Wirtinger jets.
//!
//! Real partials in `x_a = Re z_a`, `y_a = Im z_a` come from fourth-order
//! central stencils (tensor products for mixed partials) at three step sizes
//! `h, h/2, h/4`, combined by Richardson extrapolation. Wirtinger derivatives
//! are then assembled from `d_a = (d_x - i d_y) / 2`, `d_ā = (d_x + i d_y) / 2`.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::field::{ChartPoint, MetricField};
use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_residual, max_abs, CMatrix, C64};
use crate::poly::{Basis, Poly, PolyMatrix};

/// Largest jet order the engine supports.
pub const MAX_ORDER: usize = 3;

/// Step sizes and refinement policy of the difference scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdScheme {
    /// Base step for derivatives of total order 1, 2, 3, scaled by `1 + |p|`.
    pub steps: [f64; 3],
    /// 3 for full refinement with a convergence check, 2 for a cheap estimate.
    pub levels: usize,
    /// Tolerance of the Hermitian-symmetry check on metric evaluations.
    pub hermitian_tol: f64,
}

impl Default for FdScheme {
    fn default() -> Self {
        FdScheme {
            steps: [2e-3, 8e-3, 2e-2],
            levels: 3,
            hermitian_tol: 1e-10,
        }
    }
}

impl FdScheme {
    /// Two-level scheme without convergence checks, for inner loops.
    pub fn fast() -> FdScheme {
        FdScheme {
            levels: 2,
            ..FdScheme::default()
        }
    }

    /// Same scheme with all steps multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> FdScheme {
        FdScheme {
            steps: self.steps.map(|h| h * factor),
            ..self.clone()
        }
    }

    fn step(&self, order: usize, point: &[C64]) -> f64 {
        let scale = 1.0 + point.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        self.steps[order - 1] * scale
    }
}

// Stencils as (offset, weight) with the 1/h^k factor left out.
const D1: &[(i32, f64)] = &[(-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0)];
const D2: &[(i32, f64)] = &[
    (-2, -1.0 / 12.0),
    (-1, 16.0 / 12.0),
    (0, -30.0 / 12.0),
    (1, 16.0 / 12.0),
    (2, -1.0 / 12.0),
];
const D3: &[(i32, f64)] = &[
    (-3, 1.0 / 8.0),
    (-2, -1.0),
    (-1, 13.0 / 8.0),
    (1, -13.0 / 8.0),
    (2, 1.0),
    (3, -1.0 / 8.0),
];
const D0: &[(i32, f64)] = &[(0, 1.0)];

fn stencil(order: u8) -> &'static [(i32, f64)] {
    match order {
        0 => D0,
        1 => D1,
        2 => D2,
        3 => D3,
        _ => unreachable!("stencil order above 3"),
    }
}

/// Derivatives of a vector-valued function at one point, one entry per
/// monomial of the shared basis (derivative values, not Taylor coefficients).
#[derive(Debug, Clone)]
pub struct FunctionJet {
    pub basis: Arc<Basis>,
    pub values: Vec<Vec<C64>>,
    pub errors: Vec<Vec<f64>>,
}

impl FunctionJet {
    pub fn order(&self) -> usize {
        self.basis.degree
    }

    /// Taylor polynomial of component `comp`.
    pub fn poly(&self, comp: usize) -> Poly {
        let coeffs = self
            .basis
            .exponents()
            .iter()
            .zip(&self.values)
            .map(|(e, v)| v[comp] / factorial_product(e))
            .collect();
        Poly::from_coeffs(&self.basis, coeffs)
    }

    /// Derivative for holomorphic exponents `holo` and antiholomorphic `anti`.
    pub fn derivative(&self, holo: &[u8], anti: &[u8]) -> Option<&[C64]> {
        let mut e = holo.to_vec();
        e.extend_from_slice(anti);
        self.basis.index_of(&e).map(|i| self.values[i].as_slice())
    }

    pub fn max_error(&self) -> f64 {
        self.errors.iter().flat_map(|v| v.iter()).fold(0.0, |a, &b| a.max(b))
    }
}

pub(crate) fn factorial_product(e: &[u8]) -> f64 {
    e.iter().map(|&k| (1..=k as u32).product::<u32>() as f64).product()
}

/// Expansion of the Wirtinger operator with exponent `e` (holomorphic then
/// antiholomorphic) into real partials (x exponents then y exponents).
fn wirtinger_to_real(e: &[u8], n: usize) -> Vec<(Vec<u8>, C64)> {
    let mut terms: HashMap<Vec<u8>, C64> = HashMap::new();
    terms.insert(vec![0u8; 2 * n], c(1.0, 0.0));
    for a in 0..n {
        for (count, sign) in [(e[a], -1.0), (e[n + a], 1.0)] {
            for _ in 0..count {
                let mut next: HashMap<Vec<u8>, C64> = HashMap::new();
                for (k, coef) in &terms {
                    let mut kx = k.clone();
                    kx[a] += 1;
                    *next.entry(kx).or_insert(c(0.0, 0.0)) += coef * 0.5;
                    let mut ky = k.clone();
                    ky[n + a] += 1;
                    *next.entry(ky).or_insert(c(0.0, 0.0)) += coef * c(0.0, 0.5 * sign);
                }
                terms = next;
            }
        }
    }
    let mut out: Vec<(Vec<u8>, C64)> = terms.into_iter().filter(|(_, v)| v.norm() > 0.0).collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

type Memo = HashMap<(usize, Vec<i32>), Arc<Vec<C64>>>;

struct Evaluator<'a, F> {
    f: &'a F,
    point: &'a [C64],
    scheme: &'a FdScheme,
    memo: Memo,
}

impl<F> Evaluator<'_, F>
where
    F: Fn(&[C64]) -> Result<Vec<C64>>,
{
    /// `offsets` are in units of `h_order / 4`.
    fn at(&mut self, order: usize, offsets: &[i32]) -> Result<Arc<Vec<C64>>> {
        let key = (
            if offsets.iter().all(|&o| o == 0) { 0 } else { order },
            offsets.to_vec(),
        );
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        let n = self.point.len();
        let quarter = if order == 0 {
            0.0
        } else {
            self.scheme.step(order, self.point) / 4.0
        };
        let z: Vec<C64> = (0..n)
            .map(|a| self.point[a] + c(offsets[a] as f64 * quarter, offsets[n + a] as f64 * quarter))
            .collect();
        let value = Arc::new((self.f)(&z)?);
        self.memo.insert(key, value.clone());
        Ok(value)
    }

    /// Real partial with exponents `gamma` at refinement `level` (step h / 2^level).
    fn partial(&mut self, gamma: &[u8], level: usize) -> Result<Vec<C64>> {
        let order: usize = gamma.iter().map(|&k| k as usize).sum();
        let center = self.at(0, &vec![0; gamma.len()])?;
        if order == 0 {
            return Ok((*center).clone());
        }
        let h = self.scheme.step(order, self.point) / (1 << level) as f64;
        let unit = 4 >> level; // units of h_order / 4 per stencil step
        let mut acc = vec![c(0.0, 0.0); center.len()];
        let mut offsets = vec![0i32; gamma.len()];
        self.accumulate(gamma, 0, 1.0, &mut offsets, unit, order, &mut acc)?;
        let scale = 1.0 / h.powi(order as i32);
        Ok(acc.into_iter().map(|v| v * scale).collect())
    }

    #[allow(clippy::too_many_arguments)]
    fn accumulate(
        &mut self,
        gamma: &[u8],
        var: usize,
        weight: f64,
        offsets: &mut Vec<i32>,
        unit: i32,
        order: usize,
        acc: &mut [C64],
    ) -> Result<()> {
        if var == gamma.len() {
            let v = self.at(order, offsets)?;
            for (a, x) in acc.iter_mut().zip(v.iter()) {
                *a += x * weight;
            }
            return Ok(());
        }
        for &(off, w) in stencil(gamma[var]) {
            offsets[var] = off * unit;
            self.accumulate(gamma, var + 1, weight * w, offsets, unit, order, acc)?;
        }
        offsets[var] = 0;
        Ok(())
    }
}

fn stencil_abs_sum(gamma: &[u8]) -> f64 {
    gamma
        .iter()
        .map(|&k| stencil(k).iter().map(|(_, w)| w.abs()).sum::<f64>())
        .product()
}

/// All Wirtinger derivatives up to `order` of `f` at `point`.
///
/// `f` is called only at stencil nodes; `inside` rejects nodes outside the domain.
pub fn wirtinger_expand<F>(
    f: &F,
    point: &[C64],
    order: usize,
    scheme: &FdScheme,
    inside: &dyn Fn(&[C64]) -> bool,
    name: &str,
) -> Result<FunctionJet>
where
    F: Fn(&[C64]) -> Result<Vec<C64>>,
{
    if order > MAX_ORDER {
        return Err(Error::BadParams(format!("jet order {order} exceeds {MAX_ORDER}")));
    }
    let n = point.len();
    let checked = |z: &[C64]| -> Result<Vec<C64>> {
        if !inside(z) {
            return Err(Error::DomainViolation {
                field: name.to_string(),
                node: z.iter().map(|w| [w.re, w.im]).collect(),
            });
        }
        f(z)
    };
    let mut ev = Evaluator {
        f: &checked,
        point,
        scheme,
        memo: HashMap::new(),
    };
    let basis = Basis::shared(n, order);
    let center = ev.at(0, &vec![0; 2 * n])?;
    let m = center.len();
    let magnitude = center.iter().fold(0.0_f64, |a, z| a.max(z.norm())).max(1e-300);

    // Real partials with value and error, shared across Wirtinger monomials.
    let mut real: HashMap<Vec<u8>, (Vec<C64>, Vec<f64>)> = HashMap::new();
    let mut values = Vec::with_capacity(basis.len());
    let mut errors = Vec::with_capacity(basis.len());
    for e in basis.exponents() {
        let mut value = vec![c(0.0, 0.0); m];
        let mut error = vec![0.0; m];
        for (gamma, coef) in wirtinger_to_real(e, n) {
            if !real.contains_key(&gamma) {
                let entry = refine(&mut ev, &gamma, scheme, magnitude)?;
                real.insert(gamma.clone(), entry);
            }
            let (v, err) = &real[&gamma];
            for k in 0..m {
                value[k] += coef * v[k];
                error[k] += coef.norm() * err[k];
            }
        }
        values.push(value);
        errors.push(error);
    }
    Ok(FunctionJet { basis, values, errors })
}

fn refine<F>(ev: &mut Evaluator<'_, F>, gamma: &[u8], scheme: &FdScheme, magnitude: f64) -> Result<(Vec<C64>, Vec<f64>)>
where
    F: Fn(&[C64]) -> Result<Vec<C64>>,
{
    let order: usize = gamma.iter().map(|&k| k as usize).sum();
    if order == 0 {
        let v = ev.partial(gamma, 0)?;
        let m = v.len();
        return Ok((v, vec![0.0; m]));
    }
    let d: Vec<Vec<C64>> = (0..scheme.levels)
        .map(|level| ev.partial(gamma, level))
        .collect::<Result<_>>()?;
    let m = d[0].len();
    let rich = |a: &[C64], b: &[C64]| -> Vec<C64> { a.iter().zip(b).map(|(x, y)| (y * 16.0 - x) / 15.0).collect() };
    if scheme.levels < 3 {
        let value = rich(&d[0], &d[1]);
        let err = d[0].iter().zip(&d[1]).map(|(x, y)| (x - y).norm() / 15.0).collect();
        return Ok((value, err));
    }
    let r01 = rich(&d[0], &d[1]);
    let r12 = rich(&d[1], &d[2]);
    let finest = scheme.step(order, ev.point) / 4.0;
    let noise = 1e3 * f64::EPSILON * magnitude * stencil_abs_sum(gamma) / finest.powi(order as i32);
    let mut coarse = 0.0_f64;
    let mut fine = 0.0_f64;
    for k in 0..m {
        coarse = coarse.max((d[0][k] - d[1][k]).norm());
        fine = fine.max((d[1][k] - d[2][k]).norm());
    }
    if fine > coarse && fine > noise {
        return Err(Error::NotConverged { coarse, fine });
    }
    let err = (0..m).map(|k| (r12[k] - r01[k]).norm()).collect();
    Ok((r12, err))
}

/// Wirtinger jet of a metric: every mixed derivative of `g_{ij̄}` up to `order`.
#[derive(Debug, Clone)]
pub struct MetricJet {
    pub point: ChartPoint,
    pub order: usize,
    pub dim: usize,
    pub g: CMatrix,
    /// Indexed like `basis.exponents()`.
    pub derivs: Vec<CMatrix>,
    pub errors: Vec<DMatrix<f64>>,
    /// Conjugation-symmetry defect of the raw derivatives before symmetrisation.
    pub hermitian_residual: f64,
    basis: Arc<Basis>,
}

impl MetricJet {
    /// Jet from Taylor data, symmetrised so that `g_{ij̄}` is Hermitian to all orders.
    pub fn from_poly(point: ChartPoint, taylor: &PolyMatrix, errors: Option<Vec<DMatrix<f64>>>) -> MetricJet {
        let n = taylor.n;
        let basis = taylor.entries[0].basis().clone();
        let mut defect = 0.0_f64;
        let sym = PolyMatrix::from_fn(n, |i, j| {
            let a = taylor.get(i, j);
            let b = taylor.get(j, i).conj();
            defect = defect.max((a - &b).max_abs());
            (a + &b).scale(c(0.5, 0.0))
        });
        let derivs: Vec<CMatrix> = basis
            .exponents()
            .iter()
            .enumerate()
            .map(|(idx, e)| {
                let f = factorial_product(e);
                CMatrix::from_fn(n, n, |i, j| sym.get(i, j).coeffs()[idx] * f)
            })
            .collect();
        let errors = errors.unwrap_or_else(|| vec![DMatrix::zeros(n, n); basis.len()]);
        MetricJet {
            point,
            order: basis.degree,
            dim: n,
            g: derivs[0].clone(),
            derivs,
            errors,
            hermitian_residual: defect,
            basis,
        }
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    /// Taylor polynomials of the components.
    pub fn poly_matrix(&self) -> PolyMatrix {
        let n = self.dim;
        PolyMatrix::from_fn(n, |i, j| {
            let coeffs = self
                .basis
                .exponents()
                .iter()
                .zip(&self.derivs)
                .map(|(e, d)| d[(i, j)] / factorial_product(e))
                .collect();
            Poly::from_coeffs(&self.basis, coeffs)
        })
    }

    /// Derivative of `g` by `d^holo dbar^anti`.
    pub fn derivative(&self, holo: &[u8], anti: &[u8]) -> Option<&CMatrix> {
        let mut e = holo.to_vec();
        e.extend_from_slice(anti);
        self.basis.index_of(&e).map(|i| &self.derivs[i])
    }

    pub fn max_error(&self) -> f64 {
        self.errors.iter().fold(0.0, |a, m| m.iter().fold(a, |b, &x| b.max(x)))
    }

    /// `self + s * other`, on the common lower order.
    pub fn combine(&self, s: f64, other: &MetricJet) -> MetricJet {
        let order = self.order.min(other.order);
        let a = self.truncated(order).poly_matrix();
        let b = other.truncated(order).poly_matrix();
        let sum = PolyMatrix {
            n: a.n,
            entries: a
                .entries
                .iter()
                .zip(&b.entries)
                .map(|(x, y)| x + &y.scale(c(s, 0.0)))
                .collect(),
        };
        MetricJet::from_poly(self.point.clone(), &sum, None)
    }

    /// Lower-order restriction of the jet.
    pub fn truncated(&self, order: usize) -> MetricJet {
        if order >= self.order {
            return self.clone();
        }
        let basis = Basis::shared(self.dim, order);
        let pick = |e: &Vec<u8>| self.basis.index_of(e).expect("sub-basis monomial");
        let derivs: Vec<CMatrix> = basis.exponents().iter().map(|e| self.derivs[pick(e)].clone()).collect();
        let errors = basis.exponents().iter().map(|e| self.errors[pick(e)].clone()).collect();
        MetricJet {
            point: self.point.clone(),
            order,
            dim: self.dim,
            g: self.g.clone(),
            derivs,
            errors,
            hermitian_residual: self.hermitian_residual,
            basis,
        }
    }
}

/// Jet of `field` at `point` with the default scheme.
pub fn wirtinger_jet(field: &MetricField, point: &ChartPoint, order: usize) -> Result<MetricJet> {
    wirtinger_jet_with(field, point, order, &FdScheme::default())
}

pub fn wirtinger_jet_with(
    field: &MetricField,
    point: &ChartPoint,
    order: usize,
    scheme: &FdScheme,
) -> Result<MetricJet> {
    let n = field.dim;
    let fj = metric_function_jet(field, point, order, scheme)?;
    let taylor = PolyMatrix::from_fn(n, |i, j| fj.poly(i * n + j));
    let errors = fj
        .errors
        .iter()
        .map(|e| DMatrix::from_fn(n, n, |i, j| e[i * n + j]))
        .collect();
    Ok(MetricJet::from_poly(point.clone(), &taylor, Some(errors)))
}

/// Raw derivative data of the metric components, flattened row-major.
pub fn metric_function_jet(
    field: &MetricField,
    point: &ChartPoint,
    order: usize,
    scheme: &FdScheme,
) -> Result<FunctionJet> {
    let n = field.dim;
    if point.dim() != n {
        return Err(Error::BadParams(format!(
            "point has {} coordinates, field `{}` has dimension {n}",
            point.dim(),
            field.name
        )));
    }
    if !field.contains(point) {
        return Err(Error::DomainViolation {
            field: field.name.clone(),
            node: point.as_pairs(),
        });
    }
    let tol = scheme.hermitian_tol;
    let eval = |z: &[C64]| -> Result<Vec<C64>> {
        let g = field.eval(z);
        let residual = hermitian_residual(&g);
        if residual > tol * (1.0 + max_abs(&g)) {
            return Err(Error::NonHermitian {
                field: field.name.clone(),
                residual,
            });
        }
        Ok(g.transpose().iter().cloned().collect())
    };
    let inside = |z: &[C64]| field.contains(z);
    wirtinger_expand(&eval, point, order, scheme, &inside, &field.name)
}
