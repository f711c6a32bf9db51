//! Structure functions of a frame of vector fields.

use serde::{Deserialize, Serialize};

use crate::chart::field::{ChartPoint, VectorField};
use crate::chart::jet::{wirtinger_expand, FdScheme};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, C64};

/// Fields whose smallest singular value falls below this fraction of the largest are dependent.
pub const DEPENDENCE_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketStructure {
    /// Number of fields `m`.
    pub count: usize,
    /// Per point, `c^k_{ij}` flattened as `(i * m + j) * m + k`.
    pub coefficients: Vec<Vec<C64>>,
    /// Largest distance of a bracket from the span of the fields.
    pub out_of_span: f64,
    /// Largest deviation of any coefficient from its value at the first point.
    pub variation: f64,
}

impl BracketStructure {
    pub fn coefficient(&self, point: usize, i: usize, j: usize, k: usize) -> C64 {
        let m = self.count;
        self.coefficients[point][(i * m + j) * m + k]
    }
}

/// Solves `[ξ_i, ξ_j] = c^k_{ij} ξ_k` in the least-squares sense at every point.
pub fn bracket_structure(fields: &[VectorField], points: &[ChartPoint]) -> Result<BracketStructure> {
    let m = fields.len();
    if m == 0 || points.is_empty() {
        return Err(Error::BadParams("bracket_structure needs fields and points".into()));
    }
    let n = fields[0].dim;
    if fields.iter().any(|f| f.dim != n) || points.iter().any(|p| p.dim() != n) {
        return Err(Error::BadParams("fields and points must share one dimension".into()));
    }
    let mut coefficients = Vec::with_capacity(points.len());
    let mut out_of_span: f64 = 0.0;
    for p in points {
        let values: Vec<Vec<C64>> = fields.iter().map(|f| f.eval(p)).collect();
        // jac[f][q][k] = ∂_q ξ_f^k
        let mut jac = Vec::with_capacity(m);
        for f in fields {
            let eval = |z: &[C64]| Ok(f.eval(z));
            let jet = wirtinger_expand(&eval, p, 1, &FdScheme::default(), &|_| true, &f.name)?;
            let zero = vec![0u8; n];
            let mut unit = vec![0u8; n];
            let mut rows = Vec::with_capacity(n);
            for q in 0..n {
                unit[q] = 1;
                rows.push(jet.derivative(&unit, &zero).expect("order 1").to_vec());
                unit[q] = 0;
            }
            jac.push(rows);
        }
        let frame = CMatrix::from_fn(n, m, |k, f| values[f][k]);
        let svd = frame.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if m > n || smin <= DEPENDENCE_CUTOFF * smax.max(f64::MIN_POSITIVE) {
            return Err(Error::DependentFields { sigma_min: smin });
        }
        let mut c = vec![C64::new(0.0, 0.0); m * m * m];
        for i in 0..m {
            for j in 0..m {
                let bracket = CVector::from_fn(n, |k, _| {
                    (0..n)
                        .map(|q| values[i][q] * jac[j][q][k] - values[j][q] * jac[i][q][k])
                        .sum::<C64>()
                });
                let sol = svd.solve(&bracket, 0.0).map_err(|e| Error::BadParams(e.to_string()))?;
                out_of_span = out_of_span.max((&frame * &sol - &bracket).camax());
                for k in 0..m {
                    c[(i * m + j) * m + k] = sol[k];
                }
            }
        }
        coefficients.push(c);
    }
    let variation = coefficients
        .iter()
        .flat_map(|c| c.iter().zip(&coefficients[0]).map(|(a, b)| (a - b).norm()))
        .fold(0.0, f64::max);
    Ok(BracketStructure {
        count: m,
        coefficients,
        out_of_span,
        variation,
    })
}
