//! Null space and closedness of the Chern-Ricci form.

use serde::{Deserialize, Serialize};

use super::field::{ChartPoint, MetricField};
use super::jet::{wirtinger_expand, wirtinger_jet_with, FdScheme};
use super::pack::chern_pack;
use crate::error::{Error, Result};
use crate::linalg::{generalized_hermitian_eigen, CMatrix, C64};

/// Eigenvalues below `NULL_CUTOFF * max(λ_max, 1e-30)` count as null.
pub const NULL_CUTOFF: f64 = 1e-7;
/// Eigenvalues below `-(INDEFINITE_CUTOFF * max|λ| + INDEFINITE_FLOOR)` signal indefiniteness.
pub const INDEFINITE_CUTOFF: f64 = 1e-6;
pub const INDEFINITE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoNullSpace {
    /// Number of non-null eigenvalues.
    pub rank: usize,
    /// `g`-orthonormal basis of the null space.
    pub basis: Vec<Vec<C64>>,
    /// Full spectrum relative to `g`, ascending.
    pub spectrum: Vec<f64>,
    pub cutoff: f64,
}

pub fn rho_nullspace(rho: &CMatrix, g: &CMatrix) -> Result<RhoNullSpace> {
    rho_nullspace_with(rho, g, NULL_CUTOFF)
}

pub fn rho_nullspace_with(rho: &CMatrix, g: &CMatrix, rel_cutoff: f64) -> Result<RhoNullSpace> {
    let (spectrum, vectors) = generalized_hermitian_eigen(rho, g)?;
    let largest = spectrum.last().cloned().unwrap_or(0.0);
    let magnitude = spectrum.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if spectrum[0] < -(INDEFINITE_CUTOFF * magnitude + INDEFINITE_FLOOR) {
        return Err(Error::IndefiniteRho {
            eigenvalue: spectrum[0],
        });
    }
    let cutoff = rel_cutoff * largest.max(1e-30);
    let basis: Vec<Vec<C64>> = spectrum
        .iter()
        .zip(vectors)
        .filter(|(v, _)| **v < cutoff)
        .map(|(_, x)| x)
        .collect();
    Ok(RhoNullSpace {
        rank: spectrum.len() - basis.len(),
        basis,
        spectrum,
        cutoff,
    })
}

/// Max-norm of `dρ` at `point`, with ρ differentiated as a field: the outer
/// difference quotients use ρ recomputed from fresh jets at every node.
pub fn rho_closedness_residual(field: &MetricField, point: &ChartPoint) -> Result<f64> {
    let inner = FdScheme::default();
    // the inner jets carry noise far above round-off, so no convergence check outside
    let outer = FdScheme {
        steps: [2e-2, 2e-2, 2e-2],
        levels: 2,
        ..FdScheme::default()
    };
    let n = field.dim;
    let rho_at = |z: &[C64]| -> Result<Vec<C64>> {
        let jet = wirtinger_jet_with(field, &ChartPoint::new(z.to_vec()), 2, &inner)?;
        let rho = chern_pack(&jet)?.rho;
        Ok(rho.transpose().iter().cloned().collect())
    };
    let inside = |z: &[C64]| field.contains(z);
    let fj = wirtinger_expand(&rho_at, point, 1, &outer, &inside, &field.name)?;
    let mut unit = vec![0u8; n];
    let mut d_holo = Vec::with_capacity(n);
    let mut d_anti = Vec::with_capacity(n);
    let zero = vec![0u8; n];
    for a in 0..n {
        unit[a] = 1;
        d_holo.push(fj.derivative(&unit, &zero).expect("order 1").to_vec());
        d_anti.push(fj.derivative(&zero, &unit).expect("order 1").to_vec());
        unit[a] = 0;
    }
    let at = |d: &Vec<C64>, i: usize, j: usize| d[i * n + j];
    let mut worst = 0.0_f64;
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                // (∂ρ)_{mij̄} and (∂̄ρ)_{ij̄m̄}
                let holo = at(&d_holo[m], i, j) - at(&d_holo[i], m, j);
                let anti = at(&d_anti[m], i, j) - at(&d_anti[j], i, m);
                worst = worst.max(holo.norm()).max(anti.norm());
            }
        }
    }
    Ok(worst)
}
