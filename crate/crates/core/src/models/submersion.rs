//! Chern-Ricci form of submersion metrics on `G/H` at the identity coset.

use serde::{Deserialize, Serialize};

use super::algebra::{LieAlgebraData, SubalgebraData};
use super::frame::check_metric;
use crate::chart::field::unit_sphere;
use crate::error::{Error, Result};
use crate::linalg::{
    g_inner, g_norm, generalized_hermitian_eigen, gram_schmidt, kernel_by_svd, subspace_angle, CMatrix, C64,
};
use crate::sampling::{rng, stream};

/// `ρ(ξ, ξ̄)` with `|v|² = 1` below this counts as null.
pub const RHO_NULL: f64 = 1e-10;
/// Component of a unit `v` off the normalizer below this counts as inside.
pub const NORMALIZER_NULL: f64 = 1e-8;

/// Quotient data: `h`-orthonormal basis of `𝔥` and the projection along `𝔥`
/// onto its `h`-orthogonal complement.
struct Quotient {
    sub_basis: Vec<Vec<C64>>,
    proj: CMatrix,
}

fn quotient(alg: &LieAlgebraData, sub: &SubalgebraData, h: &CMatrix) -> Result<Quotient> {
    let n = alg.dim;
    if h.nrows() != n {
        return Err(Error::BadParams(format!("metric on the algebra must be {n}x{n}")));
    }
    check_metric(h)?;
    let sub_basis = gram_schmidt(h, &sub.basis, 1e-12);
    if sub_basis.len() >= n {
        return Err(Error::DegenerateQuotient);
    }
    // p(u) = u - Σ_a h(u, w_a) w_a
    let proj = CMatrix::from_fn(n, n, |k, j| {
        let mut e = vec![C64::new(0.0, 0.0); n];
        e[j] = C64::new(1.0, 0.0);
        let mut v = if k == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
        for w in &sub_basis {
            v -= g_inner(h, &e, w) * w[k];
        }
        v
    });
    Ok(Quotient { sub_basis, proj })
}

/// `|β(ξ)|²` for `β(ξ)(w) = p([v, w])`, `w ∈ 𝔥`, measured with `h`.
pub fn submersion_rho(alg: &LieAlgebraData, sub: &SubalgebraData, h: &CMatrix, v: &[C64]) -> Result<f64> {
    let q = quotient(alg, sub, h)?;
    Ok(rho_with(alg, &q, h, v))
}

fn rho_with(alg: &LieAlgebraData, q: &Quotient, h: &CMatrix, v: &[C64]) -> f64 {
    q.sub_basis
        .iter()
        .map(|w| {
            let b = alg.bracket(v, w);
            let pb: Vec<C64> = (0..alg.dim)
                .map(|k| (0..alg.dim).map(|j| q.proj[(k, j)] * b[j]).sum())
                .collect();
            g_norm(h, &pb).powi(2)
        })
        .sum()
}

/// Matrices `M_a = p ∘ ad(·)(w_a)`, so that `M_a v = p([v, w_a])`.
fn beta_maps(alg: &LieAlgebraData, q: &Quotient) -> Vec<CMatrix> {
    q.sub_basis
        .iter()
        .map(|w| {
            // [v, w] = -ad_w v
            let m = -alg.ad(w);
            &q.proj * m
        })
        .collect()
}

/// Hermitian form `R` with `ρ(v) = Σ R_{ij} v^i conj(v^j)`.
pub fn rho_form(alg: &LieAlgebraData, sub: &SubalgebraData, h: &CMatrix) -> Result<CMatrix> {
    let q = quotient(alg, sub, h)?;
    let ht = h.transpose();
    let n = alg.dim;
    Ok(beta_maps(alg, &q)
        .iter()
        .fold(CMatrix::zeros(n, n), |acc, m| acc + m.adjoint() * &ht * m)
        .transpose())
}

/// `{v : [v, 𝔥] ⊂ 𝔥}`.
pub fn normalizer(alg: &LieAlgebraData, sub: &SubalgebraData) -> Vec<Vec<C64>> {
    let n = alg.dim;
    if sub.dim() == 0 {
        return (0..n).map(|i| alg.basis_vector(i)).collect();
    }
    let h = CMatrix::identity(n, n);
    let q = match quotient(alg, sub, &h) {
        Ok(q) => q,
        // 𝔥 = 𝔤 normalises everything
        Err(_) => return (0..n).map(|i| alg.basis_vector(i)).collect(),
    };
    let maps = beta_maps(alg, &q);
    let mut stacked = CMatrix::zeros(n * maps.len(), n);
    for (a, m) in maps.iter().enumerate() {
        stacked.view_mut((a * n, 0), (n, n)).copy_from(m);
    }
    kernel_by_svd(&stacked, 1e-12).kernel
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizerCheck {
    /// Sine of the largest angle between `Null(R)` and the normalizer.
    pub angle: f64,
    pub samples: usize,
    /// Samples where `ρ(v) < RHO_NULL` and `v ∈ n(𝔥)` disagree.
    pub mismatches: usize,
    /// Largest `ρ(v)` over samples inside the normalizer.
    pub worst_inside: f64,
    /// Smallest `ρ(v) / |v_⊥|²` over samples off the normalizer.
    pub weakest_outside: f64,
    pub dim_null: usize,
    pub dim_normalizer: usize,
    pub dim_sub: usize,
    /// `dim Null(ρ) - dim 𝔥`: the null directions on `𝔤/𝔥`.
    pub quotient_null_dim: usize,
}

impl NormalizerCheck {
    pub fn passed(&self, angle_tol: f64) -> bool {
        self.mismatches == 0 && self.dim_null == self.dim_normalizer && self.angle < angle_tol
    }
}

/// Compares the null space of `ρ` with the normalizer, by eigen-analysis and
/// on `samples` seeded vectors (half drawn from the normalizer).
pub fn null_rho_equals_normalizer_check(
    alg: &LieAlgebraData,
    sub: &SubalgebraData,
    h: &CMatrix,
    seed: u64,
    samples: usize,
) -> Result<NormalizerCheck> {
    let n = alg.dim;
    let q = quotient(alg, sub, h)?;
    let r = rho_form(alg, sub, h)?;
    let id = CMatrix::identity(n, n);
    let (vals, vecs) = generalized_hermitian_eigen(&r, &id)?;
    let top = vals.last().cloned().unwrap_or(0.0).max(1.0);
    let null: Vec<Vec<C64>> = vals
        .iter()
        .zip(vecs)
        .filter(|(l, _)| **l < 1e-10 * top)
        .map(|(_, v)| v)
        .collect();
    let norm_basis = gram_schmidt(&id, &normalizer(alg, sub), 1e-12);
    let angle = subspace_angle(&id, &null, &norm_basis);
    let mut random = rng(seed, stream::ALGEBRA);
    let mut check = NormalizerCheck {
        angle,
        samples,
        mismatches: 0,
        worst_inside: 0.0,
        weakest_outside: f64::INFINITY,
        dim_null: null.len(),
        dim_normalizer: norm_basis.len(),
        dim_sub: q.sub_basis.len(),
        quotient_null_dim: null.len().saturating_sub(q.sub_basis.len()),
    };
    for s in 0..samples {
        let v: Vec<C64> = if s % 2 == 0 && !norm_basis.is_empty() {
            let coef = unit_sphere(norm_basis.len(), &mut random);
            let mut v = vec![C64::new(0.0, 0.0); n];
            for (cf, b) in coef.iter().zip(&norm_basis) {
                for k in 0..n {
                    v[k] += cf * b[k];
                }
            }
            v
        } else {
            unit_sphere(n, &mut random)
        };
        let mut perp = v.clone();
        for b in &norm_basis {
            let cf = g_inner(&id, &perp, b);
            for k in 0..n {
                perp[k] -= cf * b[k];
            }
        }
        let off = g_norm(&id, &perp) / g_norm(&id, &v);
        let value = rho_with(alg, &q, h, &v) / g_norm(&id, &v).powi(2);
        let inside = off < NORMALIZER_NULL;
        if inside {
            check.worst_inside = check.worst_inside.max(value);
        } else {
            check.weakest_outside = check.weakest_outside.min(value / (off * off));
        }
        if inside != (value < RHO_NULL) {
            check.mismatches += 1;
        }
    }
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn identity(n: usize) -> CMatrix {
        CMatrix::identity(n, n)
    }

    #[test]
    fn sl2_borel_value() {
        let sl2 = LieAlgebraData::builtin("sl2").unwrap();
        let borel = SubalgebraData::named(&sl2, "borel").unwrap();
        // p([F, H]) = 2F, p([F, E]) = p(-H) = 0
        let v = submersion_rho(&sl2, &borel, &identity(3), &sl2.basis_vector(2)).unwrap();
        assert!((v - 4.0).abs() < 1e-13);
        let scaled: Vec<C64> = sl2.basis_vector(2).iter().map(|z| z * c(0.0, 2.0)).collect();
        let v = submersion_rho(&sl2, &borel, &identity(3), &scaled).unwrap();
        assert!((v - 16.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_quotient() {
        let sl2 = LieAlgebraData::builtin("sl2").unwrap();
        let full = SubalgebraData::named(&sl2, "full").unwrap();
        let err = submersion_rho(&sl2, &full, &identity(3), &sl2.basis_vector(0));
        assert_eq!(err, Err(Error::DegenerateQuotient));
    }

    #[test]
    fn normalizer_examples() {
        let sl2 = LieAlgebraData::builtin("sl2").unwrap();
        let borel = SubalgebraData::named(&sl2, "borel").unwrap();
        let nb = normalizer(&sl2, &borel);
        assert_eq!(nb.len(), 2);
        assert!(subspace_angle(&identity(3), &nb, &borel.basis) < 1e-12);
        let sum = LieAlgebraData::builtin("abelian_plus_affine").unwrap();
        let e1 = SubalgebraData::named(&sum, "span:1").unwrap();
        let n1 = normalizer(&sum, &e1);
        let expect = vec![sum.basis_vector(0), sum.basis_vector(1)];
        assert!(subspace_angle(&identity(3), &n1, &expect) < 1e-12);
    }
}
