//! Small dense complex linear algebra helpers on top of `nalgebra`.
//!
//! Quadratic forms follow the index convention of the geometry code: a
//! Hermitian matrix `a` acts on a (1,0)-vector `xi` as
//! `a(xi, xi) = sum_ij a[(i, j)] xi[i] conj(xi[j])`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_slice(v: &[C64]) -> f64 {
    v.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Max-norm of `m - m^H`.
pub fn hermitian_residual(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).map(|z| z * 0.5)
}

/// Ratio of extreme singular values; infinite for singular input.
pub fn condition_number(m: &CMatrix) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Inverse of `m`, rejected when the condition number exceeds `max_condition`.
pub fn inverse_checked(m: &CMatrix, max_condition: f64) -> Result<CMatrix> {
    let condition = condition_number(m);
    if !condition.is_finite() || condition > max_condition {
        return Err(Error::SingularMetric { condition });
    }
    m.clone().try_inverse().ok_or(Error::SingularMetric { condition })
}

/// `g(a, b) = sum_ij g_ij a^i conj(b^j)`.
pub fn g_inner(g: &CMatrix, a: &[C64], b: &[C64]) -> C64 {
    let n = a.len();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += g[(i, j)] * a[i] * b[j].conj();
        }
    }
    acc
}

pub fn g_norm(g: &CMatrix, a: &[C64]) -> f64 {
    g_inner(g, a, a).re.max(0.0).sqrt()
}

/// Eigen-decomposition of the Hermitian form `a` relative to the positive
/// form `g`. Eigenvalues come back ascending; each eigenvector is a
/// (1,0)-vector normalised to unit `g`-length.
pub fn generalized_hermitian_eigen(a: &CMatrix, g: &CMatrix) -> Result<(Vec<f64>, Vec<Vec<C64>>)> {
    let n = g.nrows();
    if !is_positive_definite(g) {
        return Err(Error::SingularMetric {
            condition: f64::INFINITY,
        });
    }
    // In w = conj(xi) the forms read w^H a w and w^H g w.
    let chol = g.clone().cholesky().ok_or(Error::SingularMetric {
        condition: f64::INFINITY,
    })?;
    let l = chol.l();
    let l_inv = l.clone().try_inverse().ok_or(Error::SingularMetric {
        condition: f64::INFINITY,
    })?;
    let reduced = hermitian_part(&(&l_inv * a * l_inv.adjoint()));
    let eig = reduced.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let back = l_inv.adjoint();
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for idx in order {
        values.push(eig.eigenvalues[idx]);
        let w = &back * eig.eigenvectors.column(idx);
        let xi: Vec<C64> = w.iter().map(|z| z.conj()).collect();
        let norm = g_norm(g, &xi);
        vectors.push(xi.into_iter().map(|z| z / norm).collect());
    }
    Ok((values, vectors))
}

/// Orthonormalises `vectors` in the `g` inner product, dropping vectors whose
/// residual norm falls below `tol` times their original norm.
pub fn gram_schmidt(g: &CMatrix, vectors: &[Vec<C64>], tol: f64) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for v in vectors {
        let original = g_norm(g, v);
        if original == 0.0 {
            continue;
        }
        let mut w = v.clone();
        // two passes for numerical orthogonality
        for _ in 0..2 {
            for b in &basis {
                let coef = g_inner(g, &w, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= coef * bi;
                }
            }
        }
        let norm = g_norm(g, &w);
        if norm > tol * original {
            basis.push(w.into_iter().map(|z| z / norm).collect());
        }
    }
    basis
}

/// Sine of the Hermitian angle between two nonzero vectors in the `g` metric.
pub fn hermitian_angle(g: &CMatrix, a: &[C64], b: &[C64]) -> f64 {
    let bb = g_inner(g, b, b).re;
    let coef = g_inner(g, a, b) / bb;
    let residual: Vec<C64> = a.iter().zip(b).map(|(x, y)| x - coef * y).collect();
    (g_norm(g, &residual) / g_norm(g, a)).min(1.0)
}

/// Largest principal angle (as a sine) between two subspaces given by spanning
/// sets. Subspaces of different dimension are at angle 1.
pub fn subspace_angle(g: &CMatrix, a: &[Vec<C64>], b: &[Vec<C64>]) -> f64 {
    let qa = gram_schmidt(g, a, 1e-12);
    let qb = gram_schmidt(g, b, 1e-12);
    if qa.len() != qb.len() {
        return 1.0;
    }
    let mut worst: f64 = 0.0;
    for (from, onto) in [(&qa, &qb), (&qb, &qa)] {
        for v in from.iter() {
            let mut w = v.clone();
            for u in onto.iter() {
                let coef = g_inner(g, &w, u);
                for (wi, ui) in w.iter_mut().zip(u) {
                    *wi -= coef * ui;
                }
            }
            worst = worst.max(g_norm(g, &w));
        }
    }
    worst.min(1.0)
}

/// Right kernel of a (possibly tall) matrix via singular values.
#[derive(Debug, Clone)]
pub struct KernelSplit {
    /// Euclidean-orthonormal basis of the numerical kernel.
    pub kernel: Vec<Vec<C64>>,
    /// All singular values, descending.
    pub singular_values: Vec<f64>,
    pub smallest_retained: Option<f64>,
    pub largest_discarded: Option<f64>,
}

/// Splits the right singular vectors of `m` into kernel and range by the
/// relative cutoff `sigma < rel_cutoff * sigma_max`.
pub fn kernel_by_svd(m: &CMatrix, rel_cutoff: f64) -> KernelSplit {
    kernel_by_svd_floor(m, rel_cutoff, 0.0)
}

/// As [`kernel_by_svd`], also treating `sigma < abs_floor` as kernel.
pub fn kernel_by_svd_floor(m: &CMatrix, rel_cutoff: f64, abs_floor: f64) -> KernelSplit {
    let cols = m.ncols();
    // pad so the SVD returns a full set of right singular vectors
    let padded = if m.nrows() < cols {
        let mut p = CMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    let sigma_max = order.first().map(|&i| svd.singular_values[i]).unwrap_or(0.0);
    let threshold = (rel_cutoff * sigma_max).max(abs_floor);
    let mut split = KernelSplit {
        kernel: Vec::new(),
        singular_values: order.iter().map(|&i| svd.singular_values[i]).collect(),
        smallest_retained: None,
        largest_discarded: None,
    };
    for &idx in &order {
        let sigma = svd.singular_values[idx];
        if sigma_max > 0.0 && sigma >= threshold && sigma > 0.0 {
            split.smallest_retained = Some(sigma);
        } else {
            if split.largest_discarded.is_none() {
                split.largest_discarded = Some(sigma);
            }
            split.kernel.push(v_t.row(idx).iter().map(|z| z.conj()).collect());
        }
    }
    split
}

/// Whether the Hermitian part of `m` has only positive eigenvalues.
pub fn is_positive_definite(m: &CMatrix) -> bool {
    smallest_eigenvalue(m) > 0.0
}

pub fn smallest_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_part(m)
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generalized_eigen_diagonal() {
        let a = CMatrix::from_diagonal(&DVector::from_vec(vec![c(2.0, 0.0), c(6.0, 0.0)]));
        let g = CMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0, 0.0), c(2.0, 0.0)]));
        let (vals, vecs) = generalized_hermitian_eigen(&a, &g).unwrap();
        assert!((vals[0] - 2.0).abs() < 1e-12);
        assert!((vals[1] - 3.0).abs() < 1e-12);
        assert!((g_norm(&g, &vecs[1]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvectors_use_xi_convention() {
        // rank-one form, the null eigenvector must satisfy a(v, v) = 0
        let a = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(1.0, 0.0)]);
        let g = CMatrix::identity(2, 2);
        let (vals, vecs) = generalized_hermitian_eigen(&a, &g).unwrap();
        assert!(vals[0].abs() < 1e-12);
        let q = g_inner(&a, &vecs[0], &vecs[0]);
        assert!(q.norm() < 1e-12);
    }

    #[test]
    fn kernel_of_rank_one() {
        let m = CMatrix::from_row_slice(1, 2, &[c(1.0, 0.0), c(1.0, 0.0)]);
        let split = kernel_by_svd(&m, 1e-6);
        assert_eq!(split.kernel.len(), 1);
        let v = &split.kernel[0];
        assert!((v[0] + v[1]).norm() < 1e-12);
    }

    #[test]
    fn zero_matrix_kernel_is_everything() {
        let split = kernel_by_svd(&CMatrix::zeros(4, 2), 1e-6);
        assert_eq!(split.kernel.len(), 2);
        assert!(split.smallest_retained.is_none());
    }

    #[test]
    fn ill_conditioned_rejected() {
        let m = CMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0, 0.0), c(1e-13, 0.0)]));
        assert!(matches!(inverse_checked(&m, 1e12), Err(Error::SingularMetric { .. })));
    }

    #[test]
    fn angles() {
        let g = CMatrix::identity(2, 2);
        let a = vec![c(1.0, 0.0), c(0.0, 0.0)];
        let b = vec![c(0.0, 2.0), c(0.0, 0.0)];
        assert!(hermitian_angle(&g, &a, &b) < 1e-15);
        let e = vec![c(0.0, 0.0), c(1.0, 0.0)];
        assert!((subspace_angle(&g, &[a.clone()], &[e]) - 1.0).abs() < 1e-15);
        assert_eq!(subspace_angle(&g, &[a.clone()], &[a.clone(), b]), 0.0);
        let e2 = vec![c(0.0, 0.0), c(0.0, 1.0)];
        assert_eq!(subspace_angle(&g, &[a.clone()], &[a.clone(), e2]), 1.0);
    }
}
