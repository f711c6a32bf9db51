//! Truncated multivariate Taylor polynomials in Wirtinger variables.
//!
//! A jet of a function `f` at a point `p` is stored as a polynomial in
//! `u_a = z_a - p_a` and `v_a = conj(z_a - p_a)`, treated as independent
//! variables, truncated at a fixed total degree. Products, Wirtinger
//! derivatives and conjugation act coefficient-wise, so every curvature
//! expression can be differentiated exactly from finite jet data.
//!
//! Variable `a < n` is `u_a`; variable `n + a` is `v_a`.

use std::collections::HashMap;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::{Arc, Mutex, OnceLock};

use crate::linalg::C64;

/// Monomial basis of a given number of complex dimensions and degree.
#[derive(Debug)]
pub struct Basis {
    pub dim: usize,
    pub degree: usize,
    exponents: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    /// (a, b, a*b) for all pairs whose product survives truncation.
    products: Vec<(u32, u32, u32)>,
    /// For each variable: (source monomial, target monomial, factor).
    derivatives: Vec<Vec<(u32, u32, f64)>>,
    /// Target index of each monomial under u <-> v.
    swapped: Vec<u32>,
}

impl Basis {
    /// Shared basis for `dim` complex dimensions truncated at `degree`.
    pub fn shared(dim: usize, degree: usize) -> Arc<Basis> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Basis>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("basis cache poisoned");
        guard
            .entry((dim, degree))
            .or_insert_with(|| Arc::new(Basis::build(dim, degree)))
            .clone()
    }

    fn build(dim: usize, degree: usize) -> Basis {
        let nvars = 2 * dim;
        let mut exponents = Vec::new();
        for total in 0..=degree {
            let mut current = vec![0u8; nvars];
            enumerate(&mut exponents, &mut current, 0, total);
        }
        let index: HashMap<Vec<u8>, usize> = exponents.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let total_degree = |e: &[u8]| e.iter().map(|&x| x as usize).sum::<usize>();
        let mut products = Vec::new();
        for (a, ea) in exponents.iter().enumerate() {
            for (b, eb) in exponents.iter().enumerate() {
                if total_degree(ea) + total_degree(eb) > degree {
                    continue;
                }
                let prod: Vec<u8> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                products.push((a as u32, b as u32, index[&prod] as u32));
            }
        }
        let mut derivatives = vec![Vec::new(); nvars];
        for (var, list) in derivatives.iter_mut().enumerate() {
            for (src, e) in exponents.iter().enumerate() {
                if e[var] == 0 {
                    continue;
                }
                let mut target = e.clone();
                target[var] -= 1;
                list.push((src as u32, index[&target] as u32, e[var] as f64));
            }
        }
        let swapped = exponents
            .iter()
            .map(|e| {
                let mut s = e[dim..].to_vec();
                s.extend_from_slice(&e[..dim]);
                index[&s] as u32
            })
            .collect();
        Basis {
            dim,
            degree,
            exponents,
            index,
            products,
            derivatives,
            swapped,
        }
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[Vec<u8>] {
        &self.exponents
    }

    pub fn index_of(&self, exponent: &[u8]) -> Option<usize> {
        self.index.get(exponent).copied()
    }
}

fn enumerate(out: &mut Vec<Vec<u8>>, current: &mut Vec<u8>, var: usize, remaining: usize) {
    if var + 1 == current.len() {
        current[var] = remaining as u8;
        out.push(current.clone());
        current[var] = 0;
        return;
    }
    for k in (0..=remaining).rev() {
        current[var] = k as u8;
        enumerate(out, current, var + 1, remaining - k);
    }
    current[var] = 0;
}

/// Truncated polynomial with complex coefficients.
#[derive(Debug, Clone)]
pub struct Poly {
    basis: Arc<Basis>,
    coeffs: Vec<C64>,
}

impl Poly {
    pub fn zero(basis: &Arc<Basis>) -> Poly {
        Poly {
            basis: basis.clone(),
            coeffs: vec![C64::new(0.0, 0.0); basis.len()],
        }
    }

    pub fn constant(basis: &Arc<Basis>, value: C64) -> Poly {
        let mut p = Poly::zero(basis);
        p.coeffs[0] = value;
        p
    }

    pub fn from_coeffs(basis: &Arc<Basis>, coeffs: Vec<C64>) -> Poly {
        assert_eq!(coeffs.len(), basis.len());
        Poly {
            basis: basis.clone(),
            coeffs,
        }
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }

    /// Value at the expansion point.
    pub fn value(&self) -> C64 {
        self.coeffs[0]
    }

    /// Wirtinger derivative with respect to variable `var` (`u_a` or `v_a`).
    pub fn derivative(&self, var: usize) -> Poly {
        let mut out = Poly::zero(&self.basis);
        for &(src, dst, factor) in &self.basis.derivatives[var] {
            out.coeffs[dst as usize] += self.coeffs[src as usize] * factor;
        }
        out
    }

    /// `d/du_a`.
    pub fn d_holo(&self, a: usize) -> Poly {
        self.derivative(a)
    }

    /// `d/dv_a`.
    pub fn d_anti(&self, a: usize) -> Poly {
        self.derivative(self.basis.dim + a)
    }

    /// Jet of the complex conjugate function.
    pub fn conj(&self) -> Poly {
        let mut out = Poly::zero(&self.basis);
        for (i, z) in self.coeffs.iter().enumerate() {
            out.coeffs[self.basis.swapped[i] as usize] = z.conj();
        }
        out
    }

    pub fn scale(&self, s: C64) -> Poly {
        Poly {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().map(|z| z * s).collect(),
        }
    }

    /// `self += a * b`, the workhorse of tensor contractions.
    pub fn add_product(&mut self, a: &Poly, b: &Poly) {
        for &(x, y, z) in &self.basis.products {
            self.coeffs[z as usize] += a.coeffs[x as usize] * b.coeffs[y as usize];
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero(&self.basis);
        out.add_product(self, rhs);
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl SubAssign<&Poly> for Poly {
    fn sub_assign(&mut self, rhs: &Poly) {
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
    }
}

/// Square matrix of polynomials.
#[derive(Debug, Clone)]
pub struct PolyMatrix {
    pub n: usize,
    pub entries: Vec<Poly>,
}

impl PolyMatrix {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Poly) -> PolyMatrix {
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(f(i, j));
            }
        }
        PolyMatrix { n, entries }
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i * self.n + j]
    }

    pub fn mul(&self, rhs: &PolyMatrix) -> PolyMatrix {
        let basis = self.entries[0].basis().clone();
        PolyMatrix::from_fn(self.n, |i, j| {
            let mut acc = Poly::zero(&basis);
            for k in 0..self.n {
                acc.add_product(self.get(i, k), rhs.get(k, j));
            }
            acc
        })
    }

    pub fn values(&self) -> nalgebra::DMatrix<C64> {
        nalgebra::DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j).value())
    }

    /// Inverse by Neumann series around the constant part, exact to the
    /// truncation degree. `value_inverse` is the inverse of the constant part.
    pub fn inverse(&self, value_inverse: &nalgebra::DMatrix<C64>) -> PolyMatrix {
        let basis = self.entries[0].basis().clone();
        let n = self.n;
        let a0 = PolyMatrix::from_fn(n, |i, j| Poly::constant(&basis, value_inverse[(i, j)]));
        // nilpotent part N = M - M(0); M^{-1} = sum_k (-A0 N)^k A0
        let nil = PolyMatrix::from_fn(n, |i, j| {
            let mut p = self.get(i, j).clone();
            p.coeffs_mut()[0] = C64::new(0.0, 0.0);
            p
        });
        let step = a0.mul(&nil);
        let step = PolyMatrix {
            n,
            entries: step.entries.iter().map(|p| -p).collect(),
        };
        let mut term = a0.clone();
        let mut total = a0;
        for _ in 0..basis.degree {
            term = step.mul(&term);
            for (t, x) in total.entries.iter_mut().zip(&term.entries) {
                *t += x;
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(basis: &Arc<Basis>, v: usize) -> Poly {
        let mut e = vec![0u8; 2 * basis.dim];
        e[v] = 1;
        let mut p = Poly::zero(basis);
        p.coeffs_mut()[basis.index_of(&e).unwrap()] = C64::new(1.0, 0.0);
        p
    }

    #[test]
    fn basis_sizes() {
        // C(2n + d, d)
        assert_eq!(Basis::shared(1, 3).len(), 10);
        assert_eq!(Basis::shared(2, 3).len(), 35);
        assert_eq!(Basis::shared(3, 2).len(), 28);
    }

    #[test]
    fn product_and_derivative() {
        let b = Basis::shared(1, 3);
        let u = var(&b, 0);
        let v = var(&b, 1);
        // f = u^2 v, df/du = 2 u v, df/dv = u^2
        let f = &(&u * &u) * &v;
        let fu = f.d_holo(0);
        let expect = (&u * &v).scale(C64::new(2.0, 0.0));
        assert!((&fu - &expect).max_abs() < 1e-15);
        assert!((&f.d_anti(0) - &(&u * &u)).max_abs() < 1e-15);
        // truncation kills degree 4
        assert!((&f * &u).max_abs() == 0.0);
    }

    #[test]
    fn conjugation_swaps_variables() {
        let b = Basis::shared(1, 2);
        let u = var(&b, 0);
        let p = (&u * &u).scale(C64::new(0.0, 2.0));
        let q = p.conj();
        let v = var(&b, 1);
        assert!((&q - &(&v * &v).scale(C64::new(0.0, -2.0))).max_abs() < 1e-15);
    }

    #[test]
    fn neumann_inverse() {
        let b = Basis::shared(1, 3);
        let u = var(&b, 0);
        let v = var(&b, 1);
        // m = 1 + u v  =>  1/m = 1 - u v + O(4)
        let one = Poly::constant(&b, C64::new(1.0, 0.0));
        let m = PolyMatrix::from_fn(1, |_, _| &one + &(&u * &v));
        let inv = m.inverse(&nalgebra::DMatrix::from_element(1, 1, C64::new(1.0, 0.0)));
        let expect = &one - &(&u * &v);
        assert!((&inv.entries[0] - &expect).max_abs() < 1e-15);
        let check = m.mul(&inv);
        assert!((&check.entries[0] - &one).max_abs() < 1e-15);
    }

    #[test]
    fn matrix_inverse_roundtrip() {
        let b = Basis::shared(2, 3);
        let u0 = var(&b, 0);
        let v1 = var(&b, 3);
        let m = PolyMatrix::from_fn(2, |i, j| {
            let mut p = Poly::constant(&b, C64::new(if i == j { 2.0 } else { 0.5 }, 0.0));
            if i == 0 {
                p += &(&u0 * &v1);
            }
            if j == 1 {
                p += &u0.scale(C64::new(0.3, -0.1));
            }
            p
        });
        let inv0 = m.values().try_inverse().unwrap();
        let inv = m.inverse(&inv0);
        let prod = m.mul(&inv);
        for i in 0..2 {
            for j in 0..2 {
                let mut target = Poly::zero(&b);
                if i == j {
                    target = Poly::constant(&b, C64::new(1.0, 0.0));
                }
                assert!((prod.get(i, j) - &target).max_abs() < 1e-13);
            }
        }
    }
}
