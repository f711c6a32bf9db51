//! Coordinate tensors on `C^n`: plain values and jet-valued (`Poly`) entries.
//!
//! All indices run over `0..n`; storage is row-major in the written index
//! order, e.g. `gamma[[i, j, k]] = Γ^k_{ij}`.

use std::ops::Index;

use serde_json::Value;

use crate::linalg::{CMatrix, C64};
use crate::poly::{Basis, Poly};
use std::sync::Arc;

fn flat(n: usize, idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * n + i)
}

fn unflat(n: usize, rank: usize, mut k: usize) -> Vec<usize> {
    let mut idx = vec![0; rank];
    for slot in (0..rank).rev() {
        idx[slot] = k % n;
        k /= n;
    }
    idx
}

/// Complex tensor with `rank` indices of range `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CTensor {
    pub n: usize,
    pub rank: usize,
    pub data: Vec<C64>,
}

impl CTensor {
    pub fn zeros(n: usize, rank: usize) -> CTensor {
        CTensor {
            n,
            rank,
            data: vec![C64::new(0.0, 0.0); n.pow(rank as u32)],
        }
    }

    pub fn from_fn(n: usize, rank: usize, mut f: impl FnMut(&[usize]) -> C64) -> CTensor {
        let data = (0..n.pow(rank as u32)).map(|k| f(&unflat(n, rank, k))).collect();
        CTensor { n, rank, data }
    }

    pub fn get(&self, idx: &[usize]) -> C64 {
        self.data[flat(self.n, idx)]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    pub fn max_diff(&self, other: &CTensor) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |a, (x, y)| a.max((x - y).norm()))
    }

    pub fn indices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.data.len()).map(move |k| unflat(self.n, self.rank, k))
    }

    /// Rank-2 tensor as a matrix.
    pub fn to_matrix(&self) -> CMatrix {
        assert_eq!(self.rank, 2);
        CMatrix::from_fn(self.n, self.n, |i, j| self.get(&[i, j]))
    }

    pub fn from_matrix(m: &CMatrix) -> CTensor {
        CTensor::from_fn(m.nrows(), 2, |ix| m[(ix[0], ix[1])])
    }

    /// Nested JSON arrays with complex entries as `[re, im]`.
    pub fn to_json(&self) -> Value {
        fn nest(t: &CTensor, prefix: &mut Vec<usize>) -> Value {
            if prefix.len() == t.rank {
                return complex_json(t.get(prefix));
            }
            let mut items = Vec::with_capacity(t.n);
            for i in 0..t.n {
                prefix.push(i);
                items.push(nest(t, prefix));
                prefix.pop();
            }
            Value::Array(items)
        }
        nest(self, &mut Vec::new())
    }
}

impl Index<[usize; 3]> for CTensor {
    type Output = C64;
    fn index(&self, idx: [usize; 3]) -> &C64 {
        &self.data[flat(self.n, &idx)]
    }
}

impl Index<[usize; 4]> for CTensor {
    type Output = C64;
    fn index(&self, idx: [usize; 4]) -> &C64 {
        &self.data[flat(self.n, &idx)]
    }
}

pub fn complex_json(z: C64) -> Value {
    serde_json::json!([z.re, z.im])
}

pub fn matrix_json(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex_json(m[(i, j)])).collect()))
            .collect(),
    )
}

pub fn vector_json(v: &[C64]) -> Value {
    Value::Array(v.iter().map(|&z| complex_json(z)).collect())
}

/// Kind of a tensor slot, for covariant differentiation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    /// Covariant holomorphic index (`dz^i`).
    Lower,
    /// Contravariant holomorphic index (`d/dz^k`).
    Upper,
    /// Covariant antiholomorphic index (`dz̄^j`).
    LowerBar,
}

/// Which connection differentiates a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conn {
    Chern,
    /// The torsion-twisted connection with coefficients `Γ^k_{ji}`.
    Twisted,
}

/// Direction of differentiation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dir {
    Holo,
    Anti,
}

/// Tensor whose entries are truncated Taylor polynomials at a point.
#[derive(Debug, Clone)]
pub struct PolyTensor {
    pub n: usize,
    pub rank: usize,
    pub data: Vec<Poly>,
}

impl PolyTensor {
    pub fn from_fn(n: usize, rank: usize, mut f: impl FnMut(&[usize]) -> Poly) -> PolyTensor {
        let data = (0..n.pow(rank as u32)).map(|k| f(&unflat(n, rank, k))).collect();
        PolyTensor { n, rank, data }
    }

    pub fn zeros(n: usize, rank: usize, basis: &Arc<Basis>) -> PolyTensor {
        PolyTensor::from_fn(n, rank, |_| Poly::zero(basis))
    }

    pub fn basis(&self) -> &Arc<Basis> {
        self.data[0].basis()
    }

    pub fn get(&self, idx: &[usize]) -> &Poly {
        &self.data[flat(self.n, idx)]
    }

    pub fn get_mut(&mut self, idx: &[usize]) -> &mut Poly {
        let k = flat(self.n, idx);
        &mut self.data[k]
    }

    pub fn map(&self, f: impl Fn(&Poly) -> Poly) -> PolyTensor {
        PolyTensor {
            n: self.n,
            rank: self.rank,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn conj(&self) -> PolyTensor {
        self.map(|p| p.conj())
    }

    /// Values at the expansion point.
    pub fn value(&self) -> CTensor {
        CTensor {
            n: self.n,
            rank: self.rank,
            data: self.data.iter().map(|p| p.value()).collect(),
        }
    }

    /// Partial derivative, with the direction index prepended.
    pub fn partial(&self, dir: Dir) -> PolyTensor {
        PolyTensor::from_fn(self.n, self.rank + 1, |idx| {
            let p = self.get(&idx[1..]);
            match dir {
                Dir::Holo => p.d_holo(idx[0]),
                Dir::Anti => p.d_anti(idx[0]),
            }
        })
    }

    /// Covariant derivative, direction index first. `gamma[[a, b, c]] = Γ^c_{ab}`
    /// is the Chern connection; twisted slots use its transpose.
    pub fn covariant(&self, slots: &[(Slot, Conn)], dir: Dir, gamma: &PolyTensor) -> PolyTensor {
        assert_eq!(slots.len(), self.rank);
        let n = self.n;
        let gamma_bar = if dir == Dir::Anti { Some(gamma.conj()) } else { None };
        let mut out = self.partial(dir);
        let mut src = vec![0usize; self.rank];
        for k in 0..out.data.len() {
            let idx = unflat(n, self.rank + 1, k);
            let m = idx[0];
            let mut acc = Poly::zero(self.basis());
            for (s, &(slot, conn)) in slots.iter().enumerate() {
                let own = idx[1 + s];
                for p in 0..n {
                    src.copy_from_slice(&idx[1..]);
                    src[s] = p;
                    let x = self.get(&src);
                    match (dir, slot, conn) {
                        (Dir::Holo, Slot::Lower, Conn::Chern) => {
                            acc -= &(gamma.get(&[m, own, p]) * x);
                        }
                        (Dir::Holo, Slot::Lower, Conn::Twisted) => {
                            acc -= &(gamma.get(&[own, m, p]) * x);
                        }
                        (Dir::Holo, Slot::Upper, Conn::Chern) => {
                            acc.add_product(gamma.get(&[m, p, own]), x);
                        }
                        (Dir::Holo, Slot::Upper, Conn::Twisted) => {
                            acc.add_product(gamma.get(&[p, m, own]), x);
                        }
                        (Dir::Anti, Slot::LowerBar, Conn::Chern) => {
                            let gb = gamma_bar.as_ref().expect("conjugate connection");
                            acc -= &(gb.get(&[m, own, p]) * x);
                        }
                        (Dir::Anti, Slot::LowerBar, Conn::Twisted) => {
                            let gb = gamma_bar.as_ref().expect("conjugate connection");
                            acc -= &(gb.get(&[own, m, p]) * x);
                        }
                        _ => {}
                    }
                }
            }
            out.data[k] += &acc;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn flat_index_roundtrip() {
        for k in 0..27 {
            assert_eq!(flat(3, &unflat(3, 3, k)), k);
        }
        assert_eq!(unflat(2, 3, 5), vec![1, 0, 1]);
    }

    #[test]
    fn tensor_json_nests() {
        let t = CTensor::from_fn(2, 2, |ix| c(ix[0] as f64, ix[1] as f64));
        let v = t.to_json();
        assert_eq!(v[1][0], serde_json::json!([1.0, 0.0]));
        assert_eq!(t.to_matrix()[(0, 1)], c(0.0, 1.0));
    }

    #[test]
    fn covariant_of_vector_uses_upper_rule() {
        // constant vector V = e_0 with a constant connection: (∇_m V)^k = Γ^k_{m0}
        let b = Basis::shared(2, 1);
        let gamma = PolyTensor::from_fn(2, 3, |ix| {
            Poly::constant(&b, c((ix[0] * 4 + ix[1] * 2 + ix[2]) as f64, 0.0))
        });
        let v = PolyTensor::from_fn(2, 1, |ix| {
            Poly::constant(&b, c(if ix[0] == 0 { 1.0 } else { 0.0 }, 0.0))
        });
        let chern = v.covariant(&[(Slot::Upper, Conn::Chern)], Dir::Holo, &gamma).value();
        let twisted = v.covariant(&[(Slot::Upper, Conn::Twisted)], Dir::Holo, &gamma).value();
        for m in 0..2 {
            for k in 0..2 {
                assert_eq!(chern.get(&[m, k]), gamma.get(&[m, 0, k]).value());
                assert_eq!(twisted.get(&[m, k]), gamma.get(&[0, m, k]).value());
            }
        }
        let anti = v.covariant(&[(Slot::Upper, Conn::Chern)], Dir::Anti, &gamma).value();
        assert_eq!(anti.max_abs(), 0.0);
    }
}
