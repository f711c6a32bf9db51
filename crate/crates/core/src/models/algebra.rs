//! Complex Lie algebras by structure constants, and their subalgebras.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::{c, kernel_by_svd, CMatrix, C64};

/// Tolerance for antisymmetry, Jacobi and subalgebra closure.
pub const ALGEBRA_TOL: f64 = 1e-12;

/// `[e_i, e_j] = c^k_{ij} e_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LieAlgebraData {
    pub name: String,
    pub dim: usize,
    /// `c^k_{ij}` at `(i * dim + j) * dim + k`.
    pub c: Vec<C64>,
}

impl LieAlgebraData {
    /// Builds the algebra from brackets `[e_i, e_j] = Σ value e_k` with `i < j`
    /// implied antisymmetrically; validates the result.
    pub fn from_brackets(name: impl Into<String>, dim: usize, entries: &[(usize, usize, usize, C64)]) -> Result<Self> {
        let mut alg = LieAlgebraData {
            name: name.into(),
            dim,
            c: vec![c(0.0, 0.0); dim * dim * dim],
        };
        for &(i, j, k, v) in entries {
            if i >= dim || j >= dim || k >= dim {
                return Err(Error::InvalidAlgebra(format!(
                    "index ({i}, {j}, {k}) out of range for dimension {dim}"
                )));
            }
            if i == j {
                return Err(Error::InvalidAlgebra(format!("[e{i}, e{i}] must vanish")));
            }
            let (a, b) = (alg.index(i, j, k), alg.index(j, i, k));
            alg.c[a] += v;
            alg.c[b] -= v;
        }
        alg.validate()?;
        Ok(alg)
    }

    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dim + j) * self.dim + k
    }

    /// `c^k_{ij}`.
    pub fn coef(&self, i: usize, j: usize, k: usize) -> C64 {
        self.c[self.index(i, j, k)]
    }

    pub fn validate(&self) -> Result<()> {
        if self.c.len() != self.dim.pow(3) {
            return Err(Error::InvalidAlgebra(
                "structure constant array has the wrong size".into(),
            ));
        }
        let n = self.dim;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let r = (self.coef(i, j, k) + self.coef(j, i, k)).norm();
                    if r > ALGEBRA_TOL {
                        return Err(Error::InvalidAlgebra(format!(
                            "c^{k}_{{{i}{j}}} is not antisymmetric ({r:.3e})"
                        )));
                    }
                }
            }
        }
        let r = self.jacobi_residual();
        if r > ALGEBRA_TOL {
            return Err(Error::InvalidAlgebra(format!("Jacobi identity fails ({r:.3e})")));
        }
        Ok(())
    }

    /// `max |Σ_cyc c^m_{ij} c^l_{mk}|`.
    pub fn jacobi_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut acc = c(0.0, 0.0);
                        for m in 0..n {
                            acc += self.coef(i, j, m) * self.coef(m, k, l)
                                + self.coef(j, k, m) * self.coef(m, i, l)
                                + self.coef(k, i, m) * self.coef(m, j, l);
                        }
                        worst = worst.max(acc.norm());
                    }
                }
            }
        }
        worst
    }

    pub fn bracket(&self, u: &[C64], v: &[C64]) -> Vec<C64> {
        let n = self.dim;
        let mut out = vec![c(0.0, 0.0); n];
        for i in 0..n {
            if u[i] == c(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                let uv = u[i] * v[j];
                if uv == c(0.0, 0.0) {
                    continue;
                }
                for (k, o) in out.iter_mut().enumerate() {
                    *o += uv * self.coef(i, j, k);
                }
            }
        }
        out
    }

    /// Matrix of `ad_u = [u, ·]`.
    pub fn ad(&self, u: &[C64]) -> CMatrix {
        let n = self.dim;
        CMatrix::from_fn(n, n, |k, j| (0..n).map(|i| u[i] * self.coef(i, j, k)).sum())
    }

    pub fn basis_vector(&self, i: usize) -> Vec<C64> {
        let mut v = vec![c(0.0, 0.0); self.dim];
        v[i] = c(1.0, 0.0);
        v
    }

    pub fn is_abelian(&self) -> bool {
        self.c.iter().all(|z| z.norm() == 0.0)
    }

    /// Built-in algebras: `abelian` (or `abelianN`), `affine`, `heisenberg`,
    /// `sl2`, `abelian_plus_affine`.
    pub fn builtin(name: &str) -> Result<LieAlgebraData> {
        let one = c(1.0, 0.0);
        match name {
            "abelian" => LieAlgebraData::from_brackets("abelian", 2, &[]),
            "affine" => LieAlgebraData::from_brackets("affine", 2, &[(0, 1, 1, one)]),
            "heisenberg" => LieAlgebraData::from_brackets("heisenberg", 3, &[(0, 1, 2, one)]),
            // basis H, E, F
            "sl2" => LieAlgebraData::from_brackets(
                "sl2",
                3,
                &[(0, 1, 1, c(2.0, 0.0)), (0, 2, 2, c(-2.0, 0.0)), (1, 2, 0, one)],
            ),
            "abelian_plus_affine" => LieAlgebraData::from_brackets("abelian_plus_affine", 3, &[(1, 2, 2, one)]),
            other => match other.strip_prefix("abelian").and_then(|d| d.parse::<usize>().ok()) {
                Some(d) if d > 0 => LieAlgebraData::from_brackets(other, d, &[]),
                _ => Err(Error::UnknownModel(other.to_string())),
            },
        }
    }

    pub fn builtin_names() -> &'static [&'static str] {
        &["abelian", "affine", "heisenberg", "sl2", "abelian_plus_affine"]
    }

    /// Parses `{dim, c: [[i, j, k, re, im], ...], subalgebra?: [[[re, im], ...], ...]}`.
    pub fn from_json(name: &str, value: &Value) -> Result<(LieAlgebraData, Option<Vec<Vec<C64>>>)> {
        let dim = value
            .get("dim")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Parse("algebra file needs an integer `dim`".into()))? as usize;
        if dim == 0 {
            return Err(Error::Parse("algebra dimension must be positive".into()));
        }
        let mut entries = Vec::new();
        for (idx, row) in value
            .get("c")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("algebra file needs a `c` array".into()))?
            .iter()
            .enumerate()
        {
            let row = row
                .as_array()
                .filter(|r| r.len() == 5)
                .ok_or_else(|| Error::Parse(format!("c[{idx}] must be [i, j, k, re, im]")))?;
            let int = |v: &Value| {
                v.as_u64()
                    .map(|x| x as usize)
                    .ok_or_else(|| Error::Parse(format!("c[{idx}] has a non-integer index")))
            };
            let num = |v: &Value| {
                v.as_f64()
                    .ok_or_else(|| Error::Parse(format!("c[{idx}] has a non-numeric value")))
            };
            let (i, j, k) = (int(&row[0])?, int(&row[1])?, int(&row[2])?);
            let z = c(num(&row[3])?, num(&row[4])?);
            if i >= dim || j >= dim || k >= dim {
                return Err(Error::InvalidAlgebra(format!("c[{idx}] index out of range")));
            }
            entries.push((i, j, k, z));
        }
        // entries list c^k_{ij} directly; both orders may appear
        let mut alg = LieAlgebraData {
            name: name.to_string(),
            dim,
            c: vec![c(0.0, 0.0); dim * dim * dim],
        };
        for (i, j, k, z) in entries {
            let at = alg.index(i, j, k);
            alg.c[at] = z;
        }
        alg.validate()?;
        let sub = match value.get("subalgebra") {
            None | Some(Value::Null) => None,
            Some(s) => {
                let vectors = s
                    .as_array()
                    .ok_or_else(|| Error::Parse("`subalgebra` must be a list of vectors".into()))?;
                let mut out = Vec::new();
                for v in vectors {
                    let comps = v
                        .as_array()
                        .filter(|a| a.len() == dim)
                        .ok_or_else(|| Error::Parse(format!("subalgebra vectors need {dim} components")))?;
                    let mut vec = Vec::with_capacity(dim);
                    for z in comps {
                        let pair = z
                            .as_array()
                            .filter(|p| p.len() == 2)
                            .ok_or_else(|| Error::Parse("complex numbers are [re, im] pairs".into()))?;
                        let re = pair[0]
                            .as_f64()
                            .ok_or_else(|| Error::Parse("non-numeric component".into()))?;
                        let im = pair[1]
                            .as_f64()
                            .ok_or_else(|| Error::Parse("non-numeric component".into()))?;
                        vec.push(c(re, im));
                    }
                    out.push(vec);
                }
                Some(out)
            }
        };
        Ok((alg, sub))
    }

    pub fn to_json(&self) -> Value {
        let n = self.dim;
        let mut entries = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let z = self.coef(i, j, k);
                    if z.norm() != 0.0 {
                        entries.push(json!([i, j, k, z.re, z.im]));
                    }
                }
            }
        }
        json!({"name": self.name, "dim": n, "c": entries})
    }
}

/// A subalgebra given by a spanning list of vectors of the parent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubalgebraData {
    pub name: String,
    pub basis: Vec<Vec<C64>>,
}

impl SubalgebraData {
    /// Checks linear independence and closure under the parent's bracket.
    pub fn new(name: impl Into<String>, parent: &LieAlgebraData, basis: Vec<Vec<C64>>) -> Result<SubalgebraData> {
        let n = parent.dim;
        if basis.iter().any(|v| v.len() != n) {
            return Err(Error::InvalidAlgebra(format!(
                "subalgebra vectors must have {n} components"
            )));
        }
        if !basis.is_empty() {
            let m = CMatrix::from_fn(n, basis.len(), |k, a| basis[a][k]);
            let sv = m.singular_values();
            if basis.len() > n || sv.min() <= 1e-10 * sv.max() {
                return Err(Error::InvalidAlgebra("subalgebra basis is linearly dependent".into()));
            }
            for u in &basis {
                for v in &basis {
                    let r = span_residual(&m, &parent.bracket(u, v));
                    if r > ALGEBRA_TOL * (1.0 + m.norm()) {
                        return Err(Error::InvalidAlgebra(format!(
                            "subalgebra is not closed under the bracket ({r:.3e})"
                        )));
                    }
                }
            }
        }
        Ok(SubalgebraData {
            name: name.into(),
            basis,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Named subalgebras: `zero`, `borel` (sl2), `center`, `derived`,
    /// `nilradical` (affine factors, where it equals the derived algebra),
    /// `full` and `span:i,j,...`.
    pub fn named(parent: &LieAlgebraData, name: &str) -> Result<SubalgebraData> {
        let e = |i: usize| parent.basis_vector(i);
        let basis = match name {
            "zero" => Vec::new(),
            "full" => (0..parent.dim).map(e).collect(),
            "borel" if parent.name == "sl2" => vec![e(0), e(1)],
            "center" => center(parent),
            "derived" => derived(parent),
            "nilradical" if matches!(parent.name.as_str(), "affine" | "abelian_plus_affine") => derived(parent),
            other => {
                let Some(list) = other.strip_prefix("span:") else {
                    return Err(Error::BadParams(format!(
                        "unknown subalgebra `{other}` for `{}`",
                        parent.name
                    )));
                };
                let mut basis = Vec::new();
                for tok in list.split(',') {
                    let i: usize = tok
                        .trim()
                        .parse()
                        .map_err(|_| Error::BadParams(format!("bad basis index `{tok}`")))?;
                    if i >= parent.dim {
                        return Err(Error::BadParams(format!("basis index {i} out of range")));
                    }
                    basis.push(e(i));
                }
                basis
            }
        };
        SubalgebraData::new(name, parent, basis)
    }
}

/// Euclidean distance from `v` to the column span of `m`.
fn span_residual(m: &CMatrix, v: &[C64]) -> f64 {
    let rhs = crate::linalg::CVector::from_column_slice(v);
    let svd = m.clone().svd(true, true);
    match svd.solve(&rhs, 1e-14) {
        Ok(x) => (m * x - &rhs).norm(),
        Err(_) => rhs.norm(),
    }
}

fn center(alg: &LieAlgebraData) -> Vec<Vec<C64>> {
    let n = alg.dim;
    // v is central iff ad_v e_j = 0 for all j, i.e. Σ_i v^i c^k_{ij} = 0
    let stacked = CMatrix::from_fn(n * n, n, |row, i| alg.coef(i, row / n, row % n));
    kernel_by_svd(&stacked, 1e-12).kernel
}

fn derived(alg: &LieAlgebraData) -> Vec<Vec<C64>> {
    let n = alg.dim;
    let columns: Vec<Vec<C64>> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (0..n).map(|k| alg.coef(i, j, k)).collect())
        .collect();
    let m = CMatrix::from_fn(n, columns.len(), |k, col| columns[col][k]);
    let svd = m.svd(true, false);
    let u = svd.u.expect("left vectors requested");
    let smax = svd.singular_values.max();
    (0..svd.singular_values.len())
        .filter(|&i| smax > 0.0 && svd.singular_values[i] > 1e-12 * smax)
        .map(|i| u.column(i).iter().cloned().collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_satisfy_jacobi() {
        for name in LieAlgebraData::builtin_names() {
            let alg = LieAlgebraData::builtin(name).unwrap();
            assert!(alg.jacobi_residual() < ALGEBRA_TOL, "{name}");
        }
    }

    #[test]
    fn rejects_broken_jacobi() {
        // [e0,e1]=e1, [e0,e2]=e0 is not a Lie algebra
        let one = c(1.0, 0.0);
        let err = LieAlgebraData::from_brackets("bad", 3, &[(0, 1, 1, one), (0, 2, 0, one), (1, 2, 1, one)]);
        assert!(matches!(err, Err(Error::InvalidAlgebra(_))));
    }

    #[test]
    fn sl2_brackets() {
        let s = LieAlgebraData::builtin("sl2").unwrap();
        let (h, e, f) = (s.basis_vector(0), s.basis_vector(1), s.basis_vector(2));
        assert_eq!(s.bracket(&h, &e), vec![c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(s.bracket(&h, &f), vec![c(0.0, 0.0), c(0.0, 0.0), c(-2.0, 0.0)]);
        assert_eq!(s.bracket(&e, &f), vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn named_subalgebras() {
        let heis = LieAlgebraData::builtin("heisenberg").unwrap();
        let z = SubalgebraData::named(&heis, "center").unwrap();
        assert_eq!(z.dim(), 1);
        assert!((z.basis[0][2].norm() - 1.0).abs() < 1e-12);
        let sum = LieAlgebraData::builtin("abelian_plus_affine").unwrap();
        let nil = SubalgebraData::named(&sum, "nilradical").unwrap();
        assert_eq!(nil.dim(), 1);
        assert!((nil.basis[0][2].norm() - 1.0).abs() < 1e-12);
        let sl2 = LieAlgebraData::builtin("sl2").unwrap();
        assert!(SubalgebraData::new("bad", &sl2, vec![sl2.basis_vector(1), sl2.basis_vector(2)]).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let alg = LieAlgebraData::builtin("sl2").unwrap();
        let mut v = alg.to_json();
        v["subalgebra"] = json!([[[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]]]);
        let (back, sub) = LieAlgebraData::from_json("sl2", &v).unwrap();
        assert_eq!(back.c, alg.c);
        assert_eq!(sub.unwrap().len(), 1);
    }
}
