//! Named metric fields with their designated vector fields and loop families.

use std::collections::BTreeMap;

use super::algebra::LieAlgebraData;
use super::frame::FrameMetric;
use super::lie_chart::{lie_group_metric, SAMPLE_RADIUS};
use crate::chart::field::{MetricField, Region, VectorField};
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, C64};
use crate::sampling::{rng, stream};
use crate::twisted::holonomy::LoopFamily;
use rand::Rng;

/// A registered model.
#[derive(Debug, Clone)]
pub struct Model {
    /// Canonical spec string, e.g. `hopf_diagonal(a1=2,a2=1)`.
    pub name: String,
    pub field: MetricField,
    /// Designated holomorphic Killing field, when the model has one.
    pub zeta: Option<VectorField>,
    /// Known dimension of the fixed subspace `F`.
    pub expected_f_dim: Option<usize>,
    pub loops: LoopFamily,
}

pub const MODEL_NAMES: &[&str] = &[
    "flat",
    "flat_torus_chart",
    "hopf_standard",
    "hopf_diagonal",
    "polynomial_perturbation",
    "gaussian_1d",
    "lie_group_chart",
];

/// Splits `name(k=v, w, ...)` into the name, positional and keyword arguments.
fn parse_spec(spec: &str) -> Result<(String, Vec<String>, BTreeMap<String, String>)> {
    let spec = spec.trim();
    let Some(open) = spec.find('(') else {
        return Ok((spec.to_string(), Vec::new(), BTreeMap::new()));
    };
    if !spec.ends_with(')') {
        return Err(Error::Parse(format!("unbalanced parentheses in `{spec}`")));
    }
    let name = spec[..open].trim().to_string();
    let inner = &spec[open + 1..spec.len() - 1];
    let mut positional = Vec::new();
    let mut keyword = BTreeMap::new();
    for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('=') {
            Some((k, v)) => {
                keyword.insert(k.trim().to_string(), v.trim().to_string());
            }
            None => positional.push(part.to_string()),
        }
    }
    Ok((name, positional, keyword))
}

struct Args {
    model: String,
    positional: Vec<String>,
    keyword: BTreeMap<String, String>,
}

impl Args {
    fn raw(&mut self, key: &str, position: usize) -> Option<String> {
        self.keyword
            .remove(key)
            .or_else(|| self.positional.get(position).cloned())
    }

    fn f64(&mut self, key: &str, position: usize, default: Option<f64>) -> Result<f64> {
        match self.raw(key, position) {
            Some(s) => s
                .parse()
                .map_err(|_| Error::BadParams(format!("{}: `{key}` must be a number, got `{s}`", self.model))),
            None => default.ok_or_else(|| Error::BadParams(format!("{}: missing parameter `{key}`", self.model))),
        }
    }

    fn usize(&mut self, key: &str, position: usize, default: usize) -> Result<usize> {
        match self.raw(key, position) {
            Some(s) => s.parse().map_err(|_| {
                Error::BadParams(format!(
                    "{}: `{key}` must be a non-negative integer, got `{s}`",
                    self.model
                ))
            }),
            None => Ok(default),
        }
    }

    fn finish(&self, arity: usize) -> Result<()> {
        if let Some(k) = self.keyword.keys().next() {
            return Err(Error::BadParams(format!("{}: unknown parameter `{k}`", self.model)));
        }
        if self.positional.len() > arity {
            return Err(Error::BadParams(format!("{}: too many parameters", self.model)));
        }
        Ok(())
    }
}

/// Looks up a model by spec string.
pub fn model_registry(spec: &str) -> Result<Model> {
    let (name, positional, keyword) = parse_spec(spec)?;
    let mut args = Args {
        model: name.clone(),
        positional,
        keyword,
    };
    let model = match name.as_str() {
        "flat" => {
            let n = args.usize("n", 0, 2)?;
            args.finish(1)?;
            if n == 0 {
                return Err(Error::BadParams("flat: n must be positive".into()));
            }
            flat(n)
        }
        "flat_torus_chart" => {
            args.finish(0)?;
            flat_torus_chart()
        }
        "hopf_standard" => {
            args.finish(0)?;
            hopf("hopf_standard".into(), 1.0, 1.0)
        }
        "hopf_diagonal" => {
            let a1 = args.f64("a1", 0, Some(2.0))?;
            let a2 = args.f64("a2", 1, Some(1.0))?;
            args.finish(2)?;
            if !(a1 >= a2 && a2 > 0.0) {
                return Err(Error::BadParams(format!(
                    "hopf_diagonal needs Re(a1) >= Re(a2) > 0, got a1 = {a1}, a2 = {a2}"
                )));
            }
            hopf(format!("hopf_diagonal(a1={a1},a2={a2})"), a1, a2)
        }
        "polynomial_perturbation" => {
            let seed = args.usize("seed", 0, 0)? as u64;
            let eps = args.f64("eps", 1, Some(0.1))?;
            args.finish(2)?;
            if !(0.0..=0.2).contains(&eps) {
                return Err(Error::BadParams(format!(
                    "polynomial_perturbation needs 0 <= eps <= 0.2, got {eps}"
                )));
            }
            polynomial_perturbation(seed, eps)
        }
        "gaussian_1d" => {
            args.finish(0)?;
            gaussian_1d()
        }
        "lie_group_chart" => {
            let alg = args.raw("algebra", 0).unwrap_or_else(|| "affine".into());
            args.finish(1)?;
            let alg = LieAlgebraData::builtin(&alg)?;
            lie_group_chart(&FrameMetric::identity(alg))
        }
        other => return Err(Error::UnknownModel(other.to_string())),
    };
    Ok(model)
}

fn zero(n: usize) -> Vec<C64> {
    vec![c(0.0, 0.0); n]
}

pub fn flat(n: usize) -> Model {
    let field = MetricField::new(
        format!("flat(n={n})"),
        n,
        Region::Everywhere,
        Region::Box { half_width: 1.0 },
        move |_| CMatrix::identity(n, n),
    );
    Model {
        name: field.name.clone(),
        field,
        zeta: Some(VectorField::coordinate(n, 0)),
        expected_f_dim: Some(n),
        loops: LoopFamily::new(zero(n), Region::Box { half_width: 1.0 }, 0.25),
    }
}

pub fn flat_torus_chart() -> Model {
    let g = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.5, 0.3), c(0.5, -0.3), c(1.0, 0.0)]);
    let field = MetricField::new(
        "flat_torus_chart",
        2,
        Region::Box { half_width: 0.5 },
        Region::Box { half_width: 0.4 },
        move |_| g.clone(),
    );
    Model {
        name: field.name.clone(),
        field,
        zeta: Some(VectorField::coordinate(2, 0)),
        expected_f_dim: Some(2),
        loops: LoopFamily::new(zero(2), Region::Box { half_width: 0.45 }, 0.1),
    }
}

/// `t(z)` with `Σ |z_i|² e^{-2 a_i t} = 1`, by Newton's method on the convex
/// decreasing function `log Σ |z_i|² e^{-2 a_i t}` started left of the root.
pub fn weighted_log_radius(z: &[C64], a: &[f64]) -> f64 {
    let r2: f64 = z.iter().map(|w| w.norm_sqr()).sum();
    if r2 == 0.0 || !r2.is_finite() {
        return f64::NAN;
    }
    let lr = 0.5 * r2.ln();
    let amax = a.iter().cloned().fold(f64::MIN, f64::max);
    let amin = a.iter().cloned().fold(f64::MAX, f64::min);
    let mut t = (lr / amax).min(lr / amin);
    for _ in 0..100 {
        let mut s = 0.0;
        let mut ds = 0.0;
        for (w, &ai) in z.iter().zip(a) {
            let term = w.norm_sqr() * (-2.0 * ai * t).exp();
            s += term;
            ds -= 2.0 * ai * term;
        }
        let step = s.ln() / (ds / s);
        t -= step;
        if step.abs() <= 1e-16 * (1.0 + t.abs()) {
            break;
        }
    }
    t
}

/// `g_{ij̄} = δ_{ij} e^{-2 a_i t(z)}`, invariant under `z_i -> e^{a_i s} z_i`
/// for complex `s`; for `a1 = a2 = 1` this is `δ_{ij} / |z|²`.
fn hopf(name: String, a1: f64, a2: f64) -> Model {
    let a = [a1, a2];
    let standard = a1 == 1.0 && a2 == 1.0;
    let field = MetricField::new(
        name.clone(),
        2,
        Region::Shell { rmin: 0.5, rmax: 2.0 },
        Region::Shell { rmin: 0.7, rmax: 1.6 },
        move |z| {
            if standard {
                let r2: f64 = z.iter().map(|w| w.norm_sqr()).sum();
                return CMatrix::identity(2, 2) / c(r2, 0.0);
            }
            let t = weighted_log_radius(z, &a);
            CMatrix::from_fn(2, 2, |i, j| {
                if i == j {
                    c((-2.0 * a[i] * t).exp(), 0.0)
                } else {
                    c(0.0, 0.0)
                }
            })
        },
    );
    let zeta = VectorField::new("zeta", 2, move |z| vec![z[0] * a1, z[1] * a2]);
    Model {
        name,
        field,
        zeta: Some(zeta),
        expected_f_dim: Some(1),
        loops: LoopFamily::new(
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            Region::Shell { rmin: 0.55, rmax: 1.9 },
            0.25,
        ),
    }
}

/// Real monomials of degree at most 2 in `(z1, z2, z̄1, z̄2)`: 15 of them.
fn monomial(index: usize, z: &[C64]) -> C64 {
    let vars = [z[0], z[1], z[0].conj(), z[1].conj()];
    match index {
        0 => c(1.0, 0.0),
        1..=4 => vars[index - 1],
        _ => {
            let mut k = index - 5;
            for a in 0..4 {
                for b in a..4 {
                    if k == 0 {
                        return vars[a] * vars[b];
                    }
                    k -= 1;
                }
            }
            unreachable!("monomial index out of range")
        }
    }
}

/// `g = I + ε (P(z) + P(z)^†)`, `P_{ij} = Σ_m p^m_{ij} μ_m(z)` with seeded
/// coefficients of modulus below `1/15`; positive on the unit polydisc for `ε ≤ 0.2`.
pub fn polynomial_perturbation(seed: u64, eps: f64) -> Model {
    let mut r = rng(seed, stream::FIELDS);
    let coeffs: Vec<[[C64; 2]; 2]> = (0..15)
        .map(|_| {
            let mut m = [[c(0.0, 0.0); 2]; 2];
            for row in m.iter_mut() {
                for entry in row.iter_mut() {
                    let rad = r.random::<f64>().sqrt() / 15.0;
                    *entry = C64::from_polar(rad, r.random_range(0.0..std::f64::consts::TAU));
                }
            }
            m
        })
        .collect();
    let name = format!("polynomial_perturbation(seed={seed},eps={eps})");
    let field = MetricField::new(
        name.clone(),
        2,
        Region::Polydisc {
            center: zero(2),
            radius: 1.0,
        },
        Region::Polydisc {
            center: zero(2),
            radius: 0.5,
        },
        move |z| {
            let mut p = CMatrix::zeros(2, 2);
            for (m, cm) in coeffs.iter().enumerate() {
                let mu = monomial(m, z);
                for i in 0..2 {
                    for j in 0..2 {
                        p[(i, j)] += cm[i][j] * mu;
                    }
                }
            }
            CMatrix::identity(2, 2) + (&p + p.adjoint()) * c(eps, 0.0)
        },
    );
    Model {
        name,
        field,
        zeta: None,
        expected_f_dim: None,
        loops: LoopFamily::new(
            zero(2),
            Region::Polydisc {
                center: zero(2),
                radius: 0.9,
            },
            0.2,
        ),
    }
}

/// `g = e^{|z|²}` on `C`.
pub fn gaussian_1d() -> Model {
    let field = MetricField::new(
        "gaussian_1d",
        1,
        Region::Box { half_width: 2.0 },
        Region::Box { half_width: 0.5 },
        |z| CMatrix::from_element(1, 1, c(z[0].norm_sqr().exp(), 0.0)),
    );
    Model {
        name: field.name.clone(),
        field,
        zeta: None,
        expected_f_dim: None,
        loops: LoopFamily::new(zero(1), Region::Box { half_width: 1.0 }, 0.25),
    }
}

pub fn lie_group_chart(fm: &FrameMetric) -> Model {
    let n = fm.algebra.dim;
    let field = lie_group_metric(fm);
    Model {
        name: field.name.clone(),
        field,
        zeta: None,
        expected_f_dim: Some(n),
        loops: LoopFamily::new(
            zero(n),
            Region::Polydisc {
                center: zero(n),
                radius: SAMPLE_RADIUS,
            },
            0.05,
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_parsing() {
        let (name, pos, kw) = parse_spec("hopf_diagonal(a1=2, 1)").unwrap();
        assert_eq!(name, "hopf_diagonal");
        assert_eq!(pos, vec!["1".to_string()]);
        assert_eq!(kw["a1"], "2");
        assert!(parse_spec("flat(n=2").is_err());
    }

    #[test]
    fn hopf_standard_is_identity_on_unit_sphere() {
        let m = model_registry("hopf_standard").unwrap();
        let g = m.field.eval(&[c(1.0, 0.0), c(0.0, 0.0)]);
        assert!((g - CMatrix::identity(2, 2)).norm() < 1e-15);
    }

    #[test]
    fn hopf_diagonal_designated_field() {
        let m = model_registry("hopf_diagonal(a1=2,a2=1)").unwrap();
        let z = [c(0.3, 0.4), c(-0.7, 0.2)];
        let v = m.zeta.unwrap().eval(&z);
        assert_eq!(v, vec![z[0] * 2.0, z[1]]);
        assert!(matches!(
            model_registry("hopf_diagonal(a1=1,a2=2)"),
            Err(Error::BadParams(_))
        ));
        assert!(matches!(
            model_registry("hopf_diagonal(a1=1,a2=0)"),
            Err(Error::BadParams(_))
        ));
    }

    #[test]
    fn weighted_radius_agrees_with_standard() {
        let z = [c(0.9, -0.3), c(0.2, 0.5)];
        let r: f64 = z.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
        assert!((weighted_log_radius(&z, &[1.0, 1.0]) - r.ln()).abs() < 1e-15);
        let a = [2.0, 0.5];
        let t = weighted_log_radius(&z, &a);
        let s: f64 = z
            .iter()
            .zip(&a)
            .map(|(w, ai)| w.norm_sqr() * (-2.0 * ai * t).exp())
            .sum();
        assert!((s - 1.0).abs() < 1e-14);
    }

    #[test]
    fn unknown_and_bad() {
        assert!(matches!(model_registry("torus"), Err(Error::UnknownModel(_))));
        assert!(matches!(model_registry("flat(m=3)"), Err(Error::BadParams(_))));
        assert!(model_registry("polynomial_perturbation(seed=3,eps=0.5)").is_err());
        assert_eq!(model_registry("flat(3)").unwrap().field.dim, 3);
    }
}
