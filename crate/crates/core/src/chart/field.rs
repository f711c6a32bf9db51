//! Metric and vector fields on a single coordinate chart.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{c, CMatrix, C64};

/// A point `(z^1, .., z^n)` of a chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub coords: Vec<C64>,
}

impl ChartPoint {
    pub fn new(coords: Vec<C64>) -> ChartPoint {
        ChartPoint { coords }
    }

    pub fn real(values: &[f64]) -> ChartPoint {
        ChartPoint::new(values.iter().map(|&x| c(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn as_pairs(&self) -> Vec<[f64; 2]> {
        self.coords.iter().map(|z| [z.re, z.im]).collect()
    }
}

impl std::ops::Deref for ChartPoint {
    type Target = [C64];
    fn deref(&self) -> &[C64] {
        &self.coords
    }
}

/// Open chart regions. Also used for the compact sub-domains that samplers draw from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Region {
    Everywhere,
    /// `rmin < |z| < rmax`.
    Shell {
        rmin: f64,
        rmax: f64,
    },
    /// `|z_i - center_i| < radius` for every `i`.
    Polydisc {
        center: Vec<C64>,
        radius: f64,
    },
    /// `|Re z_i|, |Im z_i| < half_width`.
    Box {
        half_width: f64,
    },
}

impl Region {
    pub fn contains(&self, z: &[C64]) -> bool {
        if !z.iter().all(|w| w.re.is_finite() && w.im.is_finite()) {
            return false;
        }
        match self {
            Region::Everywhere => true,
            Region::Shell { rmin, rmax } => {
                let r = z.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
                r > *rmin && r < *rmax
            }
            Region::Polydisc { center, radius } => z.iter().zip(center).all(|(w, c0)| (w - c0).norm() < *radius),
            Region::Box { half_width } => z.iter().all(|w| w.re.abs() < *half_width && w.im.abs() < *half_width),
        }
    }

    /// Uniform-ish draw from the region, which must be bounded.
    pub fn sample<R: Rng>(&self, dim: usize, rng: &mut R) -> ChartPoint {
        match self {
            Region::Everywhere => Region::Box { half_width: 1.0 }.sample(dim, rng),
            Region::Shell { rmin, rmax } => {
                let dir = unit_sphere(dim, rng);
                let r = rng.random_range(*rmin..*rmax);
                ChartPoint::new(dir.into_iter().map(|w| w * r).collect())
            }
            Region::Polydisc { center, radius } => ChartPoint::new(
                center
                    .iter()
                    .map(|c0| {
                        let r = radius * rng.random::<f64>().sqrt();
                        let phi = rng.random_range(0.0..std::f64::consts::TAU);
                        c0 + C64::from_polar(r, phi)
                    })
                    .collect(),
            ),
            Region::Box { half_width } => ChartPoint::new(
                (0..dim)
                    .map(|_| {
                        c(
                            rng.random_range(-half_width..*half_width),
                            rng.random_range(-half_width..*half_width),
                        )
                    })
                    .collect(),
            ),
        }
    }
}

/// Uniform point on the unit sphere of `C^dim` (Gaussian normalisation).
pub fn unit_sphere<R: Rng>(dim: usize, rng: &mut R) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..dim).map(|_| c(gaussian(rng), gaussian(rng))).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Standard normal deviate by Box-Muller.
pub fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

type MetricFn = dyn Fn(&[C64]) -> CMatrix + Send + Sync;
type VectorFn = dyn Fn(&[C64]) -> Vec<C64> + Send + Sync;

/// Hermitian metric `g_{ij̄}` on a chart domain.
#[derive(Clone)]
pub struct MetricField {
    pub name: String,
    pub dim: usize,
    pub domain: Region,
    /// Compact part of the domain used by samplers and loop generators.
    pub sample_region: Region,
    eval: Arc<MetricFn>,
}

impl MetricField {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        domain: Region,
        sample_region: Region,
        eval: impl Fn(&[C64]) -> CMatrix + Send + Sync + 'static,
    ) -> MetricField {
        MetricField {
            name: name.into(),
            dim,
            domain,
            sample_region,
            eval: Arc::new(eval),
        }
    }

    pub fn eval(&self, z: &[C64]) -> CMatrix {
        (self.eval)(z)
    }

    pub fn contains(&self, z: &[C64]) -> bool {
        z.len() == self.dim && self.domain.contains(z)
    }
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricField")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("domain", &self.domain)
            .finish()
    }
}

/// Section of `T^{1,0}` in the coordinate frame.
#[derive(Clone)]
pub struct VectorField {
    pub name: String,
    pub dim: usize,
    eval: Arc<VectorFn>,
}

impl VectorField {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        eval: impl Fn(&[C64]) -> Vec<C64> + Send + Sync + 'static,
    ) -> VectorField {
        VectorField {
            name: name.into(),
            dim,
            eval: Arc::new(eval),
        }
    }

    pub fn eval(&self, z: &[C64]) -> Vec<C64> {
        (self.eval)(z)
    }

    /// Constant field `e_k`.
    pub fn coordinate(dim: usize, k: usize) -> VectorField {
        VectorField::new(format!("d{}", k + 1), dim, move |_| {
            let mut v = vec![c(0.0, 0.0); dim];
            v[k] = c(1.0, 0.0);
            v
        })
    }

    /// Linear holomorphic field `z -> A z`.
    pub fn linear(name: impl Into<String>, a: CMatrix) -> VectorField {
        let dim = a.nrows();
        VectorField::new(name, dim, move |z| {
            (0..dim).map(|k| (0..dim).map(|j| a[(k, j)] * z[j]).sum()).collect()
        })
    }
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorField")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn samples_stay_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let regions = [
            Region::Shell { rmin: 0.6, rmax: 1.8 },
            Region::Polydisc {
                center: vec![c(1.0, 0.0), c(0.0, 0.0)],
                radius: 0.3,
            },
            Region::Box { half_width: 0.5 },
        ];
        for region in &regions {
            for _ in 0..200 {
                let p = region.sample(2, &mut rng);
                assert!(region.contains(&p), "{region:?} {p:?}");
            }
        }
    }

    #[test]
    fn unit_sphere_is_unit() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let v = unit_sphere(3, &mut rng);
            let n: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            assert!((n - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn shell_excludes_boundary() {
        let r = Region::Shell { rmin: 0.5, rmax: 2.0 };
        assert!(!r.contains(&[c(0.5, 0.0), c(0.0, 0.0)]));
        assert!(r.contains(&[c(1.0, 0.0), c(0.0, 0.0)]));
        assert!(!r.contains(&[c(f64::NAN, 0.0), c(0.0, 0.0)]));
    }
}
