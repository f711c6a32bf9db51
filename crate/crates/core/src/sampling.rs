//! Seeded sampling. Every stochastic draw uses its own ChaCha stream, keyed by
//! the seed and a stream index, so results do not depend on evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chart::field::{unit_sphere, ChartPoint, Region};
use crate::linalg::{g_norm, CMatrix, C64};

/// Stream-index namespaces, so that different consumers of one seed never collide.
pub mod stream {
    pub const POINTS: u64 = 1 << 32;
    pub const VECTORS: u64 = 2 << 32;
    pub const LOOPS: u64 = 3 << 32;
    pub const FIELDS: u64 = 4 << 32;
    pub const ALGEBRA: u64 = 5 << 32;
}

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// How many points and vectors to draw, and from which seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub points: usize,
    pub vectors: usize,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn new(points: usize, vectors: usize, seed: u64) -> SamplerConfig {
        SamplerConfig { points, vectors, seed }
    }
}

/// The `index`-th sample point of a region.
pub fn sample_point(region: &Region, dim: usize, seed: u64, index: usize) -> ChartPoint {
    region.sample(dim, &mut rng(seed, stream::POINTS + index as u64))
}

pub fn sample_points(region: &Region, dim: usize, seed: u64, count: usize) -> Vec<ChartPoint> {
    (0..count).map(|i| sample_point(region, dim, seed, i)).collect()
}

/// Unit vectors in the metric `g`, drawn for the `index`-th point.
pub fn sample_unit_vectors(g: &CMatrix, seed: u64, index: usize, count: usize) -> Vec<Vec<C64>> {
    let mut r = rng(seed, stream::VECTORS + index as u64);
    (0..count)
        .map(|_| {
            let v = unit_sphere(g.nrows(), &mut r);
            let norm = g_norm(g, &v);
            v.into_iter().map(|z| z / norm).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn streams_are_independent_of_order() {
        let region = Region::Shell { rmin: 0.7, rmax: 1.5 };
        let all = sample_points(&region, 2, 9, 5);
        assert_eq!(all[3], sample_point(&region, 2, 9, 3));
        assert_ne!(all[3], sample_point(&region, 2, 10, 3));
    }

    #[test]
    fn vectors_are_unit_in_metric() {
        let g = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.5, 0.1), c(0.5, -0.1), c(1.0, 0.0)]);
        for v in sample_unit_vectors(&g, 1, 0, 10) {
            assert!((g_norm(&g, &v) - 1.0).abs() < 1e-14);
        }
    }
}
