//! Sampled holonomy of the twisted connection and its fixed subspace.

use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::curvature::formula_blocks;
use super::transport::{transport_matrix, PathSpec, TransportOptions, TransportResult};
use crate::chart::field::{ChartPoint, MetricField, Region};
use crate::chart::jet::wirtinger_jet;
use crate::chart::pack::{chern_tensors, MAX_CONDITION};
use crate::chart::tensor::{matrix_json, vector_json, CTensor};
use crate::error::{Error, Result};
use crate::linalg::{gram_schmidt, inverse_checked, kernel_by_svd_floor, CMatrix, C64};
use crate::sampling::{rng, stream};

/// Singular values below this fraction of the largest span the kernel.
pub const KERNEL_CUTOFF: f64 = 1e-6;
/// Singular values below this are kernel whatever the largest one is.
pub const KERNEL_FLOOR: f64 = 1e-9;
const REJECTION_SAMPLES: usize = 96;
const MAX_REDRAWS: usize = 1000;

/// Seeded trigonometric loops at a base point, kept inside `region`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopFamily {
    pub base: Vec<C64>,
    pub region: Region,
    /// Bound on the modulus of each first-harmonic coefficient; harmonic `m`
    /// uses `radius / m`.
    pub radius: f64,
    pub harmonics: usize,
}

impl LoopFamily {
    pub fn new(base: Vec<C64>, region: Region, radius: f64) -> LoopFamily {
        LoopFamily {
            base,
            region,
            radius,
            harmonics: 2,
        }
    }

    /// The `index`-th loop for `seed`: coefficients are redrawn from the
    /// same stream until the loop stays inside the region.
    pub fn loop_at(&self, seed: u64, index: usize) -> Result<PathSpec> {
        let n = self.base.len();
        let mut r = rng(seed, stream::LOOPS + index as u64);
        let disc = |bound: f64, r: &mut rand_chacha::ChaCha8Rng| {
            let rad = bound * r.random::<f64>().sqrt();
            C64::from_polar(rad, r.random_range(0.0..std::f64::consts::TAU))
        };
        for _ in 0..MAX_REDRAWS {
            let terms: Vec<(Vec<C64>, Vec<C64>)> = (1..=self.harmonics)
                .map(|m| {
                    let bound = self.radius / m as f64;
                    let a = (0..n).map(|_| disc(bound, &mut r)).collect();
                    let b = (0..n).map(|_| disc(bound, &mut r)).collect();
                    (a, b)
                })
                .collect();
            let path = PathSpec::fourier(self.base.clone(), terms);
            if path.stays_in(&self.region, REJECTION_SAMPLES) {
                return Ok(path);
            }
        }
        Err(Error::BadParams(format!(
            "no loop of radius {} fits the region",
            self.radius
        )))
    }
}

pub fn random_loops(family: &LoopFamily, seed: u64, count: usize) -> Result<Vec<PathSpec>> {
    (0..count).map(|i| family.loop_at(seed, i)).collect()
}

/// Transports around sampled loops plus curvature operators pulled back to the base.
#[derive(Debug, Clone)]
pub struct HolonomySample {
    pub base: ChartPoint,
    /// Metric at the base, for orthonormalising the fixed subspace.
    pub metric: CMatrix,
    pub loop_ids: Vec<u64>,
    pub loops: Vec<PathSpec>,
    pub transports: Vec<TransportResult>,
    /// Each `P⁻¹ Ω^T(X, Y) P` for a transport `P` from the base.
    pub curvature_ops: Vec<CMatrix>,
}

impl HolonomySample {
    /// A sample consisting of operators only.
    pub fn from_operators(base: ChartPoint, metric: CMatrix, ops: Vec<CMatrix>) -> HolonomySample {
        HolonomySample {
            base,
            metric,
            loop_ids: Vec::new(),
            loops: Vec::new(),
            transports: Vec::new(),
            curvature_ops: ops,
        }
    }
}

/// Coordinate matrices `(R)^k_j` of every `Ω^T(∂_a, ∂_b̄)` and `Ω^T(∂_a, ∂_b)` at a point.
pub fn curvature_operators(field: &MetricField, point: &ChartPoint) -> Result<Vec<CMatrix>> {
    let jet = wirtinger_jet(field, point, 2)?;
    let t = chern_tensors(&jet)?;
    let (mixed, holo) = formula_blocks(&t)?;
    let n = field.dim;
    let mut ops = Vec::with_capacity(2 * n * n);
    for block in [&mixed, &holo] {
        for a in 0..n {
            for b in 0..n {
                ops.push(op_matrix(block, a, b));
            }
        }
    }
    Ok(ops)
}

fn op_matrix(block: &CTensor, a: usize, b: usize) -> CMatrix {
    let n = block.n;
    CMatrix::from_fn(n, n, |k, j| block[[a, b, j, k]])
}

/// Transports around `count` seeded loops, with curvature operators at the base and
/// at each loop's midpoint (conjugated back along the first half of the loop).
pub fn sample_holonomy(field: &MetricField, family: &LoopFamily, seed: u64, count: usize) -> Result<HolonomySample> {
    let base = ChartPoint::new(family.base.clone());
    if !field.contains(&base) {
        return Err(Error::DomainViolation {
            field: field.name.clone(),
            node: base.as_pairs(),
        });
    }
    let loops = random_loops(family, seed, count)?;
    let opts = TransportOptions::default();
    let per_loop: Vec<Result<(TransportResult, Vec<CMatrix>)>> = loops
        .par_iter()
        .map(|path| {
            let full = transport_matrix(field, path, &opts)?;
            let half = transport_matrix(field, &path.portion(0.0, 0.5), &opts)?;
            let back = inverse_checked(&half.matrix, MAX_CONDITION)?;
            let mid = ChartPoint::new(path.point(0.5));
            let ops = curvature_operators(field, &mid)?
                .into_iter()
                .map(|r| &back * r * &half.matrix)
                .collect();
            Ok((full, ops))
        })
        .collect();
    let mut curvature_ops = curvature_operators(field, &base)?;
    let mut transports = Vec::with_capacity(count);
    for r in per_loop {
        let (t, ops) = r?;
        transports.push(t);
        curvature_ops.extend(ops);
    }
    Ok(HolonomySample {
        metric: field.eval(&base),
        base,
        loop_ids: (0..count as u64).collect(),
        loops,
        transports,
        curvature_ops,
    })
}

/// Estimated fixed subspace `F` at the base.
#[derive(Debug, Clone)]
pub struct FixedSubspace {
    pub dim: usize,
    /// Orthonormal in the base metric.
    pub basis: Vec<Vec<C64>>,
    pub smallest_retained: Option<f64>,
    pub largest_discarded: Option<f64>,
    /// `smallest_retained / largest_discarded`; absent if either side is empty.
    pub spectral_gap: Option<f64>,
    pub singular_values: Vec<f64>,
}

/// Common kernel of all `P_γ - I` and all curvature operators.
pub fn fixed_subspace(sample: &HolonomySample) -> FixedSubspace {
    fixed_subspace_with(sample, KERNEL_CUTOFF)
}

pub fn fixed_subspace_with(sample: &HolonomySample, rel_cutoff: f64) -> FixedSubspace {
    let n = sample.metric.nrows();
    let blocks: Vec<CMatrix> = sample
        .transports
        .iter()
        .map(|t| &t.matrix - CMatrix::identity(n, n))
        .chain(sample.curvature_ops.iter().cloned())
        .collect();
    let mut stacked = CMatrix::zeros(blocks.len().max(1) * n, n);
    for (b, m) in blocks.iter().enumerate() {
        stacked.view_mut((b * n, 0), (n, n)).copy_from(m);
    }
    let split = kernel_by_svd_floor(&stacked, rel_cutoff, KERNEL_FLOOR);
    let basis = gram_schmidt(&sample.metric, &split.kernel, 1e-12);
    let spectral_gap = match (split.smallest_retained, split.largest_discarded) {
        (Some(s), Some(l)) if l > 0.0 => Some(s / l),
        _ => None,
    };
    FixedSubspace {
        dim: basis.len(),
        basis,
        smallest_retained: split.smallest_retained,
        largest_discarded: split.largest_discarded,
        spectral_gap,
        singular_values: split.singular_values,
    }
}

/// `{base, loops: [{seed, matrix, error}], F_dim, F_basis, spectral_gap}`.
pub fn holonomy_json(sample: &HolonomySample, fixed: &FixedSubspace) -> Value {
    json!({
        "base": vector_json(&sample.base),
        "loops": sample
            .loop_ids
            .iter()
            .zip(&sample.transports)
            .zip(&sample.loops)
            .map(|((id, t), path)| json!({
                "seed": id,
                "path": path.to_json(),
                "matrix": matrix_json(&t.matrix),
                "error": t.error_estimate,
            }))
            .collect::<Vec<_>>(),
        "F_dim": fixed.dim,
        "F_basis": fixed.basis.iter().map(|v| vector_json(v)).collect::<Vec<_>>(),
        "spectral_gap": fixed.spectral_gap,
    })
}
