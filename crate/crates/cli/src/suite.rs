//! Check batteries shared by the commands, and the numbered acceptance criteria.

use chernlab::chart::pack::chern_pack;
use chernlab::chart::tensor::matrix_json;
use chernlab::hcf::{flow_invariant, parallel_persistence_check, variation_check, HSource};
use chernlab::linalg::{c, max_abs, subspace_angle, CMatrix, C64};
use chernlab::models::{
    model_registry, normalizer, null_rho_equals_normalizer_check, rho_form, FrameMetric, LieAlgebraData, Model,
    SubalgebraData,
};
use chernlab::sampling::sample_points;
use chernlab::twisted::{
    bracket_structure, fixed_subspace, holonomy_json, killing_residual, nt_parallel_residual, perturbed_fields,
    sample_holonomy, tt_curvature,
};
use chernlab::{
    bianchi_residuals, griffiths_min, rho_closedness_residual, rho_nullspace, wirtinger_jet, BianchiResiduals,
    ChartPoint, Region, SamplerConfig, VectorField,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::report::{Comparison, Record};

/// Stable identifiers tying each record to the statement it exercises.
pub mod anchors {
    pub const BIANCHI: &str = "chern.bianchi_identities";
    pub const TWISTED_TYPE: &str = "twisted.curvature_type";
    pub const KILLING: &str = "twisted.killing_parallel";
    pub const CLOSEDNESS: &str = "chern.ricci_closed";
    pub const FIXED_SUBSPACE: &str = "holonomy.fixed_subspace";
    pub const SPANNED_BY_ZETA: &str = "holonomy.spanned_by_zeta";
    pub const NULL_RHO: &str = "ricci.null_is_orbit";
    pub const CLOSED_FORM: &str = "chern.hopf_closed_form";
    pub const GRIFFITHS: &str = "chern.griffiths_semipositive";
    pub const HCF: &str = "hcf.equation";
    pub const VARIATION: &str = "hcf.connection_variation";
    pub const VARIATION_TWISTED: &str = "hcf.twisted_variation";
    pub const PERSISTENCE: &str = "hcf.parallel_persistence";
    pub const NORMALIZER: &str = "submersion.normalizer";
    pub const STRUCTURE: &str = "bracket.structure_constants";
    pub const DETERMINISM: &str = "report.determinism";
}

pub type Checked = chernlab::Result<Vec<Record>>;

/// Turns an engine error into a single failed record.
pub fn guarded(name: &str, anchor: &'static str, threshold: f64, run: impl FnOnce() -> Checked) -> Vec<Record> {
    run().unwrap_or_else(|e| vec![Record::failed(name, anchor, Comparison::Below, threshold, e)])
}

/// Evaluates `f` at every point in parallel; results and the reported error keep point order.
fn per_point<T: Send>(
    points: &[ChartPoint],
    f: impl Fn(&ChartPoint) -> chernlab::Result<T> + Sync,
) -> chernlab::Result<Vec<T>> {
    let results: Vec<chernlab::Result<T>> = points.par_iter().map(&f).collect();
    results.into_iter().collect()
}

fn points(m: &Model, seed: u64, count: usize) -> Vec<ChartPoint> {
    sample_points(&m.field.sample_region, m.field.dim, seed, count)
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn zeta_of(m: &Model) -> chernlab::Result<&VectorField> {
    m.zeta
        .as_ref()
        .ok_or_else(|| chernlab::Error::BadParams(format!("model `{}` has no designated Killing field", m.name)))
}

pub fn bianchi(m: &Model, seed: u64, samples: usize, tol: f64) -> Checked {
    let pts = points(m, seed, samples);
    let res = per_point(&pts, |p| bianchi_residuals(&wirtinger_jet(&m.field, p, 3)?))?;
    Ok(BianchiResiduals::names()
        .iter()
        .enumerate()
        .map(|(k, id)| {
            let worst = max_of(res.iter().map(|r| r.as_array()[k]));
            Record::below(format!("bianchi.{}.{id}", m.name), anchors::BIANCHI, worst, tol)
                .with_details(json!({ "points": samples }))
        })
        .collect())
}

pub fn proposition33(m: &Model, seed: u64, samples: usize, tol: f64, tol_anti: f64) -> Checked {
    let pts = points(m, seed, samples);
    let res = per_point(&pts, |p| Ok(tt_curvature(&wirtinger_jet(&m.field, p, 3)?)?.residuals))?;
    Ok(vec![
        Record::below(
            format!("proposition33.{}.discrepancy", m.name),
            anchors::TWISTED_TYPE,
            max_of(res.iter().map(|r| r.discrepancy())),
            tol,
        )
        .with_details(json!({
            "mixed": max_of(res.iter().map(|r| r.mixed)),
            "holo": max_of(res.iter().map(|r| r.holo)),
            "points": samples,
        })),
        Record::below(
            format!("proposition33.{}.anti_part", m.name),
            anchors::TWISTED_TYPE,
            max_of(res.iter().map(|r| r.anti_norm)),
            tol_anti,
        ),
    ])
}

pub const PERTURBED_FIELDS: usize = 5;

/// ζ small on both residuals at every point; each perturbation large on both somewhere.
pub fn killing_equiv(m: &Model, seed: u64, samples: usize, small: f64, large: f64) -> Checked {
    let zeta = zeta_of(m)?;
    let pts = points(m, seed, samples);
    let both = |vf: &VectorField| -> chernlab::Result<(f64, f64)> {
        let r = per_point(&pts, |p| {
            Ok((
                killing_residual(&m.field, vf, p)?.total(),
                nt_parallel_residual(&m.field, vf, p)?,
            ))
        })?;
        Ok((max_of(r.iter().map(|x| x.0)), max_of(r.iter().map(|x| x.1))))
    };
    let (zk, zp) = both(zeta)?;
    let mut pk = Vec::new();
    let mut pp = Vec::new();
    for vf in perturbed_fields(zeta, seed, PERTURBED_FIELDS, 0.2, 0.01) {
        let (k, p) = both(&vf)?;
        pk.push(k);
        pp.push(p);
    }
    let min_of = |v: &[f64]| v.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(vec![
        Record::below(format!("killing.{}.zeta.killing", m.name), anchors::KILLING, zk, small),
        Record::below(format!("killing.{}.zeta.parallel", m.name), anchors::KILLING, zp, small),
        Record::above(
            format!("killing.{}.perturbed.killing", m.name),
            anchors::KILLING,
            min_of(&pk),
            large,
        )
        .with_details(json!({ "per_field": pk })),
        Record::above(
            format!("killing.{}.perturbed.parallel", m.name),
            anchors::KILLING,
            min_of(&pp),
            large,
        )
        .with_details(json!({ "per_field": pp })),
    ])
}

pub fn closedness(m: &Model, seed: u64, samples: usize, tol: f64) -> Checked {
    let pts = points(m, seed, samples);
    let res = per_point(&pts, |p| rho_closedness_residual(&m.field, p))?;
    Ok(vec![Record::below(
        format!("closedness.{}", m.name),
        anchors::CLOSEDNESS,
        max_of(res),
        tol,
    )])
}

pub const GRIFFITHS_VECTORS: usize = 10;

/// Minimum of the Griffiths quadratic form; `negative` asks for a clearly negative value instead.
pub fn griffiths(m: &Model, seed: u64, points: usize, tol: f64, negative: bool) -> Checked {
    let min = griffiths_min(&m.field, &SamplerConfig::new(points, GRIFFITHS_VECTORS, seed))?;
    let name = format!("griffiths.{}.min", m.name);
    let details = json!({
        "samples": points * GRIFFITHS_VECTORS,
        "point": chernlab::chart::tensor::vector_json(&min.point),
    });
    let record = if negative {
        Record::below(name, anchors::GRIFFITHS, min.value, -tol)
    } else {
        Record::at_least(name, anchors::GRIFFITHS, min.value, -tol)
    };
    Ok(vec![record.with_details(details)])
}

/// Fixed subspace from `loops` seeded loops, compared with ζ, the expected dimension
/// and the subspace from twice as many loops.
pub fn holonomy(m: &Model, seed: u64, loops: usize, tol: f64) -> chernlab::Result<(Vec<Record>, Value)> {
    let sample = sample_holonomy(&m.field, &m.loops, seed, loops)?;
    let fixed = fixed_subspace(&sample);
    let doubled = sample_holonomy(&m.field, &m.loops, seed, 2 * loops)?;
    let fixed2 = fixed_subspace(&doubled);
    let mut records = Vec::new();
    if let Some(d) = m.expected_f_dim {
        records.push(Record::equal(
            format!("holonomy.{}.dim", m.name),
            anchors::FIXED_SUBSPACE,
            fixed.dim,
            d,
        ));
    }
    if let Some(zeta) = &m.zeta {
        if m.expected_f_dim == Some(1) {
            let z = zeta.eval(&m.loops.base);
            let angle = subspace_angle(&sample.metric, &fixed.basis, &[z]);
            records.push(Record::below(
                format!("holonomy.{}.zeta_angle", m.name),
                anchors::SPANNED_BY_ZETA,
                angle,
                tol,
            ));
        }
    }
    records.push(Record::equal(
        format!("holonomy.{}.stable_dim", m.name),
        anchors::FIXED_SUBSPACE,
        fixed2.dim,
        fixed.dim,
    ));
    records.push(
        Record::below(
            format!("holonomy.{}.stable_angle", m.name),
            anchors::FIXED_SUBSPACE,
            subspace_angle(&sample.metric, &fixed.basis, &fixed2.basis),
            tol,
        )
        .with_details(json!({ "loops": 2 * loops })),
    );
    Ok((records, holonomy_json(&sample, &fixed)))
}

pub fn rho_null(m: &Model, seed: u64, samples: usize, tol: f64) -> Checked {
    let zeta = zeta_of(m)?;
    let pts = points(m, seed, samples);
    let res = per_point(&pts, |p| {
        let pack = chern_pack(&wirtinger_jet(&m.field, p, 2)?)?;
        let null = rho_nullspace(&pack.rho, &pack.g)?;
        let angle = subspace_angle(&pack.g, &null.basis, &[zeta.eval(p)]);
        Ok((null.basis.len(), angle))
    })?;
    let wrong_dim = res.iter().filter(|r| r.0 != 1).count();
    Ok(vec![
        Record::equal(
            format!("rho_null.{}.points_with_dim_not_1", m.name),
            anchors::NULL_RHO,
            wrong_dim,
            0,
        ),
        Record::below(
            format!("rho_null.{}.zeta_angle", m.name),
            anchors::NULL_RHO,
            max_of(res.iter().map(|r| r.1)),
            tol,
        ),
    ])
}

fn kron(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// `-∂_i∂_j̄ φ` for `φ = -log|z|²`.
fn hopf_ddbar(z: &[C64], i: usize, j: usize) -> C64 {
    let r2: f64 = z.iter().map(|w| w.norm_sqr()).sum();
    c(kron(i, j) / r2, 0.0) - z[i].conj() * z[j] / (r2 * r2)
}

/// Engine curvature and Ricci form against the conformally flat closed forms on `hopf_standard`.
pub fn closed_form(seed: u64, samples: usize, tol: f64) -> Checked {
    let m = model_registry("hopf_standard")?;
    let pts = points(&m, seed, samples);
    let res = per_point(&pts, |p| {
        let pack = chern_pack(&wirtinger_jet(&m.field, p, 2)?)?;
        let r2 = p.norm().powi(2);
        let (mut err_o, mut scale_o, mut err_r, mut scale_r) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for i in 0..2 {
            for j in 0..2 {
                let d = hopf_ddbar(p, i, j);
                for k in 0..2 {
                    for l in 0..2 {
                        let exact = d * (kron(k, l) / r2);
                        scale_o = scale_o.max(exact.norm());
                        err_o = err_o.max((pack.omega_low[[i, j, k, l]] - exact).norm());
                    }
                }
                let exact = d * 2.0;
                scale_r = scale_r.max(exact.norm());
                err_r = err_r.max((pack.rho[(i, j)] - exact).norm());
            }
        }
        Ok((err_o / scale_o, err_r / scale_r))
    })?;
    Ok(vec![
        Record::below(
            "closed_form.hopf_standard.omega",
            anchors::CLOSED_FORM,
            max_of(res.iter().map(|r| r.0)),
            tol,
        ),
        Record::below(
            "closed_form.hopf_standard.rho",
            anchors::CLOSED_FORM,
            max_of(res.iter().map(|r| r.1)),
            tol,
        ),
    ])
}

fn diag(values: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        values.len(),
        values.iter().map(|&x| c(x, 0.0)),
    ))
}

/// Relative endpoint error of the affine flow from `diag(a, b)` against `b(t) = b e^{-t/a}`.
pub fn affine_endpoint_error(g0: &CMatrix, t: f64, steps: usize) -> chernlab::Result<f64> {
    let fm = FrameMetric::new(LieAlgebraData::builtin("affine")?, g0.clone())?;
    let traj = flow_invariant(&fm, t, steps)?;
    let (a, b) = (g0[(0, 0)].re, g0[(1, 1)].re);
    let exact = diag(&[a, b * (-t / a).exp()]);
    let g = traj.final_metric();
    Ok((g - &exact).norm() / exact.norm())
}

pub fn flow_closed_form(t: f64, steps: usize, tol: f64, order_tol: f64) -> Checked {
    let g0 = diag(&[1.0, 1.0]);
    let fine = affine_endpoint_error(&g0, t, steps)?;
    let coarse = affine_endpoint_error(&g0, t, (steps / 2).max(1))?;
    Ok(vec![
        Record::below("flow.affine.closed_form", anchors::HCF, fine, tol)
            .with_details(json!({ "t": t, "steps": steps })),
        Record::at_least("flow.affine.halving_gain", anchors::HCF, coarse / fine, order_tol)
            .with_details(json!({ "coarse_error": coarse, "fine_error": fine })),
    ])
}

pub const VARIATION_EPSILON: f64 = 1e-3;

pub fn variation(m: &Model, seed: u64, samples: usize, tol: f64, order_tol: f64) -> Checked {
    let pts = points(m, seed, samples);
    let res = per_point(&pts, |p| variation_check(&m.field, &HSource::Hcf, p, VARIATION_EPSILON))?;
    let lemma = res.iter().map(|r| r.residual_lemma.unwrap_or(f64::NAN));
    let lemma = lemma.fold(
        0.0,
        |a: f64, b| if b.is_nan() || a.is_nan() { f64::NAN } else { a.max(b) },
    );
    let order_dev = max_of(res.iter().map(|r| (r.observed_order - 2.0).abs()));
    Ok(vec![
        Record::below(
            format!("variation.{}.gamma", m.name),
            anchors::VARIATION,
            max_of(res.iter().map(|r| r.residual_gamma)),
            tol,
        ),
        Record::below(
            format!("variation.{}.torsion", m.name),
            anchors::VARIATION,
            max_of(res.iter().map(|r| r.residual_torsion)),
            tol,
        ),
        Record::below(
            format!("variation.{}.twisted", m.name),
            anchors::VARIATION_TWISTED,
            max_of(res.iter().map(|r| r.residual_twisted)),
            tol,
        ),
        Record::below(
            format!("variation.{}.lemma", m.name),
            anchors::VARIATION_TWISTED,
            lemma,
            tol,
        )
        .with_details(json!({ "direct": max_of(res.iter().filter_map(|r| r.residual_lemma_direct)) })),
        Record::below(
            format!("variation.{}.order_deviation", m.name),
            anchors::VARIATION,
            order_dev,
            order_tol,
        )
        .with_details(
            json!({ "orders": res.iter().map(|r| r.observed_order).collect::<Vec<_>>(), "epsilon": VARIATION_EPSILON }),
        ),
    ])
}

pub fn persistence(name: &str, fm: &FrameMetric, t: f64, steps: usize, tol: f64) -> Checked {
    let r = parallel_persistence_check(fm, t, steps)?;
    Ok(vec![Record::below(
        format!("persistence.{name}"),
        anchors::PERSISTENCE,
        r.residual,
        tol,
    )
    .with_details(json!({
        "steps_checked": r.steps_checked,
        "chart_omega": r.chart_omega,
        "chart_twisted": r.chart_twisted,
        "chart_times": r.chart_times,
    }))])
}

pub const NORMALIZER_SAMPLES: usize = 40;

/// Null space of ρ against the normalizer, plus the named expectations of the quotient.
pub fn submersion(
    alg: &LieAlgebraData,
    sub: &SubalgebraData,
    h: &CMatrix,
    seed: u64,
    tol: f64,
) -> chernlab::Result<(Vec<Record>, Value)> {
    let check = null_rho_equals_normalizer_check(alg, sub, h, seed, NORMALIZER_SAMPLES)?;
    let rho = rho_form(alg, sub, h)?;
    let tag = format!("{}/{}", alg.name, sub.name);
    let records = vec![
        Record::below(format!("submersion.{tag}.angle"), anchors::NORMALIZER, check.angle, tol),
        Record::equal(
            format!("submersion.{tag}.dim_null"),
            anchors::NORMALIZER,
            check.dim_null,
            check.dim_normalizer,
        ),
        Record::equal(
            format!("submersion.{tag}.mismatches"),
            anchors::NORMALIZER,
            check.mismatches,
            0,
        ),
    ];
    let artifacts = json!({
        "dim_null": check.dim_null,
        "dim_normalizer": check.dim_normalizer,
        "dim_sub": check.dim_sub,
        "quotient_null_dim": check.quotient_null_dim,
        "worst_inside": check.worst_inside,
        "weakest_outside": if check.weakest_outside.is_finite() { json!(check.weakest_outside) } else { Value::Null },
        "rho": matrix_json(&rho),
    });
    Ok((records, artifacts))
}

/// Left-invariant fields `z_0 ∂_0`, `z_0 ∂_1` of the affine group.
pub fn affine_fields() -> Vec<VectorField> {
    vec![
        VectorField::new("X0", 2, |z: &[C64]| vec![z[0], c(0.0, 0.0)]),
        VectorField::new("X1", 2, |z: &[C64]| vec![c(0.0, 0.0), z[0]]),
    ]
}

pub const BRACKET_POINTS: usize = 10;

pub fn bracket(seed: u64, tol: f64) -> Checked {
    let alg = LieAlgebraData::builtin("affine")?;
    // keep z_0 away from 0, where the fields degenerate
    let pts: Vec<ChartPoint> = sample_points(&Region::Box { half_width: 0.5 }, 2, seed, BRACKET_POINTS)
        .into_iter()
        .map(|p| ChartPoint::new(vec![p[0] + c(1.0, 0.0), p[1]]))
        .collect();
    let b = bracket_structure(&affine_fields(), &pts)?;
    let mut deviation: f64 = 0.0;
    for p in 0..pts.len() {
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    deviation = deviation.max((b.coefficient(p, i, j, k) - alg.coef(i, j, k)).norm());
                }
            }
        }
    }
    Ok(vec![
        Record::below("bracket.affine.variation", anchors::STRUCTURE, b.variation, tol),
        Record::below("bracket.affine.out_of_span", anchors::STRUCTURE, b.out_of_span, tol),
        Record::below("bracket.affine.structure_constants", anchors::STRUCTURE, deviation, tol),
    ])
}

/// Titles of the acceptance criteria, in suite order.
pub const CRITERIA: [&str; 13] = [
    "Bianchi suite",
    "twisted curvature type",
    "Killing equivalence",
    "holonomy fixed subspace",
    "null space of rho",
    "closed-form curvature",
    "Griffiths sampler",
    "flow closed form",
    "variation formulas",
    "parallel persistence",
    "submersion and normalizer",
    "bracket structure constants",
    "determinism",
];

fn model(spec: &str) -> Model {
    model_registry(spec).expect("registry model")
}

fn prefixed(id: usize, records: Vec<Record>) -> Vec<Record> {
    records
        .into_iter()
        .map(|mut r| {
            r.name = format!("c{id:02}.{}", r.name);
            r
        })
        .collect()
}

/// Runs criterion `id` (1..=12) at its fixed sizes; tolerances and seed come from `cfg`.
pub fn run_criterion(id: usize, cfg: &RunConfig) -> Vec<Record> {
    let seed = cfg.seed;
    let tol = |k: &str| cfg.tol(k);
    let records = match id {
        1 => ["hopf_standard", "polynomial_perturbation", "flat"]
            .iter()
            .flat_map(|spec| {
                let m = model(spec);
                guarded(&format!("bianchi.{}", m.name), anchors::BIANCHI, tol("bianchi"), || {
                    bianchi(&m, seed, 100, tol("bianchi"))
                })
            })
            .collect(),
        2 => {
            let m = model("hopf_standard");
            guarded("proposition33", anchors::TWISTED_TYPE, tol("proposition33"), || {
                proposition33(&m, seed, 50, tol("proposition33"), tol("proposition33_anti"))
            })
        }
        3 => {
            let m = model("hopf_standard");
            guarded("killing", anchors::KILLING, tol("killing_small"), || {
                killing_equiv(&m, seed, 20, tol("killing_small"), tol("killing_large"))
            })
        }
        4 => {
            let mut out = Vec::new();
            for (spec, loops) in [("hopf_standard", 20), ("flat", 10)] {
                let m = model(spec);
                out.extend(guarded(
                    &format!("holonomy.{}", m.name),
                    anchors::FIXED_SUBSPACE,
                    tol("holonomy_angle"),
                    || holonomy(&m, seed, loops, tol("holonomy_angle")).map(|(r, _)| r),
                ));
            }
            out
        }
        5 => {
            let m = model("hopf_standard");
            guarded("rho_null", anchors::NULL_RHO, tol("rho_null_angle"), || {
                rho_null(&m, seed, 20, tol("rho_null_angle"))
            })
        }
        6 => guarded("closed_form", anchors::CLOSED_FORM, tol("closed_form"), || {
            closed_form(seed, 50, tol("closed_form"))
        }),
        7 => {
            let mut out = guarded("griffiths.hopf_standard", anchors::GRIFFITHS, tol("griffiths"), || {
                griffiths(&model("hopf_standard"), seed, 1000, tol("griffiths"), false)
            });
            out.extend(guarded(
                "griffiths.gaussian_1d",
                anchors::GRIFFITHS,
                tol("griffiths_negative"),
                || griffiths(&model("gaussian_1d"), seed, 1000, tol("griffiths_negative"), true),
            ));
            out
        }
        8 => guarded("flow.affine", anchors::HCF, tol("flow"), || {
            flow_closed_form(1.0, 20, tol("flow"), tol("flow_order"))
        }),
        9 => {
            let m = model("hopf_standard");
            guarded("variation", anchors::VARIATION, tol("variation"), || {
                variation(&m, seed, 5, tol("variation"), tol("variation_order"))
            })
        }
        10 => {
            let mut out = Vec::new();
            for (name, scale) in [("affine", 1.0), ("sl2", 10.0)] {
                out.extend(guarded(
                    &format!("persistence.{name}"),
                    anchors::PERSISTENCE,
                    tol("persistence"),
                    || {
                        let alg = LieAlgebraData::builtin(name)?;
                        let n = alg.dim;
                        let fm = FrameMetric::new(alg, CMatrix::identity(n, n) * c(scale, 0.0))?;
                        persistence(name, &fm, 1.0, 20, tol("persistence"))
                    },
                ));
            }
            out
        }
        11 => criterion_submersion(seed, tol("normalizer")),
        12 => guarded("bracket.affine", anchors::STRUCTURE, tol("bracket"), || {
            bracket(seed, tol("bracket"))
        }),
        other => panic!("no criterion {other}"),
    };
    prefixed(id, records)
}

fn criterion_submersion(seed: u64, tol: f64) -> Vec<Record> {
    let mut out = Vec::new();
    out.extend(guarded("submersion.sl2/borel", anchors::NORMALIZER, tol, || {
        let alg = LieAlgebraData::builtin("sl2")?;
        let sub = SubalgebraData::named(&alg, "borel")?;
        let id = CMatrix::identity(3, 3);
        let (mut records, artifacts) = submersion(&alg, &sub, &id, seed, tol)?;
        records.push(Record::equal(
            "submersion.sl2/borel.quotient_null_dim",
            anchors::NORMALIZER,
            artifacts["quotient_null_dim"].as_u64().unwrap_or(u64::MAX) as usize,
            0,
        ));
        records.push(Record::below(
            "submersion.sl2/borel.normalizer_is_borel",
            anchors::NORMALIZER,
            subspace_angle(&id, &normalizer(&alg, &sub), &sub.basis),
            tol,
        ));
        Ok(records)
    }));
    out.extend(guarded(
        "submersion.heisenberg/center",
        anchors::NORMALIZER,
        tol,
        || {
            let alg = LieAlgebraData::builtin("heisenberg")?;
            let sub = SubalgebraData::named(&alg, "center")?;
            let id = CMatrix::identity(3, 3);
            let (mut records, _) = submersion(&alg, &sub, &id, seed, tol)?;
            records.push(Record::below(
                "submersion.heisenberg/center.rho_max",
                anchors::NORMALIZER,
                max_abs(&rho_form(&alg, &sub, &id)?),
                tol,
            ));
            records.push(Record::equal(
                "submersion.heisenberg/center.normalizer_dim",
                anchors::NORMALIZER,
                normalizer(&alg, &sub).len(),
                alg.dim,
            ));
            Ok(records)
        },
    ));
    out
}

/// Criteria whose parallel evaluation is compared across thread pools.
pub const DETERMINISM_SUBSET: [usize; 3] = [1, 4, 7];

fn subset_bytes(cfg: &RunConfig, threads: usize) -> Vec<u8> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool");
    let records: Vec<Record> = pool.install(|| {
        DETERMINISM_SUBSET
            .iter()
            .flat_map(|&id| run_criterion(id, cfg))
            .collect()
    });
    serde_json::to_vec(&records).expect("records serialise")
}

/// Byte comparison of a criterion subset under 1 and 4 threads, and a repeated run.
pub fn determinism(cfg: &RunConfig) -> Vec<Record> {
    let one = subset_bytes(cfg, 1);
    let four = subset_bytes(cfg, 4);
    let again = subset_bytes(cfg, 4);
    let differing = |a: &[u8], b: &[u8]| a.iter().zip(b).filter(|(x, y)| x != y).count() + a.len().abs_diff(b.len());
    prefixed(
        13,
        vec![
            Record::equal(
                "determinism.threads_1_vs_4",
                anchors::DETERMINISM,
                differing(&one, &four),
                0,
            )
            .with_details(json!({ "criteria": DETERMINISM_SUBSET, "bytes": one.len() })),
            Record::equal("determinism.repeat", anchors::DETERMINISM, differing(&four, &again), 0),
        ],
    )
}

/// All criteria in order; 1..=12 may run concurrently.
pub fn verify_all(cfg: &RunConfig) -> Vec<Record> {
    let mut records: Vec<Record> = (1..=12usize)
        .into_par_iter()
        .map(|id| run_criterion(id, cfg))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    records.extend(determinism(cfg));
    records
}
