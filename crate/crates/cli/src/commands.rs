//! Command implementations: each builds a report from a resolved configuration.

use std::path::Path;

use chernlab::hcf::flow_invariant;
use chernlab::linalg::{smallest_eigenvalue, CMatrix};
use chernlab::models::{model_registry, FrameMetric, Model};
use clap::ValueEnum;
use serde_json::{json, Value};

use crate::config::{load_algebra, load_subalgebra, parse_matrix, ConfigError, RunConfig};
use crate::report::{Comparison, Record, Report};
use crate::suite::{self, anchors, guarded};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    Bianchi,
    Proposition33,
    KillingEquiv,
    Closedness,
    Griffiths,
}

impl CheckKind {
    fn default_samples(self) -> usize {
        match self {
            CheckKind::Bianchi => 100,
            CheckKind::Proposition33 => 50,
            CheckKind::KillingEquiv => 20,
            CheckKind::Closedness => 10,
            CheckKind::Griffiths => 1000,
        }
    }

    fn label(self) -> &'static str {
        match self {
            CheckKind::Bianchi => "bianchi",
            CheckKind::Proposition33 => "proposition33",
            CheckKind::KillingEquiv => "killing-equiv",
            CheckKind::Closedness => "closedness",
            CheckKind::Griffiths => "griffiths",
        }
    }
}

fn registry_model(cfg: &RunConfig) -> Result<Model, ConfigError> {
    Ok(model_registry(cfg.model.as_deref().unwrap_or("hopf_standard"))?)
}

pub fn check(kind: CheckKind, cfg: &RunConfig) -> Result<Report, ConfigError> {
    let m = registry_model(cfg)?;
    if kind == CheckKind::KillingEquiv && m.zeta.is_none() {
        return Err(ConfigError::Invalid(format!(
            "model `{}` has no designated Killing field",
            m.name
        )));
    }
    let samples = cfg.samples.unwrap_or(kind.default_samples());
    let seed = cfg.seed;
    let t = |k: &str| cfg.tol(k);
    let records = match kind {
        CheckKind::Bianchi => guarded("bianchi", anchors::BIANCHI, t("bianchi"), || {
            suite::bianchi(&m, seed, samples, t("bianchi"))
        }),
        CheckKind::Proposition33 => guarded("proposition33", anchors::TWISTED_TYPE, t("proposition33"), || {
            suite::proposition33(&m, seed, samples, t("proposition33"), t("proposition33_anti"))
        }),
        CheckKind::KillingEquiv => guarded("killing", anchors::KILLING, t("killing_small"), || {
            suite::killing_equiv(&m, seed, samples, t("killing_small"), t("killing_large"))
        }),
        CheckKind::Closedness => guarded("closedness", anchors::CLOSEDNESS, t("closedness"), || {
            suite::closedness(&m, seed, samples, t("closedness"))
        }),
        CheckKind::Griffiths => guarded("griffiths", anchors::GRIFFITHS, t("griffiths"), || {
            suite::griffiths(&m, seed, samples, t("griffiths"), false)
        }),
    };
    Ok(Report::new(
        format!("check {}", kind.label()),
        cfg,
        records,
        Value::Null,
    ))
}

pub fn holonomy(cfg: &RunConfig) -> Result<Report, ConfigError> {
    let m = registry_model(cfg)?;
    let loops = cfg.loops.unwrap_or(20);
    let tol = cfg.tol("holonomy_angle");
    let (records, artifacts) = match suite::holonomy(&m, cfg.seed, loops, tol) {
        Ok(x) => x,
        Err(e) => (
            vec![Record::failed(
                "holonomy",
                anchors::FIXED_SUBSPACE,
                Comparison::Below,
                tol,
                e,
            )],
            Value::Null,
        ),
    };
    Ok(Report::new("holonomy", cfg, records, artifacts))
}

fn is_diagonal(g: &CMatrix) -> bool {
    (0..g.nrows()).all(|i| (0..g.ncols()).all(|j| i == j || g[(i, j)].norm() == 0.0))
}

fn write_trajectory(path: &Path, csv: String, json: &Value) -> Result<(), ConfigError> {
    let text = if path.extension().is_some_and(|e| e == "json") {
        serde_json::to_string_pretty(json).expect("trajectory serialises") + "\n"
    } else {
        csv
    };
    std::fs::write(path, text).map_err(|e| ConfigError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn flow(cfg: &RunConfig) -> Result<Report, ConfigError> {
    let spec = cfg.algebra.as_deref().or(cfg.model.as_deref()).unwrap_or("affine");
    let (alg, _) = load_algebra(spec)?;
    let n = alg.dim;
    let g0 = parse_matrix(cfg.g0.as_deref().unwrap_or("identity"), n)?;
    let fm = FrameMetric::new(alg.clone(), g0.clone())?;
    let t_end = cfg.t.unwrap_or(1.0);
    let steps = cfg.steps.unwrap_or(20);
    let tol = cfg.tol("flow");
    let name = alg.name.clone();
    let mut records = Vec::new();
    let mut artifacts = json!({ "algebra": name, "t": t_end, "steps": steps });
    match flow_invariant(&fm, t_end, steps) {
        Ok(traj) => {
            records.push(Record::below(
                format!("flow.{name}.step_error"),
                anchors::HCF,
                traj.step_errors.iter().cloned().fold(0.0, f64::max),
                tol,
            ));
            records.push(Record::above(
                format!("flow.{name}.final_min_eigenvalue"),
                anchors::HCF,
                smallest_eigenvalue(traj.final_metric()),
                0.0,
            ));
            if alg.is_abelian() {
                let drift = traj.metrics.iter().map(|g| (g - &g0).norm()).fold(0.0, f64::max);
                records.push(Record::below(format!("flow.{name}.constant"), anchors::HCF, drift, tol));
            }
            if spec == "affine" && is_diagonal(&g0) {
                records.push(Record::below(
                    format!("flow.{name}.closed_form"),
                    anchors::HCF,
                    suite::affine_endpoint_error(&g0, t_end, steps)?,
                    tol,
                ));
            }
            artifacts["final_metric"] = chernlab::chart::tensor::matrix_json(traj.final_metric());
            if let Some(path) = &cfg.trajectory {
                write_trajectory(path, traj.to_csv(), &traj.to_json())?;
            }
        }
        Err(e) => records.push(Record::failed(
            format!("flow.{name}"),
            anchors::HCF,
            Comparison::Below,
            tol,
            e,
        )),
    }
    if cfg.persistence {
        let ptol = cfg.tol("persistence");
        records.extend(guarded(
            &format!("persistence.{name}"),
            anchors::PERSISTENCE,
            ptol,
            || suite::persistence(&name, &fm, t_end, steps, ptol),
        ));
    }
    Ok(Report::new("flow", cfg, records, artifacts))
}

pub fn submersion(cfg: &RunConfig) -> Result<Report, ConfigError> {
    let spec = cfg
        .algebra
        .as_deref()
        .or(cfg.model.as_deref())
        .ok_or_else(|| ConfigError::Invalid("--algebra is required".into()))?;
    let (alg, stored) = load_algebra(spec)?;
    let sub = load_subalgebra(&alg, cfg.subalgebra.as_deref(), stored)?;
    let h = parse_matrix(cfg.metric.as_deref().unwrap_or("identity"), alg.dim)?;
    FrameMetric::new(alg.clone(), h.clone())?;
    let tol = cfg.tol("normalizer");
    let (records, artifacts) = match suite::submersion(&alg, &sub, &h, cfg.seed, tol) {
        Ok(x) => x,
        Err(e @ chernlab::Error::DegenerateQuotient) => return Err(e.into()),
        Err(e) => (
            vec![Record::failed(
                "submersion",
                anchors::NORMALIZER,
                Comparison::Below,
                tol,
                e,
            )],
            Value::Null,
        ),
    };
    Ok(Report::new("submersion", cfg, records, artifacts))
}

pub fn verify_all(cfg: &RunConfig) -> Result<Report, ConfigError> {
    Ok(Report::new("verify all", cfg, suite::verify_all(cfg), Value::Null))
}
