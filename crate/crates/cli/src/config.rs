//! Run configuration: flags, optional JSON config file, tolerances.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chernlab::linalg::{c, CMatrix};
use chernlab::models::{LieAlgebraData, SubalgebraData};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

pub const DEFAULT_SEED: u64 = 7;
pub const SEED_ENV: &str = "CHERNLAB_SEED";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read `{path}`: {message}")]
    Io { path: PathBuf, message: String },
    #[error(transparent)]
    Engine(#[from] chernlab::Error),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Flags shared by every command. All optional so that a config file can fill them.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunArgs {
    /// Model spec, e.g. `hopf_standard` or `flat(n=3)`; for `flow`, an algebra name.
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// Seed for every random draw (default: $CHERNLAB_SEED, then 7).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of sample points.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Number of random loops.
    #[arg(long, global = true)]
    pub loops: Option<usize>,
    /// Final flow time.
    #[arg(long, global = true)]
    pub t: Option<f64>,
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Initial frame metric: `identity`, `scale:s`, `diag:a,b,...` or a JSON file.
    #[arg(long, global = true)]
    pub g0: Option<String>,
    /// Built-in algebra name or JSON file.
    #[arg(long, global = true)]
    pub algebra: Option<String>,
    /// Named subalgebra (`borel`, `center`, `zero`, `span:0,2`, ...).
    #[arg(long, global = true)]
    pub subalgebra: Option<String>,
    /// Metric on the Lie algebra for `submersion`, same syntax as `--g0`.
    #[arg(long, global = true)]
    pub metric: Option<String>,
    /// Overrides, `name=value[,name=value]`.
    #[arg(long, global = true)]
    #[serde(deserialize_with = "tolerances_from_json")]
    pub tolerances: Option<String>,
    /// Report destination (default: stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Also run the persistence check (`flow`).
    #[arg(long, global = true)]
    #[serde(default)]
    pub persistence: bool,
    /// Write the flow trajectory here (`.csv` or `.json`).
    #[arg(long, global = true)]
    pub trajectory: Option<PathBuf>,
    /// JSON file with the same keys as the flags; flags take precedence.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

fn tolerances_from_json<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    let v = Option::<Value>::deserialize(d)?;
    Ok(match v {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s),
        Some(Value::Object(m)) => Some(
            m.iter()
                .map(|(k, v)| {
                    format!(
                        "{k}={}",
                        v.as_f64().map(|x| x.to_string()).unwrap_or_else(|| v.to_string())
                    )
                })
                .collect::<Vec<_>>()
                .join(","),
        ),
        Some(other) => return Err(serde::de::Error::custom(format!("bad tolerances value {other}"))),
    })
}

impl RunArgs {
    /// `self` with unset fields taken from `file`.
    fn or(self, file: RunArgs) -> RunArgs {
        RunArgs {
            model: self.model.or(file.model),
            seed: self.seed.or(file.seed),
            samples: self.samples.or(file.samples),
            loops: self.loops.or(file.loops),
            t: self.t.or(file.t),
            steps: self.steps.or(file.steps),
            g0: self.g0.or(file.g0),
            algebra: self.algebra.or(file.algebra),
            subalgebra: self.subalgebra.or(file.subalgebra),
            metric: self.metric.or(file.metric),
            tolerances: merge_tolerance_strings(file.tolerances, self.tolerances),
            out: self.out.or(file.out),
            format: self.format.or(file.format),
            persistence: self.persistence || file.persistence,
            trajectory: self.trajectory.or(file.trajectory),
            config: self.config,
        }
    }

    /// Merges the config file (if any) and the environment into a resolved configuration.
    pub fn resolve(self) -> Result<RunConfig, ConfigError> {
        let merged = match &self.config {
            Some(path) => {
                let text = read(path)?;
                let file: RunArgs = serde_json::from_str(&text)
                    .map_err(|e| invalid(format!("config file `{}`: {e}", path.display())))?;
                self.or(file)
            }
            None => self,
        };
        let seed = match merged.seed {
            Some(s) => s,
            None => match std::env::var(SEED_ENV) {
                Ok(v) => v
                    .trim()
                    .parse()
                    .map_err(|_| invalid(format!("{SEED_ENV} must be an unsigned integer, got `{v}`")))?,
                Err(_) => DEFAULT_SEED,
            },
        };
        let mut tolerances = Tolerances::default();
        if let Some(spec) = &merged.tolerances {
            tolerances.apply(spec)?;
        }
        if merged.samples == Some(0) {
            return Err(invalid("--samples must be positive"));
        }
        if merged.loops == Some(0) {
            return Err(invalid("--loops must be positive"));
        }
        if merged.steps == Some(0) {
            return Err(invalid("--steps must be positive"));
        }
        if let Some(t) = merged.t {
            if !(t > 0.0 && t.is_finite()) {
                return Err(invalid("--t must be positive"));
            }
        }
        Ok(RunConfig {
            model: merged.model,
            seed,
            samples: merged.samples,
            loops: merged.loops,
            t: merged.t,
            steps: merged.steps,
            g0: merged.g0,
            algebra: merged.algebra,
            subalgebra: merged.subalgebra,
            metric: merged.metric,
            tolerances,
            out: merged.out,
            format: merged.format.unwrap_or_default(),
            persistence: merged.persistence,
            trajectory: merged.trajectory,
        })
    }
}

fn merge_tolerance_strings(file: Option<String>, flags: Option<String>) -> Option<String> {
    match (file, flags) {
        (Some(a), Some(b)) => Some(format!("{a},{b}")),
        (a, b) => b.or(a),
    }
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Fully resolved configuration, echoed into every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub model: Option<String>,
    pub seed: u64,
    pub samples: Option<usize>,
    pub loops: Option<usize>,
    pub t: Option<f64>,
    pub steps: Option<usize>,
    pub g0: Option<String>,
    pub algebra: Option<String>,
    pub subalgebra: Option<String>,
    pub metric: Option<String>,
    pub tolerances: Tolerances,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub format: Format,
    pub persistence: bool,
    #[serde(skip)]
    pub trajectory: Option<PathBuf>,
}

impl RunConfig {
    pub fn with_seed(seed: u64) -> RunConfig {
        RunConfig {
            model: None,
            seed,
            samples: None,
            loops: None,
            t: None,
            steps: None,
            g0: None,
            algebra: None,
            subalgebra: None,
            metric: None,
            tolerances: Tolerances::default(),
            out: None,
            format: Format::Json,
            persistence: false,
            trajectory: None,
        }
    }

    pub fn tol(&self, name: &str) -> f64 {
        self.tolerances.get(name)
    }
}

/// Named thresholds of all checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Tolerances(BTreeMap<String, f64>);

impl Default for Tolerances {
    fn default() -> Self {
        let entries = [
            ("bianchi", 1e-6),
            ("proposition33", 1e-5),
            ("proposition33_anti", 1e-6),
            ("killing_small", 1e-6),
            ("killing_large", 1e-3),
            ("closedness", 1e-6),
            ("griffiths", 1e-9),
            ("griffiths_negative", 1e-2),
            ("holonomy_angle", 1e-6),
            ("rho_null_angle", 1e-6),
            ("closed_form", 1e-5),
            ("flow", 1e-6),
            ("flow_order", 8.0),
            ("variation", 1e-4),
            ("variation_order", 0.3),
            ("persistence", 1e-8),
            ("normalizer", 1e-8),
            ("bracket", 1e-6),
        ];
        Tolerances(entries.iter().map(|(k, v)| (k.to_string(), *v)).collect())
    }
}

impl Tolerances {
    pub fn get(&self, name: &str) -> f64 {
        *self
            .0
            .get(name)
            .unwrap_or_else(|| panic!("no tolerance named `{name}`"))
    }

    /// Applies `name=value[,name=value]`.
    pub fn apply(&mut self, spec: &str) -> Result<(), ConfigError> {
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| invalid(format!("tolerance `{item}` is not name=value")))?;
            let k = k.trim();
            if !self.0.contains_key(k) {
                let known: Vec<&str> = self.0.keys().map(String::as_str).collect();
                return Err(invalid(format!(
                    "unknown tolerance `{k}` (known: {})",
                    known.join(", ")
                )));
            }
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| invalid(format!("tolerance `{k}` must be a number")))?;
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("tolerance `{k}` must be positive")));
            }
            self.0.insert(k.to_string(), v);
        }
        Ok(())
    }
}

/// `identity`, `scale:s`, `diag:a,b,...`, or a JSON file holding rows of `[re, im]` pairs.
pub fn parse_matrix(spec: &str, n: usize) -> Result<CMatrix, ConfigError> {
    let spec = spec.trim();
    if spec == "identity" {
        return Ok(CMatrix::identity(n, n));
    }
    if let Some(s) = spec.strip_prefix("scale:") {
        let s: f64 = s
            .trim()
            .parse()
            .map_err(|_| invalid(format!("bad scale in `{spec}`")))?;
        return Ok(CMatrix::identity(n, n) * c(s, 0.0));
    }
    if let Some(list) = spec.strip_prefix("diag:") {
        let values: Vec<f64> = list
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| invalid(format!("bad diagonal in `{spec}`")))?;
        if values.len() != n {
            return Err(invalid(format!("`{spec}` has {} entries, expected {n}", values.len())));
        }
        return Ok(CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            values.into_iter().map(|x| c(x, 0.0)),
        )));
    }
    let text = read(Path::new(spec))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| invalid(format!("`{spec}`: {e}")))?;
    let rows = value
        .as_array()
        .filter(|r| r.len() == n)
        .ok_or_else(|| invalid(format!("`{spec}` must hold {n} rows")))?;
    let mut m = CMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .filter(|r| r.len() == n)
            .ok_or_else(|| invalid(format!("`{spec}` row {i} must hold {n} entries")))?;
        for (j, z) in row.iter().enumerate() {
            let pair = z
                .as_array()
                .filter(|p| p.len() == 2)
                .and_then(|p| Some((p[0].as_f64()?, p[1].as_f64()?)));
            let (re, im) = pair.ok_or_else(|| invalid(format!("`{spec}` entry ({i},{j}) must be [re, im]")))?;
            m[(i, j)] = c(re, im);
        }
    }
    Ok(m)
}

/// Built-in algebra by name, or an algebra JSON file (which may carry a subalgebra).
pub fn load_algebra(spec: &str) -> Result<(LieAlgebraData, Option<Vec<Vec<chernlab::C64>>>), ConfigError> {
    if let Ok(alg) = LieAlgebraData::builtin(spec) {
        return Ok((alg, None));
    }
    let path = Path::new(spec);
    if !path.exists() {
        let known = LieAlgebraData::builtin_names().join(", ");
        return Err(invalid(format!(
            "unknown algebra `{spec}` (built-in: {known}, or a JSON file)"
        )));
    }
    let value: Value = serde_json::from_str(&read(path)?).map_err(|e| invalid(format!("`{spec}`: {e}")))?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("algebra");
    Ok(LieAlgebraData::from_json(name, &value)?)
}

/// Subalgebra by name, falling back to the one stored with the algebra.
pub fn load_subalgebra(
    alg: &LieAlgebraData,
    name: Option<&str>,
    stored: Option<Vec<Vec<chernlab::C64>>>,
) -> Result<SubalgebraData, ConfigError> {
    match (name, stored) {
        (Some(n), _) => Ok(SubalgebraData::named(alg, n)?),
        (None, Some(basis)) => Ok(SubalgebraData::new("file", alg, basis)?),
        (None, None) => Err(invalid("--subalgebra is required")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_overrides() {
        let mut t = Tolerances::default();
        t.apply("bianchi=1e-12, flow=2e-6").unwrap();
        assert_eq!(t.get("bianchi"), 1e-12);
        assert_eq!(t.get("flow"), 2e-6);
        assert!(t.apply("nonsense=1").is_err());
        assert!(t.apply("flow=-1").is_err());
        assert!(t.apply("flow").is_err());
    }

    #[test]
    fn matrix_specs() {
        assert_eq!(parse_matrix("identity", 2).unwrap(), CMatrix::identity(2, 2));
        assert_eq!(parse_matrix("scale:10", 3).unwrap()[(2, 2)], c(10.0, 0.0));
        assert_eq!(parse_matrix("diag:1,2", 2).unwrap()[(1, 1)], c(2.0, 0.0));
        assert!(parse_matrix("diag:1", 2).is_err());
        assert!(parse_matrix("/nonexistent.json", 2).is_err());
    }

    #[test]
    fn flags_override_file() {
        let flags = RunArgs {
            seed: Some(3),
            tolerances: Some("flow=1e-3".into()),
            ..RunArgs::default()
        };
        let file = RunArgs {
            seed: Some(9),
            samples: Some(12),
            tolerances: Some("flow=1e-2,bianchi=1e-5".into()),
            ..RunArgs::default()
        };
        let merged = flags.or(file);
        assert_eq!(merged.seed, Some(3));
        assert_eq!(merged.samples, Some(12));
        let mut t = Tolerances::default();
        t.apply(merged.tolerances.as_deref().unwrap()).unwrap();
        assert_eq!(t.get("flow"), 1e-3);
        assert_eq!(t.get("bianchi"), 1e-5);
    }
}
