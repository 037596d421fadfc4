//! TOML run configuration.
//!
//! ```toml
//! task = "regression"        # or "classification"
//! estimator = "esn"          # or "elm"
//! scale = false              # min-max scale inputs (and real targets)
//!
//! [params]                   # estimator hyperparameters
//! hidden_layer_size = 500
//! spectral_radius = 1.0
//!
//! [data]
//! train = "train.csv"
//! test = "test.csv"          # optional, scored after training
//! format = "table"           # or "digits"
//! target_columns = 1         # trailing columns holding targets
//!
//! [output]
//! model = "model.rcn"
//! report = "report.txt"
//!
//! [[search.steps]]
//! name = "leakage"
//! strategy = "grid"          # or "random" with n_iter
//! metric = "mse"
//! cv = { kind = "time_series", n_splits = 5 }
//! space = { leakage = [0.1, 0.5, 1.0] }
//! ```
//!
//! `--set key.path=value` overrides are applied on top of the file before
//! validation, so they win over file values. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rcnkit::estimators::{ElmEstimator, ElmParams, EsnEstimator, EsnParams, ParamValue, Params, ReservoirModel, TaskKind};
use rcnkit::metrics::Metric;
use rcnkit::model_selection::{Distribution, ParamRange, ParamSpace, Scorer, SearchStep, Splitter, Strategy};
use serde::Deserialize;

use crate::error::usage;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub task: TaskName,
    #[serde(default)]
    pub estimator: EstimatorName,
    #[serde(default)]
    pub scale: bool,
    #[serde(default)]
    pub params: BTreeMap<String, toml::Value>,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub search: SearchConfig,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum TaskName {
    #[default]
    Regression,
    Classification,
}

impl From<TaskName> for TaskKind {
    fn from(t: TaskName) -> Self {
        match t {
            TaskName::Regression => TaskKind::Regression,
            TaskName::Classification => TaskKind::Classification,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorName {
    #[default]
    Esn,
    Elm,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum DataFormat {
    /// Numeric CSV, one instance or time step per row.
    #[default]
    Table,
    /// 64 pixel columns plus a label column; each image is one sequence.
    Digits,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub train: Option<PathBuf>,
    pub test: Option<PathBuf>,
    #[serde(default)]
    pub format: DataFormat,
    #[serde(default = "one")]
    pub target_columns: usize,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            train: None,
            test: None,
            format: DataFormat::Table,
            target_columns: 1,
        }
    }
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub model: Option<PathBuf>,
    pub predictions: Option<PathBuf>,
    pub report: Option<PathBuf>,
    /// Best parameters found by `search`, written as TOML.
    pub params: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    #[serde(default)]
    pub steps: Vec<StepConfig>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepConfig {
    pub name: Option<String>,
    pub strategy: StrategyName,
    pub n_iter: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    pub metric: Option<String>,
    #[serde(default)]
    pub cv: CvConfig,
    pub space: BTreeMap<String, SpaceEntry>,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum StrategyName {
    Grid,
    Random,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CvConfig {
    #[serde(default)]
    pub kind: CvKind,
    #[serde(default = "five")]
    pub n_splits: usize,
    #[serde(default)]
    pub shuffle: bool,
    #[serde(default)]
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            kind: CvKind::TimeSeries,
            n_splits: 5,
            shuffle: false,
            seed: 0,
        }
    }
}

fn five() -> usize {
    5
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum CvKind {
    Kfold,
    #[default]
    TimeSeries,
}

/// Either an explicit list or one distribution table.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum SpaceEntry {
    Values(Vec<toml::Value>),
    Dist(DistConfig),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum DistConfig {
    /// `[loc, scale]`
    Uniform([f64; 2]),
    /// `[lo, hi]`
    LogUniform([f64; 2]),
    Choice(Vec<toml::Value>),
}

impl RunConfig {
    /// Reads `path` (when given), applies `overrides` and validates.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                text.parse::<toml::Table>().with_context(|| format!("parsing config {}", p.display()))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: RunConfig = toml::Value::Table(table).try_into().context("invalid configuration")?;
        cfg.estimator_params()?;
        Ok(cfg)
    }

    pub fn task_kind(&self) -> TaskKind {
        self.task.into()
    }

    pub fn estimator_params(&self) -> Result<Params> {
        let params = self
            .params
            .iter()
            .map(|(k, v)| Ok((k.clone(), param_value(k, v)?)))
            .collect::<Result<Params>>()?;
        // Validate names and values now rather than at fit time.
        match self.estimator {
            EstimatorName::Esn => EsnParams::from_params(&params).map(drop),
            EstimatorName::Elm => ElmParams::from_params(&params).map(drop),
        }?;
        Ok(params)
    }

    /// Unfitted model for the configured estimator.
    pub fn build_model(&self, params: &Params) -> rcnkit::Result<ReservoirModel> {
        let task = self.task_kind();
        Ok(match self.estimator {
            EstimatorName::Esn => EsnEstimator::from_params(task, params)?.into_model(),
            EstimatorName::Elm => ElmEstimator::from_params(task, params)?.into_model(),
        })
    }

    pub fn search_steps(&self) -> Result<Vec<SearchStep>> {
        let default_metric = match self.task {
            TaskName::Regression => Metric::Mse,
            TaskName::Classification => Metric::Accuracy,
        };
        self.search
            .steps
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let strategy = match (s.strategy, s.n_iter) {
                    (StrategyName::Grid, None) => Strategy::Grid,
                    (StrategyName::Grid, Some(_)) => return Err(usage(format!("search step {}: n_iter only applies to random search", i + 1))),
                    (StrategyName::Random, Some(n)) => Strategy::Random { n_iter: n },
                    (StrategyName::Random, None) => return Err(usage(format!("search step {}: random search needs n_iter", i + 1))),
                };
                let metric = match &s.metric {
                    Some(m) => m.parse::<Metric>()?,
                    None => default_metric,
                };
                let splitter = match s.cv.kind {
                    CvKind::Kfold => Splitter::KFold {
                        k: s.cv.n_splits,
                        shuffle: s.cv.shuffle,
                        seed: s.cv.seed,
                    },
                    CvKind::TimeSeries => Splitter::TimeSeries { n_splits: s.cv.n_splits },
                };
                let mut space = ParamSpace::new();
                for (name, entry) in &s.space {
                    let range = match entry {
                        SpaceEntry::Values(v) => ParamRange::Values(values(name, v)?),
                        SpaceEntry::Dist(DistConfig::Uniform([loc, scale])) => {
                            ParamRange::Dist(Distribution::Uniform { loc: *loc, scale: *scale })
                        }
                        SpaceEntry::Dist(DistConfig::LogUniform([lo, hi])) => {
                            ParamRange::Dist(Distribution::LogUniform { lo: *lo, hi: *hi })
                        }
                        SpaceEntry::Dist(DistConfig::Choice(v)) => ParamRange::Dist(Distribution::Choice(values(name, v)?)),
                    };
                    space.insert(name.clone(), range);
                }
                Ok(SearchStep {
                    name: s.name.clone().unwrap_or_else(|| format!("step{}", i + 1)),
                    strategy,
                    space,
                    splitter,
                    scorer: Scorer::new(metric),
                    seed: s.seed,
                })
            })
            .collect()
    }
}

fn values(name: &str, v: &[toml::Value]) -> Result<Vec<ParamValue>> {
    v.iter().map(|x| param_value(name, x)).collect()
}

/// Converts a TOML scalar to a parameter value.
pub fn param_value(name: &str, v: &toml::Value) -> Result<ParamValue> {
    Ok(match v {
        toml::Value::Integer(i) => ParamValue::Int(*i),
        toml::Value::Float(f) => ParamValue::Float(*f),
        toml::Value::Boolean(b) => ParamValue::Bool(*b),
        toml::Value::String(s) => ParamValue::Text(s.clone()),
        _ => return Err(usage(format!("parameter `{name}` must be a number, boolean or string"))),
    })
}

/// TOML scalar for a parameter value.
pub fn toml_value(v: &ParamValue) -> toml::Value {
    match v {
        ParamValue::Int(i) => toml::Value::Integer(*i),
        ParamValue::Float(f) => toml::Value::Float(*f),
        ParamValue::Bool(b) => toml::Value::Boolean(*b),
        ParamValue::Text(s) => toml::Value::String(s.clone()),
    }
}

/// `a.b.c=value`; the value is read as a TOML scalar or array, falling back
/// to a bare string.
fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| usage(format!("override `{assignment}` is not of the form key=value")))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(usage(format!("override `{assignment}` has an empty key segment")));
    }
    let value = format!("v = {}", raw.trim())
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let (last, parents) = path.split_last().expect("non-empty path");
    let mut node = table;
    for p in parents {
        let entry = node.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| usage(format!("override `{assignment}`: `{p}` is not a section")))?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}

/// Parameters as a `[params]` TOML document.
pub fn params_toml(params: &Params) -> String {
    let inner: toml::Table = params.iter().map(|(k, v)| (k.clone(), toml_value(v))).collect();
    let mut doc = toml::Table::new();
    doc.insert("params".into(), toml::Value::Table(inner));
    toml::to_string(&doc).expect("scalar tables serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_win_and_unknown_keys_fail() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "task = \"classification\"\n[params]\nalpha = 0.1\n").unwrap();
        let c = RunConfig::load(Some(&p), &["params.alpha=0.5".into(), "data.train=x.csv".into()]).unwrap();
        assert_eq!(c.params["alpha"].as_float(), Some(0.5));
        assert_eq!(c.data.train.as_deref(), Some(Path::new("x.csv")));
        assert_eq!(c.task, TaskName::Classification);
        assert!(RunConfig::load(Some(&p), &["bogus=1".into()]).is_err());
        assert!(RunConfig::load(Some(&p), &["params.nope=1".into()]).is_err());
        assert!(RunConfig::load(Some(&p), &["params.alpha=-1".into()]).is_err());
    }

    #[test]
    fn search_steps_from_toml() {
        let text = r#"
            [[search.steps]]
            strategy = "random"
            n_iter = 4
            space = { input_scaling = { uniform = [0.1, 1.0] }, alpha = { log_uniform = [1e-6, 1e-2] } }
            [[search.steps]]
            strategy = "grid"
            cv = { kind = "kfold", n_splits = 3 }
            space = { leakage = [0.5, 1.0] }
        "#;
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.toml");
        std::fs::write(&p, text).unwrap();
        let steps = RunConfig::load(Some(&p), &[]).unwrap().search_steps().unwrap();
        assert_eq!(steps.len(), 2);
        assert_eq!(steps[0].strategy, Strategy::Random { n_iter: 4 });
        assert_eq!(steps[1].splitter, Splitter::KFold { k: 3, shuffle: false, seed: 0 });
        assert_eq!(steps[1].name, "step2");
    }

    #[test]
    fn params_round_trip_through_toml() {
        let p = EsnParams::default().to_params();
        let doc = params_toml(&p);
        let t: toml::Table = doc.parse().unwrap();
        let back: Params = t["params"]
            .as_table()
            .unwrap()
            .iter()
            .map(|(k, v)| (k.clone(), param_value(k, v).unwrap()))
            .collect();
        assert_eq!(back, p);
    }
}
