//! Config-driven runs: datasets per noise level, every requested method
//! trained or applied, metric tables written. Each (method, noise level)
//! cell is written as soon as it finishes and skipped on rerun.

use std::path::{Path, PathBuf};

use nnas_core::metrics::MetricReport;
use nnas_core::noise::BASELINE_T1_US;
use nnas_surrogate::{train_new, SurrogateModel, TrainingConfig, DEFAULT_HIDDEN_DIM};
use serde::{Deserialize, Serialize};

use crate::dataset::{generate_dataset, Dataset, DatasetConfig, Split, DEFAULT_SHOTS};
use crate::error::{HarnessError, Result};
use crate::evaluate::{baseline_predictions, evaluate, model_predictions, save_reports, Method, Predictions};
use crate::features::{schema_for, training_examples};
use crate::record::Task;
use crate::regime::Scale;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    #[serde(default = "default_qubits")]
    pub qubits: usize,
    #[serde(default)]
    pub scale: Scale,
    #[serde(default = "default_t1")]
    pub t1_us: Vec<f64>,
    pub models: Vec<Method>,
    pub train_size: usize,
    pub test_size: usize,
    #[serde(default = "default_p_r")]
    pub p_r: f64,
    pub seed: u64,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default)]
    pub p_perturbation: f64,
    #[serde(default = "default_hidden")]
    pub hidden_dim: usize,
    #[serde(default)]
    pub training: TrainingConfig,
}

fn default_qubits() -> usize {
    4
}
fn default_t1() -> Vec<f64> {
    vec![BASELINE_T1_US]
}
fn default_p_r() -> f64 {
    0.25
}
fn default_shots() -> u64 {
    DEFAULT_SHOTS
}
fn default_hidden() -> usize {
    DEFAULT_HIDDEN_DIM
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| HarnessError::Config(format!("experiment config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.models.is_empty() {
            return Err(HarnessError::Config("no models requested".into()));
        }
        if self.t1_us.is_empty() {
            return Err(HarnessError::Config("no noise levels".into()));
        }
        if self.test_size == 0 {
            return Err(HarnessError::Config("test_size must be positive".into()));
        }
        if self.models.iter().any(|m| m.learned().is_some()) && self.train_size == 0 {
            return Err(HarnessError::Config("learned models need train_size > 0".into()));
        }
        if self.hidden_dim == 0 {
            return Err(HarnessError::Config("hidden_dim must be positive".into()));
        }
        self.training.validate()?;
        for &t1 in &self.t1_us {
            self.dataset_config(t1, Split::Train).validate()?;
        }
        Ok(())
    }

    pub fn dataset_config(&self, t1: f64, split: Split) -> DatasetConfig {
        DatasetConfig {
            task: self.task,
            qubits: self.qubits,
            size: match split {
                Split::Train => self.train_size,
                Split::Test => self.test_size,
            },
            p_r: self.p_r,
            t1_us: Some(t1),
            scale: self.scale,
            split,
            seed: self.seed,
            shots: self.shots,
            p_perturbation: self.p_perturbation,
        }
    }

    pub fn training_config(&self) -> TrainingConfig {
        TrainingConfig { seed: self.seed, ..self.training.clone() }
    }
}

/// Loads `path` if it was generated from `config`, otherwise generates
/// and writes it.
pub fn load_or_generate(path: &Path, config: &DatasetConfig) -> Result<Dataset> {
    if path.exists() {
        let ds = Dataset::load(path)?;
        if ds.header.config_hash == config.hash() {
            return Ok(ds);
        }
        log::info!("{}: config changed, regenerating", path.display());
    }
    let ds = generate_dataset(config)?;
    ds.save(path)?;
    Ok(ds)
}

/// Trains a surrogate of the given method on a training set.
pub fn train_model(method: Method, train: &Dataset, hidden_dim: usize, training: &TrainingConfig) -> Result<(SurrogateModel, Vec<f64>)> {
    let kind = method.learned().ok_or_else(|| HarnessError::Config(format!("{method} is not trainable")))?;
    let max_layers = train.config().plan()?.max_length();
    let examples = training_examples(train)?;
    Ok(train_new(kind, schema_for(train.config().task, max_layers), hidden_dim, &examples, training)?)
}

#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub reports: Vec<MetricReport>,
    pub out_dir: PathBuf,
}

fn cell_dir(out: &Path, t1: f64) -> PathBuf {
    out.join(format!("t1_{t1}"))
}

fn mkdir(p: &Path) -> Result<()> {
    std::fs::create_dir_all(p).map_err(|e| HarnessError::io(p, e))
}

pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentOutcome> {
    config.validate()?;
    mkdir(out_dir)?;
    std::fs::write(out_dir.join("config.json"), serde_json::to_string_pretty(config)?)
        .map_err(|e| HarnessError::io(out_dir, e))?;
    let mut reports = Vec::new();
    for &t1 in &config.t1_us {
        let dir = cell_dir(out_dir, t1);
        mkdir(&dir)?;
        let test = load_or_generate(&dir.join("test.jsonl"), &config.dataset_config(t1, Split::Test))?;
        let needs_train = config.models.iter().any(|m| m.learned().is_some());
        let train = if needs_train {
            Some(load_or_generate(&dir.join("train.jsonl"), &config.dataset_config(t1, Split::Train))?)
        } else {
            None
        };
        for &method in &config.models {
            let cell = dir.join(format!("{method}.report.json"));
            if cell.exists() {
                let s = std::fs::read_to_string(&cell).map_err(|e| HarnessError::io(&cell, e))?;
                reports.extend(serde_json::from_str::<Vec<MetricReport>>(&s)?);
                log::info!("{}: reusing finished cell", cell.display());
                continue;
            }
            let pred: Predictions = match method.learned() {
                None => baseline_predictions(method, &test)?,
                Some(_) => {
                    let train = train.as_ref().expect("training set generated for learned models");
                    let (model, curve) = train_model(method, train, config.hidden_dim, &config.training_config())?;
                    model.save(dir.join(format!("{method}.checkpoint.json")))?;
                    std::fs::write(dir.join(format!("{method}.loss.json")), serde_json::to_string(&curve)?)
                        .map_err(|e| HarnessError::io(&dir, e))?;
                    model_predictions(&model, &test)?
                }
            };
            if pred.flagged > 0 {
                log::warn!("{method} at T1 = {t1}: {} sequences flagged", pred.flagged);
            }
            let cell_reports = evaluate(&pred, &test)?;
            std::fs::write(&cell, serde_json::to_string_pretty(&cell_reports)?).map_err(|e| HarnessError::io(&cell, e))?;
            reports.extend(cell_reports);
        }
    }
    save_reports(&reports, &out_dir.join("metrics.csv"), &out_dir.join("metrics.json"))?;
    let ledgers: std::collections::BTreeMap<String, _> =
        reports.iter().map(|r| (r.model.clone(), (r.overhead, r.overhead_total))).collect();
    std::fs::write(out_dir.join("ledgers.json"), serde_json::to_string_pretty(&ledgers)?)
        .map_err(|e| HarnessError::io(out_dir, e))?;
    Ok(ExperimentOutcome { reports, out_dir: out_dir.to_path_buf() })
}
