//! `nnas` subcommands. Every command that draws randomness takes its seed
//! on the command line.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use nnas_surrogate::{SurrogateModel, TrainingConfig};

use crate::analysis::{analyze_structure, write_structure};
use crate::dataset::{generate_dataset, Dataset, DatasetConfig, Split, DEFAULT_SHOTS};
use crate::error::{HarnessError, Result};
use crate::evaluate::{baseline_predictions, evaluate, model_predictions, write_predictions_csv, write_reports_csv, Method, Predictions};
use crate::experiment::{run_experiment, train_model, ExperimentConfig};
use crate::record::Task;
use crate::regime::Scale;

#[derive(Debug, Parser)]
#[command(name = "nnas", version, about = "Neural noise accumulation surrogates for quantum error mitigation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a JSON-lines dataset.
    Generate(GenerateArgs),
    /// Train a surrogate on a dataset and write its checkpoint.
    Train(TrainArgs),
    /// Mitigate every sequence of a dataset and write per-layer values as CSV.
    Mitigate(MitigateArgs),
    /// Metric table for one method, or a whole experiment from a config.
    Evaluate(EvaluateArgs),
    /// Structural comparison of a trained NNAS against the cumulative noise.
    Analyze(AnalyzeArgs),
    /// Default sampling cost of each method.
    Ledger(LedgerArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Dataset config JSON; the flags below are ignored when given.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "trotter")]
    pub task: Task,
    #[arg(long, default_value_t = 4)]
    pub qubits: usize,
    #[arg(long, default_value_t = 100)]
    pub size: usize,
    #[arg(long, default_value_t = 0.25)]
    pub p_r: f64,
    /// T1 in microseconds.
    #[arg(long, default_value_t = nnas_core::noise::BASELINE_T1_US, conflicts_with = "noiseless")]
    pub t1_us: f64,
    #[arg(long)]
    pub noiseless: bool,
    #[arg(long, default_value = "desk")]
    pub scale: Scale,
    #[arg(long, default_value = "train")]
    pub split: Split,
    #[arg(long, default_value_t = DEFAULT_SHOTS)]
    pub shots: u64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub p_perturbation: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// nnas, nea or nna.
    #[arg(long, default_value = "nnas")]
    pub model: Method,
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, default_value_t = nnas_surrogate::DEFAULT_HIDDEN_DIM)]
    pub hidden_dim: usize,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub seed: u64,
    /// Checkpoint path.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-epoch training loss as JSON.
    #[arg(long)]
    pub loss_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MitigateArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Baseline to apply; ignored with --checkpoint.
    #[arg(long, default_value = "noisy")]
    pub method: Method,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Experiment config JSON; runs every (model, T1) cell into --out.
    #[arg(long, conflicts_with_all = ["dataset", "checkpoint"])]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long, default_value = "noisy")]
    pub method: Method,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Output directory with --config, metrics CSV otherwise (stdout if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub dataset: PathBuf,
    /// Only the first `limit` sequences.
    #[arg(long)]
    pub limit: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct LedgerArgs {
    /// All methods when omitted.
    #[arg(long)]
    pub method: Vec<Method>,
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::fs::File::create(p).map_err(|e| HarnessError::io(p, e))?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn predictions(dataset: &Dataset, method: Method, checkpoint: Option<&PathBuf>) -> Result<Predictions> {
    match checkpoint {
        Some(path) => model_predictions(&SurrogateModel::load(path)?, dataset),
        None if method.learned().is_some() => {
            Err(HarnessError::Config(format!("{method} needs --checkpoint")))
        }
        None => baseline_predictions(method, dataset),
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => {
            let config = match &a.config {
                Some(path) => {
                    let s = std::fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
                    let mut c: DatasetConfig =
                        serde_json::from_str(&s).map_err(|e| HarnessError::Config(format!("dataset config: {e}")))?;
                    c.seed = a.seed;
                    c
                }
                None => DatasetConfig {
                    task: a.task,
                    qubits: a.qubits,
                    size: a.size,
                    p_r: a.p_r,
                    t1_us: (!a.noiseless).then_some(a.t1_us),
                    scale: a.scale,
                    split: a.split,
                    seed: a.seed,
                    shots: a.shots,
                    p_perturbation: a.p_perturbation,
                },
            };
            let ds = generate_dataset(&config)?;
            ds.save(&a.out)?;
            log::info!("{}: {} sequences, {} points", a.out.display(), ds.records.len(), ds.total_points());
        }
        Command::Train(a) => {
            let ds = Dataset::load(&a.dataset)?;
            let mut training = TrainingConfig { seed: a.seed, ..TrainingConfig::default() };
            if let Some(e) = a.epochs {
                training.epochs = e;
            }
            if let Some(lr) = a.learning_rate {
                training.learning_rate = lr;
            }
            if let Some(b) = a.batch_size {
                training.batch_size = b;
            }
            training.validate()?;
            let (model, curve) = train_model(a.model, &ds, a.hidden_dim, &training)?;
            model.save(&a.out)?;
            if let Some(p) = &a.loss_out {
                std::fs::write(p, serde_json::to_string(&curve)?).map_err(|e| HarnessError::io(p, e))?;
            }
            log::info!("final loss {:.3e}", curve.last().copied().unwrap_or(f64::NAN));
        }
        Command::Mitigate(a) => {
            let ds = Dataset::load(&a.dataset)?;
            let pred = predictions(&ds, a.method, a.checkpoint.as_ref())?;
            write_predictions_csv(&pred, &ds, output(a.out.as_ref())?)?;
        }
        Command::Evaluate(a) => match (&a.config, &a.dataset) {
            (Some(config), _) => {
                let config = ExperimentConfig::load(config)?;
                let out = a.out.clone().unwrap_or_else(|| PathBuf::from("results"));
                let outcome = run_experiment(&config, &out)?;
                write_reports_csv(&outcome.reports, std::io::stdout().lock())?;
            }
            (None, Some(dataset)) => {
                let ds = Dataset::load(dataset)?;
                let pred = predictions(&ds, a.method, a.checkpoint.as_ref())?;
                write_reports_csv(&evaluate(&pred, &ds)?, output(a.out.as_ref())?)?;
            }
            (None, None) => return Err(HarnessError::Config("evaluate needs --config or --dataset".into())),
        },
        Command::Analyze(a) => {
            let model = SurrogateModel::load(&a.checkpoint)?;
            let ds = Dataset::load(&a.dataset)?;
            let analysis = analyze_structure(&model, &ds, a.limit)?;
            write_structure(&analysis, &a.out)?;
            let (p, s) = analysis.mean_correlations();
            log::info!("mean entropy correlation: pearson {p:?}, spearman {s:?}");
        }
        Command::Ledger(a) => {
            let methods = if a.method.is_empty() { Method::ALL.to_vec() } else { a.method };
            let mut w = csv::Writer::from_writer(std::io::stdout().lock());
            w.write_record(["method", "circuit_instances", "shots_per_instance", "total_shots", "total"])?;
            for m in methods {
                let l = m.default_ledger();
                w.write_record(&[
                    m.to_string(),
                    l.circuit_instances.to_string(),
                    l.shots_per_instance.to_string(),
                    l.total_shots.to_string(),
                    l.total().to_string(),
                ])?;
            }
            w.flush().map_err(|e| HarnessError::io(std::path::Path::new("<stdout>"), e))?;
        }
    }
    Ok(())
}
