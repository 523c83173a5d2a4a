//! Datasets, experiments and the `nnas` command line.
//!
//! A dataset is a JSON-lines file: a header with the generating config and
//! its hash, then one [`SequenceRecord`] per line. [`run_experiment`] turns
//! an [`ExperimentConfig`] into trained checkpoints and metric tables.

pub mod analysis;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod evaluate;
pub mod experiment;
pub mod features;
pub mod metrology;
pub mod record;
pub mod regime;

pub use analysis::{analyze_structure, write_structure, StructureAnalysis};
pub use dataset::{generate_dataset, Dataset, DatasetConfig, DatasetHeader, Split, SCHEMA_VERSION};
pub use error::{HarnessError, Result};
pub use evaluate::{baseline_predictions, evaluate, model_predictions, DepthBucket, Method, Predictions};
pub use experiment::{run_experiment, train_model, ExperimentConfig, ExperimentOutcome};
pub use record::{CircuitParams, SequenceRecord, Task};
pub use regime::{sample_max_length, LengthBucket, RegimePlan, Scale};
