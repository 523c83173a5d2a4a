//! Records to surrogate inputs.

use nnas_core::noise::T1_GRID_US;
use nnas_surrogate::features::OBSERVABLE_CODE_LEN;
use nnas_surrogate::{FeatureSchema, FeatureValue, SequenceInput, TrainingExample};

use crate::dataset::{Dataset, DatasetConfig};
use crate::error::Result;
use crate::record::{CircuitParams, SequenceRecord, Task};

/// Feature schema for a task, covering sequences up to `max_layers`.
pub fn schema_for(task: Task, max_layers: usize) -> FeatureSchema {
    match task {
        Task::Trotter => FeatureSchema::trotter(max_layers),
        Task::Ghz => FeatureSchema::ghz(max_layers),
    }
}

/// 0 without noise, 1-4 for the standard T1 grid, 5 otherwise.
pub fn noise_code(t1_us: Option<f64>) -> f64 {
    match t1_us {
        None => 0.0,
        Some(t1) => T1_GRID_US.iter().position(|g| (g - t1).abs() < 1e-9).map_or(5.0, |i| (i + 1) as f64),
    }
}

fn observable_code(task: Task, n: usize) -> Vec<f64> {
    let mut code = vec![0.0; OBSERVABLE_CODE_LEN];
    match task {
        // Z on the last qubit
        Task::Trotter => code[(n - 1).min(OBSERVABLE_CODE_LEN - 1)] = 3.0,
        // X on every qubit
        Task::Ghz => code.iter_mut().take(n).for_each(|c| *c = 1.0),
    }
    code
}

pub fn record_features(record: &SequenceRecord, config: &DatasetConfig) -> Result<Vec<FeatureValue>> {
    let (e1, e2) = config.error_rates_percent()?;
    let circuit_code = match record.task {
        Task::Trotter => 0.0,
        Task::Ghz => 1.0,
    };
    let mut out = vec![
        FeatureValue::Scalar(record.n as f64),
        FeatureValue::Scalar(circuit_code),
        FeatureValue::Scalar(noise_code(config.t1_us)),
        FeatureValue::Scalar(e1),
        FeatureValue::Scalar(e2),
    ];
    match record.params {
        CircuitParams::Trotter { h_dt, j_over_h } => {
            out.push(FeatureValue::Scalar(h_dt));
            out.push(FeatureValue::Scalar(j_over_h));
        }
        CircuitParams::Ghz { theta } => out.push(FeatureValue::Scalar(theta)),
    }
    out.push(FeatureValue::Codes(observable_code(record.task, record.n)));
    Ok(out)
}

pub fn record_input(record: &SequenceRecord, config: &DatasetConfig) -> Result<SequenceInput> {
    Ok(SequenceInput { features: record_features(record, config)?, noisy: record.noisy.clone(), p_hats: record.p_hats.clone() })
}

pub fn training_examples(dataset: &Dataset) -> Result<Vec<TrainingExample>> {
    dataset
        .records
        .iter()
        .map(|r| Ok(TrainingExample { input: record_input(r, dataset.config())?, target: r.noiseless.clone() }))
        .collect()
}
