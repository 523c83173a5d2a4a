#![allow(dead_code)]

use nnas_harness::{generate_dataset, Dataset, DatasetConfig, Split, Task};

pub fn dataset(task: Task, qubits: usize, size: usize, t1: Option<f64>, split: Split, seed: u64) -> Dataset {
    let mut cfg = DatasetConfig::new(task, size, 0.25, t1, split, seed);
    cfg.qubits = qubits;
    generate_dataset(&cfg).unwrap()
}

pub fn bytes(ds: &Dataset) -> Vec<u8> {
    let mut out = Vec::new();
    ds.write_to(&mut out).unwrap();
    out
}
