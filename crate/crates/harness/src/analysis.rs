//! Structural correspondence between the cumulative noise `N_l` of a
//! circuit and the surrogate vectors `N̂_l` of a trained NNAS model.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use nnas_core::accumulate::accumulate_circuit;
use nnas_core::metrics::{entropy_correspondence, MIN_ENTROPY_SAMPLES, spearman_matrix, sum_pool};
use nnas_surrogate::{accumulate, embed_features, extract, ModelKind, SurrogateModel};
use rayon::prelude::*;

use crate::dataset::{record_circuits, Dataset};
use crate::error::{HarnessError, Result};
use crate::features::record_features;
use crate::record::Task;

pub const MAX_ANALYSIS_QUBITS: usize = 3;
const SUPPORT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct LayerStructure {
    pub layer: usize,
    /// Sum-pooled PTM of `N_l`.
    pub pooled_ptm: DMatrix<f64>,
    /// `N̂ N̂^T`.
    pub surrogate: DMatrix<f64>,
    /// `None` when the pooled PTM does not tile into `d x d` windows.
    pub spearman: Option<Vec<Vec<Option<f64>>>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SequenceStructure {
    pub record: usize,
    pub ptm_entropy: Vec<f64>,
    pub surrogate_entropy: Vec<f64>,
    /// Some entropy hit the constant-sample cap (e.g. `N_l = 0`).
    pub degenerate: bool,
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
    pub layers: Vec<LayerStructure>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StructureAnalysis {
    pub sequences: Vec<SequenceStructure>,
}

impl StructureAnalysis {
    /// Mean of the defined per-sequence correlations.
    pub fn mean_correlations(&self) -> (Option<f64>, Option<f64>) {
        let mean = |v: Vec<f64>| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
        (
            mean(self.sequences.iter().filter_map(|s| s.pearson).collect()),
            mean(self.sequences.iter().filter_map(|s| s.spearman).collect()),
        )
    }
}

/// Pool window taking a PTM of side `side` to `d x d`, or 2 when `d` does
/// not divide it.
fn pool_window(side: usize, d: usize) -> usize {
    if side >= d && side % d == 0 {
        side / d
    } else {
        2
    }
}

/// Entries of `m` that are not exact structural zeros. Fewer than the
/// estimator's minimum yields a constant sample, which it flags degenerate.
fn support(m: &DMatrix<f64>) -> Vec<f64> {
    let v: Vec<f64> = m.iter().copied().filter(|x| x.abs() > SUPPORT_TOL).collect();
    if v.len() < MIN_ENTROPY_SAMPLES {
        vec![0.0; MIN_ENTROPY_SAMPLES]
    } else {
        v
    }
}

/// Pooled PTMs, surrogate outer products, Spearman matrices and entropy
/// curves for the first `limit` records (all when `None`).
pub fn analyze_structure(model: &SurrogateModel, dataset: &Dataset, limit: Option<usize>) -> Result<StructureAnalysis> {
    if model.kind != ModelKind::Nnas {
        return Err(HarnessError::Data(format!("structure analysis needs an NNAS checkpoint, got {}", model.kind)));
    }
    let cfg = dataset.config();
    if cfg.task != Task::Trotter {
        return Err(HarnessError::Data("structure analysis needs single-circuit (trotter) sequences".into()));
    }
    if model.schema != crate::features::schema_for(cfg.task, model.schema.max_layers) {
        return Err(HarnessError::Data("checkpoint was trained for a different task".into()));
    }
    if cfg.qubits > MAX_ANALYSIS_QUBITS {
        return Err(HarnessError::Data(format!("structure analysis supports n <= {MAX_ANALYSIS_QUBITS}, got {}", cfg.qubits)));
    }
    // too few surrogate entries for a spacing estimate
    let entropy_ok = model.hidden_dim >= MIN_ENTROPY_SAMPLES;
    if !entropy_ok {
        log::warn!("hidden dimension {} too small for entropy curves; emitting matrices only", model.hidden_dim);
    }
    let records = &dataset.records[..limit.unwrap_or(dataset.records.len()).min(dataset.records.len())];
    let sequences = records
        .par_iter()
        .map(|r| -> Result<SequenceStructure> {
            if r.length > model.schema.max_layers {
                return Err(HarnessError::Data(format!("record {} longer than the checkpoint supports", r.id)));
            }
            let circuit = &record_circuits(r, cfg)?[0];
            let states = accumulate_circuit::<f64>(circuit)?;
            let x = embed_features(model, &record_features(r, cfg)?, Some(&r.noisy), r.length)?;
            let hs = accumulate(model, &x)?;
            let mut layers = Vec::with_capacity(r.length);
            let mut ptm_values = Vec::with_capacity(r.length);
            let mut surrogate_values = Vec::with_capacity(r.length);
            for (l, (state, h)) in states.iter().zip(&hs).enumerate() {
                let e = extract(model, h)?;
                let nvec = nalgebra::DVector::from_vec(e.n.clone());
                let surrogate = &nvec * nvec.transpose();
                let ptm = state.noise_ptm.matrix();
                let pooled = sum_pool(ptm, pool_window(ptm.nrows(), model.hidden_dim))?;
                let spearman = spearman_matrix(&surrogate, &pooled).ok();
                ptm_values.push(support(&pooled));
                surrogate_values.push(e.n);
                layers.push(LayerStructure { layer: l + 1, pooled_ptm: pooled, surrogate, spearman });
            }
            let (ptm_entropy, surrogate_entropy, degenerate, pearson, spearman) = if r.length >= 3 && entropy_ok {
                let c = entropy_correspondence(&surrogate_values, &ptm_values)?;
                let degenerate = c.ptm.any_degenerate() || c.surrogate.any_degenerate();
                (c.ptm.values, c.surrogate.values, degenerate, c.pearson, c.spearman)
            } else {
                (vec![], vec![], false, None, None)
            };
            Ok(SequenceStructure { record: r.id, ptm_entropy, surrogate_entropy, degenerate, pearson, spearman, layers })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StructureAnalysis { sequences })
}

fn write_matrix(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for i in 0..m.nrows() {
        w.write_record(m.row(i).iter().map(|v| v.to_string()))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes `correlations.csv`, `entropy.csv` and, for the first sequence,
/// per-layer `pooled_ptm_L.csv`, `surrogate_L.csv` and `spearman_L.csv`.
pub fn write_structure(analysis: &StructureAnalysis, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    let mut corr = csv::Writer::from_path(out_dir.join("correlations.csv"))?;
    corr.write_record(["record", "pearson", "spearman", "degenerate"])?;
    let mut ent = csv::Writer::from_path(out_dir.join("entropy.csv"))?;
    ent.write_record(["record", "layer", "ptm_entropy", "surrogate_entropy"])?;
    for s in &analysis.sequences {
        corr.write_record(&[s.record.to_string(), opt(s.pearson), opt(s.spearman), s.degenerate.to_string()])?;
        for (l, (a, b)) in s.ptm_entropy.iter().zip(&s.surrogate_entropy).enumerate() {
            ent.write_record(&[s.record.to_string(), (l + 1).to_string(), a.to_string(), b.to_string()])?;
        }
    }
    corr.flush().map_err(|e| HarnessError::io(out_dir, e))?;
    ent.flush().map_err(|e| HarnessError::io(out_dir, e))?;
    if let Some(first) = analysis.sequences.first() {
        for layer in &first.layers {
            write_matrix(&out_dir.join(format!("pooled_ptm_{}.csv", layer.layer)), &layer.pooled_ptm)?;
            write_matrix(&out_dir.join(format!("surrogate_{}.csv", layer.layer)), &layer.surrogate)?;
            if let Some(sp) = &layer.spearman {
                let path = out_dir.join(format!("spearman_{}.csv", layer.layer));
                let mut w = csv::WriterBuilder::new().has_headers(false).from_path(&path)?;
                for row in sp {
                    w.write_record(row.iter().map(|v| opt(*v)))?;
                }
                w.flush().map_err(|e| HarnessError::io(&path, e))?;
            }
        }
    }
    let (p, s) = analysis.mean_correlations();
    let mut summary = std::fs::File::create(out_dir.join("summary.txt")).map_err(|e| HarnessError::io(out_dir, e))?;
    writeln!(summary, "sequences {}\nmean_pearson {}\nmean_spearman {}", analysis.sequences.len(), opt(p), opt(s))
        .map_err(|e| HarnessError::io(out_dir, e))?;
    Ok(())
}
