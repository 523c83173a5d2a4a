//! Predictions of every mitigator on a test set and the metric table.

use std::io::Write;
use std::path::Path;

use nnas_core::baselines::{CdrMitigator, Mitigator, OverheadLedger, PecMitigator, ZneMitigator};
use nnas_core::metrics::{bootstrap_ci, mae, rd_point, MaeMode, MetricReport};
use nnas_core::CoreError;
use nnas_surrogate::{ModelKind, SurrogateModel};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{record_circuits, Dataset, DEFAULT_SHOTS};
use crate::error::{HarnessError, Result};
use crate::features::record_input;
use crate::metrology::{delta_method_curve, metrology_rate, theta_mse_curve};
use crate::record::Task;

pub const CI_RESAMPLES: usize = 1000;
pub const CI_LEVEL: f64 = 0.95;
const CI_SEED: u64 = 0xC1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Noisy,
    Zne,
    Pec,
    Cdr,
    Nnas,
    Nea,
    Nna,
}

impl Method {
    pub const ALL: [Method; 7] =
        [Method::Noisy, Method::Zne, Method::Pec, Method::Cdr, Method::Nnas, Method::Nea, Method::Nna];

    pub fn name(self) -> &'static str {
        match self {
            Method::Noisy => "noisy",
            Method::Zne => "zne",
            Method::Pec => "pec",
            Method::Cdr => "cdr",
            Method::Nnas => "nnas",
            Method::Nea => "nea",
            Method::Nna => "nna",
        }
    }

    pub fn learned(self) -> Option<ModelKind> {
        match self {
            Method::Nnas => Some(ModelKind::Nnas),
            Method::Nea => Some(ModelKind::Nea),
            Method::Nna => Some(ModelKind::Nna),
            _ => None,
        }
    }

    /// Cost of one mitigated circuit under the default settings.
    pub fn default_ledger(self) -> OverheadLedger {
        match self {
            Method::Noisy => OverheadLedger::zero(),
            Method::Zne => OverheadLedger::new(2, DEFAULT_SHOTS),
            Method::Pec => nnas_core::baselines::PecConfig::default().ledger(),
            Method::Cdr => {
                let c = nnas_core::baselines::CliffordSubstitution::default();
                OverheadLedger::new(c.training_circuits as u64 + 1, c.shots)
            }
            Method::Nnas | Method::Nea | Method::Nna => OverheadLedger::single_circuit(),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| HarnessError::Config(format!("unknown model `{s}`")))
    }
}

/// Mitigated sequences of one method on one dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct Predictions {
    pub model: String,
    pub values: Vec<Vec<f64>>,
    pub ledger: OverheadLedger,
    /// Sequences whose mitigation hit a guard (clamped denominator or a
    /// rank-deficient regression that fell back to the noisy values).
    pub flagged: usize,
}

fn circuit_baseline(method: Method) -> Box<dyn Mitigator> {
    match method {
        Method::Zne => Box::new(ZneMitigator::default()),
        Method::Pec => Box::new(PecMitigator::default()),
        Method::Cdr => Box::new(CdrMitigator::default()),
        _ => unreachable!("not a circuit-level baseline"),
    }
}

fn baseline_seed(method: Method, record_seed: u64) -> u64 {
    record_seed ^ (0x9E37_79B9_7F4A_7C15u64.wrapping_mul(method as u64 + 1))
}

/// Noisy values or a circuit-level baseline (ZNE, PEC, CDR) on every
/// record.
pub fn baseline_predictions(method: Method, dataset: &Dataset) -> Result<Predictions> {
    if method == Method::Noisy {
        return Ok(Predictions {
            model: method.name().into(),
            values: dataset.records.iter().map(|r| r.noisy.clone()).collect(),
            ledger: OverheadLedger::zero(),
            flagged: 0,
        });
    }
    if method.learned().is_some() {
        return Err(HarnessError::Config(format!("{method} needs a trained model")));
    }
    let mitigator = circuit_baseline(method);
    let out = dataset
        .records
        .par_iter()
        .map(|r| -> Result<(Vec<f64>, OverheadLedger, bool)> {
            let seed = baseline_seed(method, r.seed);
            let circuits = record_circuits(r, dataset.config())?;
            let mut values = Vec::with_capacity(r.length);
            let mut ledger = method.default_ledger();
            let mut flagged = false;
            for (k, c) in circuits.iter().enumerate() {
                match mitigator.mitigate(c, seed.wrapping_add(k as u64)) {
                    Ok(m) => {
                        ledger = m.ledger;
                        match r.task {
                            Task::Trotter => values.extend(m.values),
                            Task::Ghz => values.push(*m.values.last().expect("nonempty circuit")),
                        }
                    }
                    Err(CoreError::RankDeficient { .. }) => {
                        flagged = true;
                        match r.task {
                            Task::Trotter => values.extend(r.noisy.iter().copied()),
                            Task::Ghz => values.push(r.noisy[k]),
                        }
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            Ok((values, ledger, flagged))
        })
        .collect::<Result<Vec<_>>>()?;
    let ledger = out.first().map_or(method.default_ledger(), |o| o.1);
    Ok(Predictions {
        model: method.name().into(),
        flagged: out.iter().filter(|o| o.2).count(),
        values: out.into_iter().map(|o| o.0).collect(),
        ledger,
    })
}

/// A trained surrogate on every record.
pub fn model_predictions(model: &SurrogateModel, dataset: &Dataset) -> Result<Predictions> {
    let out = dataset
        .records
        .par_iter()
        .map(|r| Ok(model.predict(&record_input(r, dataset.config())?)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(Predictions {
        model: model.kind.name().to_ascii_lowercase(),
        flagged: out.iter().filter(|p| p.degenerate).count(),
        values: out.into_iter().map(|p| p.values).collect(),
        ledger: OverheadLedger::single_circuit(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DepthBucket {
    All,
    /// Layers up to the base training length.
    Easy,
    /// Deeper layers, seen only in the partially trained regime.
    Hard,
}

impl DepthBucket {
    pub fn name(self) -> &'static str {
        match self {
            DepthBucket::All => "all",
            DepthBucket::Easy => "easy",
            DepthBucket::Hard => "hard",
        }
    }

    fn contains(self, layer: usize, base: usize) -> bool {
        match self {
            DepthBucket::All => true,
            DepthBucket::Easy => layer <= base,
            DepthBucket::Hard => layer > base,
        }
    }
}

/// Per-sequence slices of `values` restricted to the bucket's layers
/// (layers numbered from 1); empty slices dropped.
pub fn bucket_slices(values: &[Vec<f64>], bucket: DepthBucket, base: usize) -> Vec<Vec<f64>> {
    values
        .iter()
        .map(|v| v.iter().enumerate().filter(|(l, _)| bucket.contains(l + 1, base)).map(|(_, x)| *x).collect::<Vec<_>>())
        .filter(|v| !v.is_empty())
        .collect()
}

fn t1_of(dataset: &Dataset) -> f64 {
    dataset.config().t1_us.unwrap_or(0.0)
}

/// Point MAE of `pred` on one depth bucket.
pub fn bucket_mae(pred: &Predictions, test: &Dataset, bucket: DepthBucket) -> Result<f64> {
    let base = test.config().plan()?.base_length();
    let truth: Vec<Vec<f64>> = test.records.iter().map(|r| r.noiseless.clone()).collect();
    Ok(mae(&bucket_slices(&pred.values, bucket, base), &bucket_slices(&truth, bucket, base), MaeMode::Point)?)
}

/// One report per depth bucket that holds data. Ghz reports also carry the
/// phase-estimation RMSE and fitting rate in the `all` row.
pub fn evaluate(pred: &Predictions, test: &Dataset) -> Result<Vec<MetricReport>> {
    if pred.values.len() != test.records.len() {
        return Err(HarnessError::Data(format!("{} predictions for {} records", pred.values.len(), test.records.len())));
    }
    let base = test.config().plan()?.base_length();
    let truth: Vec<Vec<f64>> = test.records.iter().map(|r| r.noiseless.clone()).collect();
    let noisy: Vec<Vec<f64>> = test.records.iter().map(|r| r.noisy.clone()).collect();
    let mut reports = Vec::new();
    for bucket in [DepthBucket::All, DepthBucket::Easy, DepthBucket::Hard] {
        let p = bucket_slices(&pred.values, bucket, base);
        if p.is_empty() {
            continue;
        }
        let t = bucket_slices(&truth, bucket, base);
        let y = bucket_slices(&noisy, bucket, base);
        let errors: Vec<f64> = p.iter().flatten().zip(t.iter().flatten()).map(|(a, b)| (a - b).abs()).collect();
        let ci = bootstrap_ci(&errors, CI_RESAMPLES, CI_LEVEL, CI_SEED);
        let (rmse_theta, fit_rate_r) = if test.config().task == Task::Ghz && bucket == DepthBucket::All {
            let curve = theta_mse_curve(&test.records, &pred.values)?;
            let reference = delta_method_curve(&test.records, test.config().shots)?;
            (Some(curve.pooled_rmse()), metrology_rate(&curve, &reference).ok().map(|f| f.r))
        } else {
            (None, None)
        };
        reports.push(MetricReport {
            model: pred.model.clone(),
            t1_us: t1_of(test),
            bucket: bucket.name().into(),
            sequences: p.len(),
            mae_point: mae(&p, &t, MaeMode::Point)?,
            mae_point_ci_low: ci.low,
            mae_point_ci_high: ci.high,
            mae_seq_norm: mae(&p, &t, MaeMode::SeqNorm)?,
            rd_point: rd_point(&y, &p, &t)?.value,
            rmse_theta,
            fit_rate_r,
            overhead: pred.ledger,
            overhead_total: pred.ledger.total(),
        });
    }
    Ok(reports)
}

#[derive(Serialize)]
struct MetricRow<'a> {
    model: &'a str,
    t1_us: f64,
    bucket: &'a str,
    sequences: usize,
    mae_point: f64,
    mae_point_ci_low: f64,
    mae_point_ci_high: f64,
    mae_seq_norm: f64,
    rd_point: f64,
    rmse_theta: Option<f64>,
    fit_rate_r: Option<f64>,
    circuit_instances: u64,
    shots_per_instance: u64,
    total_shots: u64,
    overhead_total: u64,
}

/// One CSV row per report.
pub fn write_reports_csv(reports: &[MetricReport], w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in reports {
        out.serialize(MetricRow {
            model: &r.model,
            t1_us: r.t1_us,
            bucket: &r.bucket,
            sequences: r.sequences,
            mae_point: r.mae_point,
            mae_point_ci_low: r.mae_point_ci_low,
            mae_point_ci_high: r.mae_point_ci_high,
            mae_seq_norm: r.mae_seq_norm,
            rd_point: r.rd_point,
            rmse_theta: r.rmse_theta,
            fit_rate_r: r.fit_rate_r,
            circuit_instances: r.overhead.circuit_instances,
            shots_per_instance: r.overhead.shots_per_instance,
            total_shots: r.overhead.total_shots,
            overhead_total: r.overhead_total,
        })?;
    }
    out.flush().map_err(|e| HarnessError::io(Path::new("<csv>"), e))?;
    Ok(())
}

pub fn save_reports(reports: &[MetricReport], csv_path: &Path, json_path: &Path) -> Result<()> {
    let f = std::fs::File::create(csv_path).map_err(|e| HarnessError::io(csv_path, e))?;
    write_reports_csv(reports, f)?;
    std::fs::write(json_path, serde_json::to_string_pretty(reports)?).map_err(|e| HarnessError::io(json_path, e))?;
    Ok(())
}

/// Predictions as CSV: `record,layer,value`.
pub fn write_predictions_csv(pred: &Predictions, dataset: &Dataset, w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["record", "layer", "noisy", "noiseless", pred.model.as_str()])?;
    for (r, v) in dataset.records.iter().zip(&pred.values) {
        for (l, x) in v.iter().enumerate() {
            out.write_record(&[
                r.id.to_string(),
                (l + 1).to_string(),
                r.noisy[l].to_string(),
                r.noiseless[l].to_string(),
                x.to_string(),
            ])?;
        }
    }
    out.flush().map_err(|e| HarnessError::io(Path::new("<csv>"), e))?;
    Ok(())
}
