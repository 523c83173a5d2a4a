//! Phase estimation from GHZ sequences: element `l` of a record is the
//! `l`-qubit estimate of the same `θ`.

use nnas_core::metrics::{fit_rate, theta_estimate_near, FitRate};

use crate::error::{HarnessError, Result};
use crate::record::SequenceRecord;

/// Mean squared `θ` error per qubit count `n = 1..`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetrologyCurve {
    pub ns: Vec<usize>,
    pub mse: Vec<f64>,
}

impl MetrologyCurve {
    /// RMSE pooled over every qubit count.
    pub fn pooled_rmse(&self) -> f64 {
        (self.mse.iter().sum::<f64>() / self.mse.len().max(1) as f64).sqrt()
    }

    pub fn rmse(&self) -> Vec<f64> {
        self.mse.iter().map(|m| m.sqrt()).collect()
    }
}

fn max_common_length(records: &[SequenceRecord]) -> Result<usize> {
    records
        .iter()
        .map(|r| r.length)
        .min()
        .ok_or_else(|| HarnessError::Data("no GHZ records".into()))
}

/// Per-`n` MSE of `arccos(value)/n` (branch nearest the true `θ`) over the
/// records, using `values[i][n-1]` as the measured expectation.
pub fn theta_mse_curve(records: &[SequenceRecord], values: &[Vec<f64>]) -> Result<MetrologyCurve> {
    if records.len() != values.len() {
        return Err(HarnessError::Data(format!("{} records, {} value sequences", records.len(), values.len())));
    }
    let max_n = max_common_length(records)?;
    let mut mse = vec![0.0; max_n];
    for (r, v) in records.iter().zip(values) {
        let theta = r.theta().ok_or_else(|| HarnessError::Data("metrology needs GHZ records".into()))?;
        for n in 1..=max_n {
            mse[n - 1] += (theta_estimate_near(v[n - 1], n, theta) - theta).powi(2);
        }
    }
    mse.iter_mut().for_each(|m| *m /= records.len() as f64);
    Ok(MetrologyCurve { ns: (1..=max_n).collect(), mse })
}

/// Delta-method variance of the estimate from `shots` measurements of the
/// exact expectations `records[i].noiseless`, averaged over records.
/// Points with `sin(nθ) ≈ 0` carry no phase information and are skipped.
pub fn delta_method_curve(records: &[SequenceRecord], shots: u64) -> Result<MetrologyCurve> {
    let max_n = max_common_length(records)?;
    let mut ns = Vec::with_capacity(max_n);
    let mut mse = Vec::with_capacity(max_n);
    for n in 1..=max_n {
        let mut sum = 0.0;
        let mut count = 0usize;
        for r in records {
            let theta = r.theta().ok_or_else(|| HarnessError::Data("metrology needs GHZ records".into()))?;
            let slope = n as f64 * (n as f64 * theta).sin();
            if slope.abs() < 1e-6 {
                continue;
            }
            let y = r.noiseless[n - 1];
            sum += (1.0 - y * y) / (shots as f64 * slope * slope);
            count += 1;
        }
        if count > 0 {
            ns.push(n);
            mse.push(sum / count as f64);
        }
    }
    Ok(MetrologyCurve { ns, mse })
}

/// Fitting rate of `target` with `b0` taken from `reference`. Both curves
/// must cover the same qubit counts.
pub fn metrology_rate(target: &MetrologyCurve, reference: &MetrologyCurve) -> Result<FitRate> {
    let n = target.ns.len().min(reference.ns.len());
    if target.ns[..n] != reference.ns[..n] {
        return Err(HarnessError::Data("metrology curves cover different qubit counts".into()));
    }
    Ok(fit_rate(&target.ns[..n], &target.mse[..n], &reference.mse[..n])?)
}
