use crate::error::{CoreError, Result};

/// `ln(1e12)`: bound on `|RD|` when one of the errors vanishes.
pub const RD_CAP: f64 = 27.631021115928547;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaeMode {
    /// Mean of `|ŷ - y|` over every (sequence, layer) pair.
    Point,
    /// Mean over sequences of `||ŷ - y||_2 / sqrt(L)`.
    SeqNorm,
}

fn check_shapes(pred: &[Vec<f64>], truth: &[Vec<f64>]) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(CoreError::DimensionMismatch { expected: truth.len(), got: pred.len() });
    }
    for (p, t) in pred.iter().zip(truth) {
        if p.len() != t.len() {
            return Err(CoreError::DimensionMismatch { expected: t.len(), got: p.len() });
        }
    }
    Ok(())
}

pub fn mae(pred: &[Vec<f64>], truth: &[Vec<f64>], mode: MaeMode) -> Result<f64> {
    check_shapes(pred, truth)?;
    match mode {
        MaeMode::Point => {
            let (sum, count) = pred.iter().zip(truth).fold((0.0, 0usize), |(s, c), (p, t)| {
                (s + p.iter().zip(t).map(|(a, b)| (a - b).abs()).sum::<f64>(), c + p.len())
            });
            if count == 0 {
                return Err(CoreError::InvalidArgument("no points to score".into()));
            }
            Ok(sum / count as f64)
        }
        MaeMode::SeqNorm => {
            let seqs: Vec<f64> = pred
                .iter()
                .zip(truth)
                .filter(|(p, _)| !p.is_empty())
                .map(|(p, t)| {
                    let ss: f64 = p.iter().zip(t).map(|(a, b)| (a - b).powi(2)).sum();
                    (ss / p.len() as f64).sqrt()
                })
                .collect();
            if seqs.is_empty() {
                return Err(CoreError::InvalidArgument("no sequences to score".into()));
            }
            Ok(seqs.iter().sum::<f64>() / seqs.len() as f64)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RdValue {
    pub value: f64,
    /// One of the errors was zero and the value sits at `±RD_CAP`.
    pub capped: bool,
}

/// `ln(noisy_err / mitigated_err)`.
pub fn rd_from_errors(noisy_err: f64, mitigated_err: f64) -> RdValue {
    let (a, b) = (noisy_err.abs(), mitigated_err.abs());
    match (a == 0.0, b == 0.0) {
        (true, true) => RdValue { value: 0.0, capped: true },
        (false, true) => RdValue { value: RD_CAP, capped: true },
        (true, false) => RdValue { value: -RD_CAP, capped: true },
        _ => {
            let v = (a / b).ln();
            RdValue { value: v.clamp(-RD_CAP, RD_CAP), capped: v.abs() > RD_CAP }
        }
    }
}

/// Relative deviation of one mitigated value.
pub fn rd(noisy: f64, mitigated: f64, truth: f64) -> RdValue {
    rd_from_errors(noisy - truth, mitigated - truth)
}

/// RD of the point MAEs over a whole set of sequences.
pub fn rd_point(noisy: &[Vec<f64>], mitigated: &[Vec<f64>], truth: &[Vec<f64>]) -> Result<RdValue> {
    Ok(rd_from_errors(mae(noisy, truth, MaeMode::Point)?, mae(mitigated, truth, MaeMode::Point)?))
}
