use std::f64::consts::PI;

use crate::error::{CoreError, Result};

/// Principal-branch estimate `arccos(<O>) / n`, in `[0, π/n]`.
pub fn theta_estimate(expectation: f64, n: usize) -> f64 {
    expectation.clamp(-1.0, 1.0).acos() / n as f64
}

/// Solution of `cos(n θ) = <O>` closest to `reference`.
///
/// For `n θ > π` the principal branch folds the phase back; the candidates
/// `(±acos(<O>) + 2πk) / n` cover every branch.
pub fn theta_estimate_near(expectation: f64, n: usize, reference: f64) -> f64 {
    let a = expectation.clamp(-1.0, 1.0).acos();
    let nf = n as f64;
    let k0 = (reference * nf / (2.0 * PI)).round();
    let mut best = theta_estimate(expectation, n);
    let mut best_d = f64::INFINITY;
    for dk in -1..=1 {
        let k = k0 + dk as f64;
        for sign in [1.0, -1.0] {
            let cand = (sign * a + 2.0 * PI * k) / nf;
            let d = (cand - reference).abs();
            if d < best_d {
                best_d = d;
                best = cand;
            }
        }
    }
    best
}

pub fn mse_theta(estimates: &[f64], theta: f64) -> f64 {
    estimates.iter().map(|e| (e - theta).powi(2)).sum::<f64>() / estimates.len().max(1) as f64
}

pub fn rmse_theta(estimates: &[f64], theta: f64) -> f64 {
    mse_theta(estimates, theta).sqrt()
}

/// Standard deviation of the estimate from `shots` measurements of an
/// exact GHZ state, by the delta method.
pub fn delta_method_sigma(n: usize, theta: f64, shots: u64) -> f64 {
    let c = (n as f64 * theta).cos();
    ((1.0 - c * c) / shots as f64).sqrt() / (n as f64 * (n as f64 * theta).sin().abs())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitRate {
    pub b0: f64,
    pub r: f64,
}

/// Fits `b0 / n^2` to the reference curve, then `b0 / n^r` to the target
/// curve with `b0` fixed (least squares in log space).
pub fn fit_rate(ns: &[usize], target: &[f64], reference: &[f64]) -> Result<FitRate> {
    if ns.len() < 2 || target.len() != ns.len() || reference.len() != ns.len() {
        return Err(CoreError::InvalidArgument("fit_rate needs matching curves with at least 2 points".into()));
    }
    if target.iter().chain(reference).any(|&v| !(v > 0.0)) {
        return Err(CoreError::InvalidArgument("fit_rate needs positive values".into()));
    }
    let inv2: Vec<f64> = ns.iter().map(|&n| (n as f64).powi(-2)).collect();
    let b0 = reference.iter().zip(&inv2).map(|(c, x)| c * x).sum::<f64>() / inv2.iter().map(|x| x * x).sum::<f64>();
    let logs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let denom: f64 = logs.iter().map(|l| l * l).sum();
    if denom == 0.0 {
        return Err(CoreError::InvalidArgument("fit_rate needs some n > 1".into()));
    }
    let r = logs.iter().zip(target).map(|(l, c)| l * (b0.ln() - c.ln())).sum::<f64>() / denom;
    Ok(FitRate { b0, r })
}
