use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

pub const MIN_ENTROPY_SAMPLES: usize = 10;
/// Floor for degenerate (constant) samples, `-ln(1e12)`.
pub const ENTROPY_CAP: f64 = -27.631021115928547;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyMethod {
    Vasicek,
    Ebrahimi,
    /// Ebrahimi below 1000 samples, Vasicek from there on.
    #[default]
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyEstimate {
    pub value: f64,
    pub degenerate: bool,
}

/// Spacing window `m = floor(sqrt(n) + 1/2)`, at most `n / 2`.
pub fn entropy_window(n: usize) -> usize {
    (((n as f64).sqrt() + 0.5).floor() as usize).clamp(1, (n / 2).max(1))
}

/// Spacing estimate of differential entropy (nats).
pub fn differential_entropy(samples: &[f64], method: EntropyMethod) -> Result<EntropyEstimate> {
    let n = samples.len();
    if n < MIN_ENTROPY_SAMPLES {
        return Err(CoreError::InvalidArgument(format!(
            "entropy needs at least {MIN_ENTROPY_SAMPLES} samples, got {n}"
        )));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::InvalidArgument("non-finite sample".into()));
    }
    let mut x = samples.to_vec();
    x.sort_by(f64::total_cmp);
    if x[0] == x[n - 1] {
        return Ok(EntropyEstimate { value: ENTROPY_CAP, degenerate: true });
    }
    let method = match method {
        EntropyMethod::Auto if n < 1000 => EntropyMethod::Ebrahimi,
        EntropyMethod::Auto => EntropyMethod::Vasicek,
        m => m,
    };
    let m = entropy_window(n);
    let nf = n as f64;
    let mf = m as f64;
    let mut sum = 0.0;
    for i in 0..n {
        let hi = x[(i + m).min(n - 1)];
        let lo = x[i.saturating_sub(m)];
        let c = match method {
            EntropyMethod::Ebrahimi => {
                // 1-based position i + 1
                let pos = i + 1;
                if pos <= m {
                    1.0 + (pos as f64 - 1.0) / mf
                } else if pos <= n - m {
                    2.0
                } else {
                    1.0 + (nf - pos as f64) / mf
                }
            }
            _ => 2.0,
        };
        sum += (nf / (c * mf) * (hi - lo).max(f64::MIN_POSITIVE)).ln();
    }
    let value = sum / nf;
    if value < ENTROPY_CAP {
        return Ok(EntropyEstimate { value: ENTROPY_CAP, degenerate: true });
    }
    Ok(EntropyEstimate { value, degenerate: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal, Uniform};

    #[test]
    fn constant_is_degenerate() {
        let e = differential_entropy(&[0.5; 20], EntropyMethod::Auto).unwrap();
        assert!(e.degenerate && e.value == ENTROPY_CAP);
        assert!(differential_entropy(&[0.5; 5], EntropyMethod::Auto).is_err());
    }

    #[test]
    fn scaling_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v).collect();
        let hx = differential_entropy(&x, EntropyMethod::Vasicek).unwrap().value;
        let hy = differential_entropy(&y, EntropyMethod::Vasicek).unwrap().value;
        assert!((hy - hx - 3f64.ln()).abs() < 0.05);
        let u = Uniform::new(0.0, 1.0).unwrap();
        let s: Vec<f64> = (0..500).map(|_| u.sample(&mut rng)).collect();
        let h = differential_entropy(&s, EntropyMethod::Auto).unwrap().value;
        assert!(h.abs() < 0.1, "{h}");
    }
}
