use std::f64::consts::FRAC_PI_2;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DensityExecutor, ExecMode, Executor, Mitigated, Mitigator, OverheadLedger, DEFAULT_SHOTS};
use crate::circuit::{local_unitary, GateId, GateKind, LayeredCircuit};
use crate::error::{CoreError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CliffordSubstitution {
    /// Fraction of non-Clifford rotations replaced per training circuit.
    pub rate: f64,
    pub max_nonclifford: usize,
    pub training_circuits: usize,
    pub shots: u64,
}

impl Default for CliffordSubstitution {
    fn default() -> Self {
        Self { rate: 0.5, max_nonclifford: 20, training_circuits: 10, shots: DEFAULT_SHOTS }
    }
}

fn is_clifford_angle(theta: f64) -> bool {
    let k = theta / FRAC_PI_2;
    (k - k.round()).abs() < 1e-9
}

/// Frobenius distance `||R(θ) - R(kπ/2)||`.
pub fn clifford_distance(kind: GateKind, theta: f64, k: u32) -> f64 {
    let a = local_unitary::<f64>(kind, theta);
    let b = local_unitary::<f64>(kind, k as f64 * FRAC_PI_2);
    (a - b).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Normalized `e^{-4 d_k^2}` over `k = 0..3`.
pub fn replacement_weights(kind: GateKind, theta: f64) -> [f64; 4] {
    let mut w = [0.0; 4];
    for (k, x) in w.iter_mut().enumerate() {
        *x = (-4.0 * clifford_distance(kind, theta, k as u32).powi(2)).exp();
    }
    let s: f64 = w.iter().sum();
    w.map(|x| x / s)
}

/// One near-Clifford training circuit.
pub fn substitute_cliffords(circuit: &LayeredCircuit, sub: &CliffordSubstitution, rng: &mut ChaCha8Rng) -> Result<LayeredCircuit> {
    if !(0.0..=1.0).contains(&sub.rate) {
        return Err(CoreError::ProbabilityOutOfRange(sub.rate));
    }
    let candidates: Vec<GateId> = circuit
        .gates_with_ids()
        .filter(|(_, g)| g.kind.is_rotation() && !is_clifford_angle(g.angle))
        .map(|(id, _)| id)
        .collect();
    let n = candidates.len();
    let count = ((sub.rate * n as f64).round() as usize).max(n.saturating_sub(sub.max_nonclifford)).min(n);
    let mut out = circuit.clone();
    for i in sample(rng, n, count) {
        let gate = out.gate_mut(candidates[i]).expect("candidate exists");
        let w = replacement_weights(gate.kind, gate.angle);
        let k = WeightedIndex::new(w).expect("weights positive").sample(rng);
        gate.angle = k as f64 * FRAC_PI_2;
    }
    Ok(out)
}

/// Per-layer `y = a ỹ + b` fitted on near-Clifford training circuits.
pub fn cdr_mitigate(
    circuit: &LayeredCircuit,
    sub: &CliffordSubstitution,
    exec: &mut impl Executor,
    seed: u64,
) -> Result<Mitigated> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let depth = circuit.depth();
    let mut xs = vec![Vec::with_capacity(sub.training_circuits); depth];
    let mut ys = vec![Vec::with_capacity(sub.training_circuits); depth];
    for _ in 0..sub.training_circuits {
        let t = substitute_cliffords(circuit, sub, &mut rng)?;
        let noisy = exec.noisy(&t)?;
        let ideal = exec.ideal(&t)?;
        for l in 0..depth {
            xs[l].push(noisy[l]);
            ys[l].push(ideal[l]);
        }
    }
    let target = exec.noisy(circuit)?;
    let mut values = Vec::with_capacity(depth);
    for l in 0..depth {
        let (a, b) = affine_fit(&xs[l], &ys[l]).ok_or(CoreError::RankDeficient { layer: Some(l) })?;
        values.push(a * target[l] + b);
    }
    Ok(Mitigated { values, ledger: OverheadLedger::new(sub.training_circuits as u64 + 1, sub.shots) })
}

fn affine_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len() as f64;
    if x.len() < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx <= 1e-24 * n.max(1.0) {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let a = sxy / sxx;
    Some((a, my - a * mx))
}

#[derive(Clone, Debug, Default)]
pub struct CdrMitigator {
    pub config: CliffordSubstitution,
    pub mode: ExecMode,
}

impl Mitigator for CdrMitigator {
    fn name(&self) -> &str {
        "cdr"
    }

    fn mitigate(&self, circuit: &LayeredCircuit, seed: u64) -> Result<Mitigated> {
        let mut exec = DensityExecutor::new(self.mode.shots(self.config.shots), seed ^ 0x5DEE_CE66);
        cdr_mitigate(circuit, &self.config, &mut exec, seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::FnExecutor;
    use crate::circuit::build_ising_trotter;
    use crate::sim::{simulate, SimMode};

    #[test]
    fn clifford_angle_dominates() {
        let w = replacement_weights(GateKind::RX, FRAC_PI_2);
        assert!(clifford_distance(GateKind::RX, FRAC_PI_2, 1) < 1e-15);
        assert!(w[1] > w[0] && w[1] > w[2] && w[1] > w[3]);
        let s: f64 = w.iter().sum();
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn substitution_caps_nonclifford() {
        let c = build_ising_trotter(4, 0.6, 1.0, 0.37, 10).unwrap().compiled();
        let sub = CliffordSubstitution::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = substitute_cliffords(&c, &sub, &mut rng).unwrap();
        let nc = t.gates().filter(|g| g.kind.is_rotation() && !is_clifford_angle(g.angle)).count();
        assert!(nc <= 20);
    }

    #[test]
    fn affine_noise_recovered() {
        let c = build_ising_trotter(3, 0.6, 1.0, 0.9, 4).unwrap().compiled();
        let mut exec = FnExecutor {
            noisy: |circ: &LayeredCircuit| {
                Ok(simulate::<f64>(circ, SimMode::Noiseless)?.into_iter().map(|y| 0.8 * y + 0.05).collect())
            },
            ideal: |circ: &LayeredCircuit| simulate::<f64>(circ, SimMode::Noiseless),
        };
        let out = cdr_mitigate(&c, &CliffordSubstitution::default(), &mut exec, 7).unwrap();
        let truth = simulate::<f64>(&c, SimMode::Noiseless).unwrap();
        for (m, t) in out.values.iter().zip(&truth) {
            assert!((m - t).abs() < 1e-10, "{m} vs {t}");
        }
        assert_eq!(out.ledger.total(), 101112);
    }

    #[test]
    fn degenerate_training_set() {
        let c = build_ising_trotter(2, 0.6, 1.0, 0.9, 2).unwrap().compiled();
        let mut exec = FnExecutor {
            noisy: |circ: &LayeredCircuit| Ok(vec![0.3; circ.depth()]),
            ideal: |circ: &LayeredCircuit| Ok(vec![0.5; circ.depth()]),
        };
        let err = cdr_mitigate(&c, &CliffordSubstitution::default(), &mut exec, 1).unwrap_err();
        assert!(matches!(err, CoreError::RankDeficient { layer: Some(0) }));
    }
}
