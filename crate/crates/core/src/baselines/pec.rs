use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::spl::{spl_calibrate, CalibrationMode, SplModel};
use super::{Mitigated, Mitigator, OverheadLedger, DEFAULT_SHOTS};
use crate::circuit::{GateId, LayeredCircuit};
use crate::error::{CoreError, Result};
use crate::pauli::{convolve, embed_index, product_index};
use crate::sim::{sample_shots, simulate_states_with, DensityMatrix, GateHook, SimMode};

/// Refuse to run when the total sampling overhead exceeds this.
pub const PEC_GAMMA_GUARD: f64 = 1e6;

/// Calibrated SPL model per noisy two-qubit gate.
pub type SplModels = BTreeMap<GateId, SplModel>;

/// Calibrates every noisy two-qubit gate of the circuit. Sampled
/// calibrations use a seed derived from `seed` and the gate position.
pub fn calibrate_circuit(circuit: &LayeredCircuit, mode: CalibrationMode) -> Result<SplModels> {
    let mut out = SplModels::new();
    for (id, gate) in circuit.gates_with_ids() {
        if gate.qubits.len() != 2 {
            continue;
        }
        if let Some(noise) = &gate.noise {
            let mode = match mode {
                CalibrationMode::Sampled { shots, seed } => CalibrationMode::Sampled {
                    shots,
                    seed: seed ^ ((id.layer as u64) << 32 | id.index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
                },
                exact => exact,
            };
            out.insert(id, spl_calibrate(&noise.channel, mode)?);
        }
    }
    Ok(out)
}

/// Signed weights of the inverse SPL channel
/// `Π_k (ω_k I - (1 - ω_k) P_k) / (2ω_k - 1)` on two local qubits.
pub fn inverse_quasi_weights(model: &SplModel) -> Vec<(usize, f64)> {
    let mut acc: Vec<(usize, f64)> = vec![(0, 1.0)];
    for (k, w) in model.omegas().into_iter().enumerate() {
        if w == 1.0 {
            continue;
        }
        let g = 2.0 * w - 1.0;
        let factor = [(0, w / g), (k + 1, -(1.0 - w) / g)];
        acc = convolve(&acc, &factor).into_iter().collect();
    }
    acc
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PecMode {
    /// Inverse channels applied analytically.
    Exact,
    /// Quasi-probability sampling of random circuit instances.
    #[default]
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PecConfig {
    pub mode: PecMode,
    pub instances: u64,
    /// Shot budget across all instances.
    pub total_shots: u64,
    pub shots_per_instance: u64,
}

impl Default for PecConfig {
    fn default() -> Self {
        Self { mode: PecMode::Sampled, instances: 100, total_shots: 2 * DEFAULT_SHOTS, shots_per_instance: 164 }
    }
}

impl PecConfig {
    pub fn ledger(&self) -> OverheadLedger {
        OverheadLedger::with_total_shots(self.instances, self.shots_per_instance, self.total_shots)
    }
}

fn model_for<'a>(models: &'a SplModels, id: GateId) -> Result<&'a SplModel> {
    models.get(&id).ok_or(CoreError::Uncalibrated { layer: id.layer, index: id.index })
}

fn check_gamma(circuit: &LayeredCircuit, models: &SplModels) -> Result<()> {
    let mut gamma = 1.0;
    for (id, gate) in circuit.gates_with_ids() {
        if gate.qubits.len() == 2 && gate.noise.is_some() {
            gamma *= model_for(models, id)?.gamma();
        }
    }
    if gamma > PEC_GAMMA_GUARD {
        return Err(CoreError::OverheadTooLarge(gamma));
    }
    Ok(())
}

struct ExactInverse<'a> {
    circuit: &'a LayeredCircuit,
    models: &'a SplModels,
}

impl GateHook<f64> for ExactInverse<'_> {
    fn after_gate(&mut self, id: GateId, state: &mut DensityMatrix<f64>) -> Result<()> {
        let gate = &self.circuit.layers[id.layer].gates[id.index];
        if gate.qubits.len() == 2 && gate.noise.is_some() {
            let w: Vec<_> = inverse_quasi_weights(model_for(self.models, id)?)
                .into_iter()
                .map(|(i, x)| (embed_index(i, &gate.qubits), x))
                .collect();
            state.apply_pauli_mixture(&w);
        }
        Ok(())
    }
}

struct SampledInstance<'a> {
    circuit: &'a LayeredCircuit,
    models: &'a SplModels,
    rng: &'a mut ChaCha8Rng,
    sign: f64,
    gamma: f64,
    /// `(sign, gamma)` as of the end of each layer.
    per_layer: Vec<(f64, f64)>,
}

impl GateHook<f64> for SampledInstance<'_> {
    fn after_gate(&mut self, id: GateId, state: &mut DensityMatrix<f64>) -> Result<()> {
        let gate = &self.circuit.layers[id.layer].gates[id.index];
        if gate.qubits.len() == 2 && gate.noise.is_some() {
            let model = model_for(self.models, id)?;
            let mut pauli = 0;
            for (k, w) in model.omegas().into_iter().enumerate() {
                if self.rng.random::<f64>() >= w {
                    pauli = product_index(pauli, k + 1);
                    self.sign = -self.sign;
                }
            }
            self.gamma *= model.gamma();
            if pauli != 0 {
                state.apply_pauli(embed_index(pauli, &gate.qubits));
            }
        }
        self.per_layer[id.layer] = (self.sign, self.gamma);
        Ok(())
    }
}

/// Probabilistic error cancellation of the two-qubit gate noise.
pub fn pec_mitigate(circuit: &LayeredCircuit, models: &SplModels, config: &PecConfig, seed: u64) -> Result<Mitigated> {
    check_gamma(circuit, models)?;
    let obs = &circuit.observable;
    let values = match config.mode {
        PecMode::Exact => {
            let mut hook = ExactInverse { circuit, models };
            simulate_states_with(circuit, SimMode::Noisy, &mut hook)?
                .iter()
                .map(|s| s.expectation(obs))
                .collect()
        }
        PecMode::Sampled => {
            if config.instances == 0 || config.shots_per_instance == 0 {
                return Err(CoreError::InvalidArgument("PEC needs instances and shots".into()));
            }
            let depth = circuit.depth();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut acc = vec![0.0; depth];
            for _ in 0..config.instances {
                let mut hook = SampledInstance {
                    circuit,
                    models,
                    rng: &mut rng,
                    sign: 1.0,
                    gamma: 1.0,
                    per_layer: vec![(1.0, 1.0); depth],
                };
                let states = simulate_states_with(circuit, SimMode::Noisy, &mut hook)?;
                let per_layer = hook.per_layer;
                for (l, s) in states.iter().enumerate() {
                    let y = sample_shots(s.expectation(obs), config.shots_per_instance, &mut rng)?;
                    let (sign, gamma) = per_layer[l];
                    acc[l] += sign * gamma * y;
                }
            }
            acc.into_iter().map(|v| v / config.instances as f64).collect()
        }
    };
    Ok(Mitigated { values, ledger: config.ledger() })
}

/// Calibrates, then mitigates.
#[derive(Clone, Debug)]
pub struct PecMitigator {
    pub config: PecConfig,
    pub calibration: CalibrationMode,
}

impl Default for PecMitigator {
    fn default() -> Self {
        Self { config: PecConfig::default(), calibration: CalibrationMode::Exact }
    }
}

impl Mitigator for PecMitigator {
    fn name(&self) -> &str {
        "pec"
    }

    fn mitigate(&self, circuit: &LayeredCircuit, seed: u64) -> Result<Mitigated> {
        let calibration = match self.calibration {
            CalibrationMode::Sampled { shots, .. } => CalibrationMode::Sampled { shots, seed },
            exact => exact,
        };
        let models = calibrate_circuit(circuit, calibration)?;
        pec_mitigate(circuit, &models, &self.config, seed)
    }
}
