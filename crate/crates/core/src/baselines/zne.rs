use serde::{Deserialize, Serialize};

use super::{DensityExecutor, ExecMode, Executor, Mitigated, Mitigator, OverheadLedger, DEFAULT_SHOTS};
use super::richardson::richardson_coefficients;
use crate::circuit::{Gate, GateId, GateKind, LayeredCircuit};
use crate::error::{CoreError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ZneConfig {
    /// Odd unfolding factors `2m + 1` applied to two-qubit gates.
    pub factors: Vec<u32>,
    pub shots: u64,
}

impl Default for ZneConfig {
    fn default() -> Self {
        Self { factors: vec![1, 3], shots: DEFAULT_SHOTS }
    }
}

fn inverse_gate(g: &Gate) -> Gate {
    let mut inv = g.clone();
    if g.kind != GateKind::CNOT && g.kind != GateKind::H {
        inv.angle = -g.angle;
    }
    inv
}

/// Replaces each two-qubit gate `G` by `G (G^dagger G)^m`; every copy keeps
/// the original gate's noise. Layer structure is unchanged.
pub fn unfold(circuit: &LayeredCircuit, factor: u32) -> Result<LayeredCircuit> {
    if factor % 2 == 0 {
        return Err(CoreError::InvalidArgument(format!("unfolding factor {factor} is not odd")));
    }
    let m = (factor / 2) as usize;
    let mut out = circuit.clone();
    for (l, layer) in out.layers.iter_mut().enumerate() {
        let mut gates = Vec::with_capacity(layer.gates.len());
        for g in &layer.gates {
            gates.push(g.clone());
            if g.qubits.len() == 2 {
                for _ in 0..m {
                    gates.push(inverse_gate(g));
                    gates.push(g.clone());
                }
            }
        }
        for (i, g) in gates.iter_mut().enumerate() {
            if let Some(n) = g.noise.as_mut() {
                n.gate_id = GateId { layer: l, index: i };
            }
        }
        layer.gates = gates;
    }
    Ok(out)
}

/// Richardson extrapolation of per-layer expectations to zero noise.
pub fn zne_mitigate(circuit: &LayeredCircuit, config: &ZneConfig, exec: &mut impl Executor) -> Result<Mitigated> {
    let scales: Vec<f64> = config.factors.iter().map(|&f| f as f64).collect();
    let plan = richardson_coefficients(&scales)?;
    let mut values = vec![0.0; circuit.depth()];
    for (&factor, &gamma) in config.factors.iter().zip(&plan.coefficients) {
        let y = exec.noisy(&unfold(circuit, factor)?)?;
        for (v, yi) in values.iter_mut().zip(y) {
            *v += gamma * yi;
        }
    }
    Ok(Mitigated { values, ledger: OverheadLedger::new(config.factors.len() as u64, config.shots) })
}

#[derive(Clone, Debug, Default)]
pub struct ZneMitigator {
    pub config: ZneConfig,
    pub mode: ExecMode,
}

impl Mitigator for ZneMitigator {
    fn name(&self) -> &str {
        "zne"
    }

    fn mitigate(&self, circuit: &LayeredCircuit, seed: u64) -> Result<Mitigated> {
        let mut exec = DensityExecutor::new(self.mode.shots(self.config.shots), seed);
        zne_mitigate(circuit, &self.config, &mut exec)
    }
}
