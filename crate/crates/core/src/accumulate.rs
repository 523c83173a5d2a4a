//! Cumulative-noise bookkeeping in PTM form.
//!
//! Each noisy layer `ũ_l = E_l u_l` is split as `E_l = (1 - p_l) I + p_l Λ_l`
//! with `p_l` from the per-gate factors. The recursion
//!
//! ```text
//! N_l = (1 - p_l) N_{l-1} + p_l s_{l-1} a_l + p_l a_l N_{l-1},   a_l = U_l^-1 Λ_l U_l
//! ```
//!
//! gives `ρ̃_l = s_l ρ_l + (U_l N_l U_l^-1)(ρ_l)`, with `U_l` the cumulative
//! ideal circuit and `s_l = Π (1 - p_j)`.

use crate::circuit::LayeredCircuit;
use crate::error::{CoreError, Result};
use crate::pauli::{effectiveness_of_layer, PauliAction, PauliString, Ptm, DENSE_PTM_CAP};
use crate::scalar::{lit, Scalar};
use crate::sim::{convert_channel, DensityMatrix};

/// Below this `|y_l|` the impact factor `r_l` is reported as degenerate.
pub const DEGENERATE_EXPECTATION: f64 = 1e-9;

/// One layer split into its ideal PTM and relocated noise.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerDecomposition<T: Scalar> {
    /// PTM of the noiseless layer `u_l`.
    pub ideal: Ptm<T>,
    /// Layer noise moved to the end of the layer: `ũ_l u_l^-1`.
    pub noise: Ptm<T>,
    pub p: T,
    /// `Λ_l`; the identity when `p = 0`.
    pub effective: Ptm<T>,
    pub gate_factors: Vec<T>,
}

/// `ũ_l` and `u_l` built gate by gate. Gates without attached noise count
/// as noiseless.
pub fn decompose_layer<T: Scalar>(circuit: &LayeredCircuit, layer: usize, cap: usize) -> Result<LayerDecomposition<T>> {
    let n = circuit.qubits;
    if n > cap {
        return Err(CoreError::QubitCapExceeded { what: "cumulative-noise PTM", cap, got: n });
    }
    let gates = &circuit
        .layers
        .get(layer)
        .ok_or_else(|| CoreError::InvalidArgument(format!("layer {layer} out of range")))?
        .gates;
    let mut ideal = Ptm::<T>::identity(n);
    let mut noisy = Ptm::<T>::identity(n);
    let mut factors = Vec::with_capacity(gates.len());
    for gate in gates {
        let g = Ptm::from_unitary(&gate.full_unitary::<T>(n))?;
        ideal = g.compose(&ideal)?;
        noisy = g.compose(&noisy)?;
        match &gate.noise {
            Some(noise) => {
                let ch = convert_channel::<T>(&noise.channel).embed(n, &gate.qubits)?;
                noisy = Ptm::from_pauli_channel_capped(&ch, cap)?.compose(&noisy)?;
                factors.push(lit::<T>(noise.p));
            }
            None => factors.push(T::zero()),
        }
    }
    let noise = noisy.compose(&ideal.inverse()?)?;
    let p = effectiveness_of_layer(&factors)?;
    let effective = if p > T::zero() {
        noise.sub(&Ptm::identity(n).scale(T::one() - p))?.scale(T::one() / p)
    } else {
        Ptm::identity(n)
    };
    Ok(LayerDecomposition { ideal, noise, p, effective, gate_factors: factors })
}

/// Per-layer effectiveness factors from the attached gate noise only; no
/// PTMs are built, so any register size works.
pub fn layer_effectiveness_factors(circuit: &LayeredCircuit) -> Result<Vec<f64>> {
    (0..circuit.depth())
        .map(|l| effectiveness_of_layer(&circuit.layer_factors(l)))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CumulativeNoiseState<T: Scalar> {
    pub layer: usize,
    /// `U_l`.
    pub circuit_ptm: Ptm<T>,
    /// `N_l`.
    pub noise_ptm: Ptm<T>,
    /// `s_l = Π_{j<=l} (1 - p_j)`.
    pub survival: T,
}

impl<T: Scalar> CumulativeNoiseState<T> {
    pub fn initial(qubits: usize) -> Self {
        Self {
            layer: 0,
            circuit_ptm: Ptm::identity(qubits),
            noise_ptm: Ptm::zeros(qubits),
            survival: T::one(),
        }
    }
}

/// One step of the recursion.
pub fn accumulate_noise<T: Scalar>(
    state: &CumulativeNoiseState<T>,
    layer: &LayerDecomposition<T>,
) -> Result<CumulativeNoiseState<T>> {
    let p = layer.p;
    if !(p >= T::zero() && p <= T::one()) {
        return Err(CoreError::ProbabilityOutOfRange(p.to_f64()));
    }
    let circuit_ptm = layer.ideal.compose(&state.circuit_ptm)?;
    let a = Ptm::conjugate(&circuit_ptm.inverse()?, &layer.effective)?;
    let noise_ptm = state
        .noise_ptm
        .scale(T::one() - p)
        .add(&a.scale(p * state.survival))?
        .add(&a.compose(&state.noise_ptm)?.scale(p))?;
    Ok(CumulativeNoiseState {
        layer: state.layer + 1,
        circuit_ptm,
        noise_ptm,
        survival: state.survival * (T::one() - p),
    })
}

/// All layer decompositions of a circuit.
pub fn decompose_circuit<T: Scalar>(circuit: &LayeredCircuit, cap: usize) -> Result<Vec<LayerDecomposition<T>>> {
    (0..circuit.depth()).map(|l| decompose_layer(circuit, l, cap)).collect()
}

/// States after every layer, `N_1 .. N_L`.
pub fn accumulate_circuit<T: Scalar>(circuit: &LayeredCircuit) -> Result<Vec<CumulativeNoiseState<T>>> {
    let layers = decompose_circuit::<T>(circuit, DENSE_PTM_CAP)?;
    let mut state = CumulativeNoiseState::initial(circuit.qubits);
    let mut out = Vec::with_capacity(layers.len());
    for layer in &layers {
        state = accumulate_noise(&state, layer)?;
        out.push(state.clone());
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseEnvelope<T: Scalar> {
    /// `R_l = U_l N_l U_l^-1`.
    pub envelope: Ptm<T>,
    /// `y_l = Tr[O ρ_l]`.
    pub expectation: T,
    /// `Tr[O R_l(ρ_l)]`.
    pub contribution: T,
    /// `r_l = contribution / y_l`, or zero when degenerate.
    pub impact: T,
    pub degenerate: bool,
}

impl<T: Scalar> NoiseEnvelope<T> {
    /// `s_l y_l + Tr[O R_l(ρ_l)]`, the noisy expectation implied by the
    /// decomposition.
    pub fn noisy_expectation(&self, survival: T) -> T {
        survival * self.expectation + self.contribution
    }
}

/// Envelope and impact factor given the noiseless state `ρ_l`.
pub fn noise_envelope<T: Scalar>(
    state: &CumulativeNoiseState<T>,
    rho: &DensityMatrix<T>,
    observable: &PauliString,
) -> Result<NoiseEnvelope<T>> {
    let envelope = Ptm::conjugate(&state.circuit_ptm, &state.noise_ptm)?;
    let action = PauliAction::from_string(observable);
    let expectation = action.trace_with(rho.matrix()).re;
    let contribution = action.trace_with(&envelope.apply(rho.matrix())?).re;
    let degenerate = expectation.abs() < lit(DEGENERATE_EXPECTATION);
    let impact = if degenerate { T::zero() } else { contribution / expectation };
    Ok(NoiseEnvelope { envelope, expectation, contribution, impact, degenerate })
}
