//! Gate noise from decoherence times: the Pauli-twirled amplitude/phase
//! damping rates for one qubit and the uncorrelated two-qubit table.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{GateId, LayeredCircuit};
use crate::error::{CoreError, Result};
use crate::pauli::PauliChannel;

/// Reference coherence times (µs) the noise levels are scaled from.
pub const BASELINE_T1_US: f64 = 23.2357;
pub const BASELINE_T2_US: f64 = 15.6;
/// T1 grid (µs) of the standard noise levels.
pub const T1_GRID_US: [f64; 4] = [20.0, BASELINE_T1_US, 30.0, 40.0];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoherenceSpec {
    #[serde(rename = "t1_us")]
    pub t1: f64,
    #[serde(rename = "t2_us")]
    pub t2: f64,
    /// Single-qubit gate time (ns).
    #[serde(rename = "t1q_ns", default = "default_t1q")]
    pub single_gate_time: f64,
    /// Two-qubit gate time (ns).
    #[serde(rename = "t2q_ns", default = "default_t2q")]
    pub two_gate_time: f64,
    /// Half-width of the uniform jitter added to every Pauli probability.
    #[serde(default = "default_fluctuation")]
    pub fluctuation: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_t1q() -> f64 {
    18.0
}
fn default_t2q() -> f64 {
    48.0
}
fn default_fluctuation() -> f64 {
    2e-5
}

impl Default for DecoherenceSpec {
    fn default() -> Self {
        Self {
            t1: BASELINE_T1_US,
            t2: BASELINE_T2_US,
            single_gate_time: default_t1q(),
            two_gate_time: default_t2q(),
            fluctuation: default_fluctuation(),
            seed: 0,
        }
    }
}

impl DecoherenceSpec {
    pub fn new(t1: f64, t2: f64) -> Result<Self> {
        let spec = Self { t1, t2, ..Self::default() };
        spec.validate()?;
        Ok(spec)
    }

    /// Noise level with the given T1, keeping the baseline T2/T1 ratio.
    pub fn scaled(t1: f64) -> Result<Self> {
        Self::new(t1, t1 * BASELINE_T2_US / BASELINE_T1_US)
    }

    /// No decoherence at all.
    pub fn noiseless() -> Self {
        Self { t1: f64::INFINITY, t2: f64::INFINITY, fluctuation: 0.0, ..Self::default() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_fluctuation(mut self, fluctuation: f64) -> Self {
        self.fluctuation = fluctuation;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(CoreError::InvalidDecoherence(m.to_string()));
        if !(self.t1 > 0.0) || !(self.t2 > 0.0) {
            return bad("T1 and T2 must be positive");
        }
        if self.t1.is_finite() && self.t2 > 2.0 * self.t1 {
            return bad("T2 must not exceed 2 T1");
        }
        if !(self.single_gate_time > 0.0) || !(self.two_gate_time > 0.0) {
            return bad("gate times must be positive");
        }
        if !(self.fluctuation >= 0.0) {
            return bad("fluctuation must be nonnegative");
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.t1.is_infinite() && self.t2.is_infinite()
    }
}

/// Pauli rates `(p_X, p_Y, p_Z)` of one qubit idling for `t_ns`.
pub fn single_qubit_rates(spec: &DecoherenceSpec, t_ns: f64) -> Result<(f64, f64, f64)> {
    if !(t_ns > 0.0) {
        return Err(CoreError::InvalidArgument(format!("gate time {t_ns} must be positive")));
    }
    // times are in µs, gate time in ns
    let decay1 = -(-t_ns / (spec.t1 * 1e3)).exp_m1();
    let decay2 = -(-t_ns / (spec.t2 * 1e3)).exp_m1();
    let px = decay1 / 4.0;
    let pz = decay2 / 2.0 - decay1 / 4.0;
    if pz < -1e-15 {
        return Err(CoreError::InvalidDecoherence(format!(
            "negative p_Z = {pz:e}; T2 exceeds 2 T1"
        )));
    }
    Ok((px, px, pz.max(0.0)))
}

/// Single-qubit channel at the single-qubit gate time.
pub fn single_qubit_channel(spec: &DecoherenceSpec) -> Result<PauliChannel<f64>> {
    let (px, py, pz) = single_qubit_rates(spec, spec.single_gate_time)?;
    PauliChannel::single_qubit(px, py, pz)
}

/// Two-qubit channel under the uncorrelated-error table, evaluated with
/// the per-qubit rates at the two-qubit gate time.
pub fn two_qubit_channel(spec: &DecoherenceSpec) -> Result<PauliChannel<f64>> {
    let (px, py, pz) = single_qubit_rates(spec, spec.two_gate_time)?;
    let keep = 1.0 - px - py - pz;
    // digit order I=0, X=1, Y=2, Z=3; index = low + 4 * high
    let idx = |a: usize, b: usize| a + 4 * b;
    let errors = [
        (idx(0, 1), px * keep),
        (idx(1, 0), px * keep),
        (idx(0, 2), px * keep),
        (idx(2, 0), px * keep),
        (idx(1, 1), px * py),
        (idx(1, 2), px * py),
        (idx(2, 2), px * py),
        (idx(2, 1), px * py),
        (idx(1, 3), px * pz),
        (idx(3, 1), px * pz),
        (idx(2, 3), px * pz),
        (idx(3, 2), px * pz),
        (idx(0, 3), pz * keep),
        (idx(3, 0), pz * keep),
        (idx(3, 3), pz * pz),
    ];
    PauliChannel::from_errors(2, errors)
}

/// Noise bound to one gate of a circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateNoise {
    pub gate_id: GateId,
    pub channel: PauliChannel<f64>,
    /// Effectiveness factor `1 - δ_0`.
    pub p: f64,
}

impl GateNoise {
    pub fn new(gate_id: GateId, channel: PauliChannel<f64>) -> Self {
        let p = channel.error_probability();
        Self { gate_id, channel, p }
    }
}

/// Perturbs every non-identity weight by a uniform draw in `[-f, f]`,
/// clamps at zero and puts the remainder back on the identity.
fn jitter(base: &PauliChannel<f64>, f: f64, rng: &mut ChaCha8Rng) -> PauliChannel<f64> {
    if f == 0.0 {
        return base.clone();
    }
    let dim = 1usize << (2 * base.qubits());
    let errors: Vec<_> = (1..dim)
        .map(|i| {
            let d = base.coefficient(i) + rng.random_range(-f..=f);
            (i, d.max(0.0))
        })
        .collect();
    PauliChannel::from_errors(base.qubits(), errors).expect("jittered weights stay normalized")
}

/// Attaches a channel to every gate (noise acts right after its gate).
/// Deterministic in `spec.seed`.
pub fn attach_noise(circuit: &LayeredCircuit, spec: &DecoherenceSpec) -> Result<LayeredCircuit> {
    spec.validate()?;
    let one = single_qubit_channel(spec)?;
    let two = two_qubit_channel(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = circuit.clone();
    for (l, layer) in out.layers.iter_mut().enumerate() {
        for (g, gate) in layer.gates.iter_mut().enumerate() {
            let base = match gate.qubits.len() {
                1 => &one,
                2 => &two,
                k => {
                    return Err(CoreError::InvalidCircuit(format!("{k}-qubit gate cannot carry noise")))
                }
            };
            let channel = jitter(base, spec.fluctuation, &mut rng);
            gate.noise = Some(GateNoise::new(GateId { layer: l, index: g }, channel));
        }
    }
    Ok(out)
}
