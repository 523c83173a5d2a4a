use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::LayeredCircuit;
use crate::error::Result;
use crate::sim::{sample_shots, simulate, SimMode};

/// Runs circuits for a mitigation method and reports per-layer
/// expectation values.
pub trait Executor {
    /// Expectations under the noise attached to the circuit.
    fn noisy(&mut self, circuit: &LayeredCircuit) -> Result<Vec<f64>>;
    /// Exact noiseless expectations (classical simulation).
    fn ideal(&mut self, circuit: &LayeredCircuit) -> Result<Vec<f64>>;
}

/// Whether noisy expectations are exact or estimated from shots.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecMode {
    Exact,
    #[default]
    Sampled,
}

impl ExecMode {
    pub fn shots(self, shots: u64) -> Option<u64> {
        match self {
            ExecMode::Exact => None,
            ExecMode::Sampled => Some(shots),
        }
    }
}

/// Density-matrix simulation, optionally shot-sampled.
pub struct DensityExecutor {
    shots: Option<u64>,
    rng: ChaCha8Rng,
}

impl DensityExecutor {
    pub fn new(shots: Option<u64>, seed: u64) -> Self {
        Self { shots, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn exact() -> Self {
        Self::new(None, 0)
    }
}

impl Executor for DensityExecutor {
    fn noisy(&mut self, circuit: &LayeredCircuit) -> Result<Vec<f64>> {
        let exact = simulate::<f64>(circuit, SimMode::Noisy)?;
        match self.shots {
            None => Ok(exact),
            Some(s) => exact.into_iter().map(|e| sample_shots(e, s, &mut self.rng)).collect(),
        }
    }

    fn ideal(&mut self, circuit: &LayeredCircuit) -> Result<Vec<f64>> {
        simulate::<f64>(circuit, SimMode::Noiseless)
    }
}

/// Executor backed by closures, for synthetic noise models.
pub struct FnExecutor<N, I> {
    pub noisy: N,
    pub ideal: I,
}

impl<N, I> Executor for FnExecutor<N, I>
where
    N: FnMut(&LayeredCircuit) -> Result<Vec<f64>>,
    I: FnMut(&LayeredCircuit) -> Result<Vec<f64>>,
{
    fn noisy(&mut self, circuit: &LayeredCircuit) -> Result<Vec<f64>> {
        (self.noisy)(circuit)
    }

    fn ideal(&mut self, circuit: &LayeredCircuit) -> Result<Vec<f64>> {
        (self.ideal)(circuit)
    }
}
