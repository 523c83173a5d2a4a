//! Standard error-mitigation baselines (ZNE, PEC, CDR) and the sampling
//! overhead they cost.

mod cdr;
mod executor;
mod ledger;
mod pec;
mod richardson;
mod spl;
mod zne;

pub use cdr::{
    cdr_mitigate, clifford_distance, replacement_weights, substitute_cliffords, CdrMitigator,
    CliffordSubstitution,
};
pub use executor::{DensityExecutor, ExecMode, Executor, FnExecutor};
pub use ledger::{OverheadLedger, CIRCUIT_COST, DEFAULT_SHOTS};
pub use pec::{
    calibrate_circuit, inverse_quasi_weights, pec_mitigate, PecConfig, PecMitigator, PecMode,
    SplModels, PEC_GAMMA_GUARD,
};
pub use richardson::{richardson_coefficients, RichardsonPlan};
pub use spl::{anticommutation_matrix, spl_calibrate, CalibrationMode, SplModel, SPL_REPETITIONS};
pub use zne::{unfold, zne_mitigate, ZneConfig, ZneMitigator};

use crate::circuit::LayeredCircuit;
use crate::error::Result;

/// Per-layer mitigated values and what they cost.
#[derive(Clone, Debug, PartialEq)]
pub struct Mitigated {
    pub values: Vec<f64>,
    pub ledger: OverheadLedger,
}

/// Uniform entry point: a noisy circuit and a seed in, a mitigated
/// sequence and its ledger out.
pub trait Mitigator: Send + Sync {
    fn name(&self) -> &str;
    fn mitigate(&self, circuit: &LayeredCircuit, seed: u64) -> Result<Mitigated>;
}

/// Unmitigated noisy results at no extra cost.
#[derive(Clone, Debug)]
pub struct NoisyBaseline {
    pub mode: ExecMode,
    pub shots: u64,
}

impl Default for NoisyBaseline {
    fn default() -> Self {
        Self { mode: ExecMode::Sampled, shots: DEFAULT_SHOTS }
    }
}

impl Mitigator for NoisyBaseline {
    fn name(&self) -> &str {
        "noisy"
    }

    fn mitigate(&self, circuit: &LayeredCircuit, seed: u64) -> Result<Mitigated> {
        let values = DensityExecutor::new(self.mode.shots(self.shots), seed).noisy(circuit)?;
        Ok(Mitigated { values, ledger: OverheadLedger::zero() })
    }
}
