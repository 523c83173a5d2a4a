use serde::{Deserialize, Serialize};

/// Fixed per-circuit cost in shot units.
pub const CIRCUIT_COST: u64 = 1000;
pub const DEFAULT_SHOTS: u64 = 8192;

/// Sampling overhead `T = N_c * 1000 + total shots`.
///
/// `total_shots` is kept separately from `shots_per_instance` because PEC
/// spreads a fixed shot budget over its instances, which does not divide
/// evenly. For every other method `total_shots = N_c * N_s`, which gives
/// `T = N_c (1000 + N_s)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverheadLedger {
    pub circuit_instances: u64,
    pub shots_per_instance: u64,
    pub total_shots: u64,
}

impl OverheadLedger {
    pub fn new(circuit_instances: u64, shots_per_instance: u64) -> Self {
        Self { circuit_instances, shots_per_instance, total_shots: circuit_instances * shots_per_instance }
    }

    pub fn with_total_shots(circuit_instances: u64, shots_per_instance: u64, total_shots: u64) -> Self {
        Self { circuit_instances, shots_per_instance, total_shots }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// One circuit at the default shot count; what a learned mitigator
    /// needs at inference time.
    pub fn single_circuit() -> Self {
        Self::new(1, DEFAULT_SHOTS)
    }

    pub fn total(&self) -> u64 {
        self.circuit_instances * CIRCUIT_COST + self.total_shots
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn totals() {
        assert_eq!(OverheadLedger::new(2, 8192).total(), 18384);
        assert_eq!(OverheadLedger::new(11, 8192).total(), 101112);
        assert_eq!(OverheadLedger::with_total_shots(100, 164, 16384).total(), 116384);
        assert_eq!(OverheadLedger::single_circuit().total(), 9192);
        assert_eq!(OverheadLedger::zero().total(), 0);
    }
}
