use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Trotter,
    Ghz,
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Task::Trotter => "trotter",
            Task::Ghz => "ghz",
        })
    }
}

impl std::str::FromStr for Task {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "trotter" => Ok(Task::Trotter),
            "ghz" => Ok(Task::Ghz),
            _ => Err(HarnessError::Config(format!("unknown task `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircuitParams {
    Trotter { h_dt: f64, j_over_h: f64 },
    Ghz { theta: f64 },
}

/// One training/test sequence: per-layer noisy and exact expectations and
/// the layer effectiveness factors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceRecord {
    pub id: usize,
    pub task: Task,
    pub params: CircuitParams,
    /// Qubits of the (largest) circuit.
    pub n: usize,
    pub length: usize,
    pub noisy: Vec<f64>,
    pub noiseless: Vec<f64>,
    pub p_hats: Vec<f64>,
    pub seed: u64,
}

impl SequenceRecord {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Data(format!("record {}: {m}", self.id)));
        if [self.noisy.len(), self.noiseless.len(), self.p_hats.len()].iter().any(|&l| l != self.length) {
            return bad("array lengths differ from `length`".into());
        }
        if self.length == 0 {
            return bad("empty sequence".into());
        }
        if let Some(v) = self.noisy.iter().chain(&self.noiseless).find(|v| !(v.abs() <= 1.0)) {
            return bad(format!("expectation {v} outside [-1, 1]"));
        }
        if let Some(p) = self.p_hats.iter().find(|p| !(**p >= 0.0 && **p < 1.0)) {
            return bad(format!("effectiveness factor {p} outside [0, 1)"));
        }
        match (self.task, self.params) {
            (Task::Trotter, CircuitParams::Trotter { .. }) | (Task::Ghz, CircuitParams::Ghz { .. }) => Ok(()),
            _ => bad("parameters do not match the task".into()),
        }
    }

    /// `θ` of a GHZ record.
    pub fn theta(&self) -> Option<f64> {
        match self.params {
            CircuitParams::Ghz { theta } => Some(theta),
            CircuitParams::Trotter { .. } => None,
        }
    }
}
