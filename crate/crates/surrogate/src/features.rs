//! Circuit/noise descriptors and their embedding into a variables x layers
//! matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SurrogateError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariableForm {
    /// Integer-valued code, scaled by a learned factor.
    SingleDiscrete,
    /// Real parameter, passed through a learned affine scalar map.
    SingleContinuous,
    /// Fixed-length code vector (e.g. an observable's per-qubit Pauli labels).
    MultiDiscrete { len: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub form: VariableForm,
}

impl Variable {
    pub fn new(name: &str, form: VariableForm) -> Self {
        Self { name: name.to_string(), form }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub variables: Vec<Variable>,
    /// Append the raw noisy expectation as an extra row.
    pub include_noisy: bool,
    /// Longest sequence the embeddings cover.
    pub max_layers: usize,
}

/// Observable codes are padded to this many qubits.
pub const OBSERVABLE_CODE_LEN: usize = 6;

impl FeatureSchema {
    /// Row count `M` of the embedded matrix.
    pub fn rows(&self) -> usize {
        self.variables.len() + usize::from(self.include_noisy)
    }

    /// Qubit count, circuit code, noise code, 1q/2q error rates (percent),
    /// `h dt`, `J/h` and the observable code.
    pub fn trotter(max_layers: usize) -> Self {
        use VariableForm::*;
        Self {
            variables: vec![
                Variable::new("qubits", SingleDiscrete),
                Variable::new("circuit", SingleDiscrete),
                Variable::new("noise", SingleDiscrete),
                Variable::new("error_1q", SingleContinuous),
                Variable::new("error_2q", SingleContinuous),
                Variable::new("h_dt", SingleContinuous),
                Variable::new("j_over_h", SingleContinuous),
                Variable::new("observable", MultiDiscrete { len: OBSERVABLE_CODE_LEN }),
            ],
            include_noisy: true,
            max_layers,
        }
    }

    /// As [`FeatureSchema::trotter`] with the rotation angle as the only
    /// circuit parameter.
    pub fn ghz(max_layers: usize) -> Self {
        use VariableForm::*;
        Self {
            variables: vec![
                Variable::new("qubits", SingleDiscrete),
                Variable::new("circuit", SingleDiscrete),
                Variable::new("noise", SingleDiscrete),
                Variable::new("error_1q", SingleContinuous),
                Variable::new("error_2q", SingleContinuous),
                Variable::new("theta", SingleContinuous),
                Variable::new("observable", MultiDiscrete { len: OBSERVABLE_CODE_LEN }),
            ],
            include_noisy: true,
            max_layers,
        }
    }

    /// Checks values against the declared forms.
    pub fn check(&self, values: &[FeatureValue]) -> Result<()> {
        if values.len() != self.variables.len() {
            return Err(SurrogateError::FeatureCount { expected: self.variables.len(), got: values.len() });
        }
        for (var, val) in self.variables.iter().zip(values) {
            let ok = match (var.form, val) {
                (VariableForm::SingleDiscrete | VariableForm::SingleContinuous, FeatureValue::Scalar(x)) => x.is_finite(),
                (VariableForm::MultiDiscrete { len }, FeatureValue::Codes(c)) => {
                    c.len() == len && c.iter().all(|x| x.is_finite())
                }
                _ => false,
            };
            if !ok {
                return Err(SurrogateError::UndeclaredForm { name: var.name.clone() });
            }
        }
        Ok(())
    }

    pub fn check_length(&self, len: usize) -> Result<()> {
        if len == 0 || len > self.max_layers {
            return Err(SurrogateError::SequenceLength { len, max: self.max_layers });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FeatureValue {
    Scalar(f64),
    Codes(Vec<f64>),
}

/// `M x L` matrix stored row-major by variable.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddedFeatures {
    pub matrix: Vec<Vec<f64>>,
    pub includes_noisy: bool,
}

impl EmbeddedFeatures {
    pub fn rows(&self) -> usize {
        self.matrix.len()
    }

    pub fn layers(&self) -> usize {
        self.matrix.first().map_or(0, Vec::len)
    }

    /// Column `l`, the input of layer `l` of the accumulator.
    pub fn column(&self, l: usize) -> Vec<f64> {
        self.matrix.iter().map(|row| row[l]).collect()
    }

    /// Layer order reversed.
    pub fn reversed(&self) -> Self {
        let matrix = self.matrix.iter().map(|r| r.iter().rev().copied().collect()).collect();
        Self { matrix, includes_noisy: self.includes_noisy }
    }
}

/// One sequence as the models consume it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceInput {
    pub features: Vec<FeatureValue>,
    pub noisy: Vec<f64>,
    pub p_hats: Vec<f64>,
}

impl SequenceInput {
    pub fn len(&self) -> usize {
        self.noisy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.noisy.is_empty()
    }

    pub fn validate(&self, schema: &FeatureSchema) -> Result<()> {
        schema.check(&self.features)?;
        schema.check_length(self.len())?;
        if self.p_hats.len() != self.len() {
            return Err(SurrogateError::LengthMismatch(format!(
                "{} noisy values, {} effectiveness factors",
                self.len(),
                self.p_hats.len()
            )));
        }
        Ok(())
    }

    /// `Π_{j<=l} (1 - p_j)` for every layer.
    pub fn survival(&self) -> Vec<f64> {
        survival_products(&self.p_hats)
    }
}

pub fn survival_products(p_hats: &[f64]) -> Vec<f64> {
    p_hats
        .iter()
        .scan(1.0, |acc, p| {
            *acc *= 1.0 - p;
            Some(*acc)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub input: SequenceInput,
    pub target: Vec<f64>,
}
