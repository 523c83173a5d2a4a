//! Versioned JSON checkpoints: flat parameter arrays with shapes and a hash
//! of the architecture they belong to.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, SurrogateError};
use crate::features::FeatureSchema;
use crate::model::{ModelKind, SurrogateModel};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoredTensor {
    pub name: String,
    pub shape: [usize; 2],
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub kind: ModelKind,
    pub hidden_dim: usize,
    pub schema: FeatureSchema,
    pub config_hash: String,
    pub params: Vec<StoredTensor>,
}

#[derive(Serialize)]
struct Architecture<'a> {
    kind: ModelKind,
    hidden_dim: usize,
    schema: &'a FeatureSchema,
}

/// SHA-256 of the architecture description, hex encoded.
pub fn config_hash(kind: ModelKind, hidden_dim: usize, schema: &FeatureSchema) -> String {
    let json = serde_json::to_vec(&Architecture { kind, hidden_dim, schema }).expect("architecture serializes");
    hex::encode(Sha256::digest(&json))
}

impl SurrogateModel {
    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            kind: self.kind,
            hidden_dim: self.hidden_dim,
            schema: self.schema.clone(),
            config_hash: config_hash(self.kind, self.hidden_dim, &self.schema),
            params: self
                .params()
                .iter()
                .map(|t| StoredTensor { name: t.name.clone(), shape: [t.shape.0, t.shape.1], values: t.values.clone() })
                .collect(),
        }
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        if ck.version != CHECKPOINT_VERSION {
            return Err(SurrogateError::Checkpoint(format!("unsupported version {}", ck.version)));
        }
        if ck.hidden_dim == 0 {
            return Err(SurrogateError::Checkpoint("hidden dimension 0".into()));
        }
        if config_hash(ck.kind, ck.hidden_dim, &ck.schema) != ck.config_hash {
            return Err(SurrogateError::Checkpoint("config hash does not match the architecture".into()));
        }
        let mut model = SurrogateModel::zeroed(ck.kind, ck.schema.clone(), ck.hidden_dim);
        if model.params().len() != ck.params.len() {
            return Err(SurrogateError::Checkpoint(format!(
                "{} parameter blocks, architecture has {}",
                ck.params.len(),
                model.params().len()
            )));
        }
        for (t, s) in model.params_mut().iter_mut().zip(&ck.params) {
            if t.name != s.name || [t.shape.0, t.shape.1] != s.shape || s.values.len() != t.len() {
                return Err(SurrogateError::Checkpoint(format!("block `{}` does not match `{}`", s.name, t.name)));
            }
            if s.values.iter().any(|v| !v.is_finite()) {
                return Err(SurrogateError::Checkpoint(format!("block `{}` has non-finite values", s.name)));
            }
            t.values.copy_from_slice(&s.values);
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(&self.to_checkpoint())?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        Self::from_checkpoint(&ck)
    }
}
