use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SurrogateError};
use crate::features::{FeatureSchema, TrainingExample};
use crate::model::{ModelKind, SurrogateModel};

/// Epoch losses above this abort training.
pub const DIVERGENCE_LOSS: f64 = 1e3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    GradientDescent,
    Adam,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub optimizer: Optimizer,
    /// Global gradient-norm clip; `None` disables it.
    pub clip_norm: Option<f64>,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self { learning_rate: 1e-3, epochs: 200, batch_size: 16, seed: 0, optimizer: Optimizer::Adam, clip_norm: Some(5.0) }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(SurrogateError::InvalidConfig(format!("learning rate {}", self.learning_rate)));
        }
        if self.epochs == 0 {
            return Err(SurrogateError::InvalidConfig("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(SurrogateError::InvalidConfig("batch size must be at least 1".into()));
        }
        if matches!(self.clip_norm, Some(c) if !(c > 0.0)) {
            return Err(SurrogateError::InvalidConfig("clip norm must be positive".into()));
        }
        Ok(())
    }
}

struct Adam {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: i32,
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

impl Adam {
    fn new(model: &SurrogateModel) -> Self {
        let z: Vec<Vec<f64>> = model.params().iter().map(|t| vec![0.0; t.len()]).collect();
        Self { m: z.clone(), v: z, t: 0 }
    }

    fn step(&mut self, model: &mut SurrogateModel, lr: f64) {
        self.t += 1;
        let c1 = 1.0 - BETA1.powi(self.t);
        let c2 = 1.0 - BETA2.powi(self.t);
        for (k, p) in model.params_mut().iter_mut().enumerate() {
            for i in 0..p.values.len() {
                let g = p.gradient[i];
                self.m[k][i] = BETA1 * self.m[k][i] + (1.0 - BETA1) * g;
                self.v[k][i] = BETA2 * self.v[k][i] + (1.0 - BETA2) * g * g;
                let mh = self.m[k][i] / c1;
                let vh = self.v[k][i] / c2;
                p.values[i] -= lr * mh / (vh.sqrt() + ADAM_EPS);
            }
        }
    }
}

fn clip(model: &mut SurrogateModel, max_norm: f64) {
    let norm = model.params().iter().flat_map(|t| t.gradient.iter()).map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm {
        let k = max_norm / norm;
        for t in model.params_mut() {
            t.gradient.iter_mut().for_each(|g| *g *= k);
        }
    }
}

/// Minimizes the mean over sequences of the per-sequence MSE. Returns the
/// loss curve: entry `e` is the mean loss seen during epoch `e`.
pub fn train(model: &mut SurrogateModel, data: &[TrainingExample], config: &TrainingConfig) -> Result<Vec<f64>> {
    config.validate()?;
    if data.is_empty() {
        return Err(SurrogateError::EmptyDataset);
    }
    for ex in data {
        ex.input.validate(&model.schema)?;
        if ex.target.len() != ex.input.len() {
            return Err(SurrogateError::LengthMismatch(format!(
                "{} targets for {} layers",
                ex.target.len(),
                ex.input.len()
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut adam = Adam::new(model);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut curve = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(config.batch_size) {
            model.zero_grad();
            let w = 1.0 / batch.len() as f64;
            for &i in batch {
                total += model.accumulate_gradient(&data[i].input, &data[i].target, w)?;
            }
            if let Some(c) = config.clip_norm {
                clip(model, c);
            }
            match config.optimizer {
                Optimizer::Adam => adam.step(model, config.learning_rate),
                Optimizer::GradientDescent => {
                    for p in model.params_mut() {
                        for (v, g) in p.values.iter_mut().zip(&p.gradient) {
                            *v -= config.learning_rate * g;
                        }
                    }
                }
            }
        }
        let loss = total / data.len() as f64;
        log::debug!("epoch {epoch}: loss {loss:.3e}");
        if !loss.is_finite() || loss > DIVERGENCE_LOSS || !model.is_finite() {
            return Err(SurrogateError::Diverged { epoch, loss });
        }
        curve.push(loss);
    }
    Ok(curve)
}

/// Fresh model seeded from `config.seed`, then trained.
pub fn train_new(
    kind: ModelKind,
    schema: FeatureSchema,
    hidden_dim: usize,
    data: &[TrainingExample],
    config: &TrainingConfig,
) -> Result<(SurrogateModel, Vec<f64>)> {
    let mut model = SurrogateModel::new(kind, schema, hidden_dim, config.seed);
    let curve = train(&mut model, data, config)?;
    Ok((model, curve))
}

/// Mean per-sequence MSE.
pub fn evaluate_loss(model: &SurrogateModel, data: &[TrainingExample]) -> Result<f64> {
    if data.is_empty() {
        return Err(SurrogateError::EmptyDataset);
    }
    let mut total = 0.0;
    for ex in data {
        total += model.loss(&ex.input, &ex.target)?;
    }
    Ok(total / data.len() as f64)
}
