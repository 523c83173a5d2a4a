//! Neural surrogate for cumulative circuit noise.
//!
//! [`SurrogateModel`] covers the full model (NNAS) and its two ablations
//! (NEA, NNA); [`train`] fits any of them by MSE; gradients come from the
//! small tape in [`tape`].

pub mod checkpoint;
pub mod error;
pub mod features;
pub mod model;
pub mod tape;
pub mod train;

pub use checkpoint::{config_hash, Checkpoint, CHECKPOINT_VERSION};
pub use error::{Result, SurrogateError};
pub use features::{
    survival_products, EmbeddedFeatures, FeatureSchema, FeatureValue, SequenceInput, TrainingExample, Variable,
    VariableForm,
};
pub use model::{
    ablation_nea, ablation_nna, accumulate, embed_features, extract, mitigate_sequence, softmax_scores, Extraction,
    Mitigation, ModelKind, Prediction, SurrogateModel, Tensor, DEFAULT_HIDDEN_DIM, DENOMINATOR_FLOOR,
};
pub use train::{evaluate_loss, train, train_new, Optimizer, TrainingConfig};
