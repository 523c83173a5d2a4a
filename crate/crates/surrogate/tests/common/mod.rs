#![allow(dead_code)]

use nnas_surrogate::{FeatureSchema, FeatureValue, SequenceInput, TrainingExample, Variable, VariableForm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_features(schema: &FeatureSchema, rng: &mut impl Rng) -> Vec<FeatureValue> {
    schema
        .variables
        .iter()
        .map(|v| match v.form {
            VariableForm::SingleDiscrete => FeatureValue::Scalar(rng.random_range(0..6) as f64),
            VariableForm::SingleContinuous => FeatureValue::Scalar(rng.random_range(-1.0..2.0)),
            VariableForm::MultiDiscrete { len } => {
                FeatureValue::Codes((0..len).map(|_| rng.random_range(0..4) as f64).collect())
            }
        })
        .collect()
}

pub fn random_sequence(schema: &FeatureSchema, len: usize, rng: &mut impl Rng) -> SequenceInput {
    SequenceInput {
        features: random_features(schema, rng),
        noisy: (0..len).map(|_| rng.random_range(-1.0..1.0)).collect(),
        p_hats: (0..len).map(|_| rng.random_range(0.0..0.1)).collect(),
    }
}

pub fn random_example(schema: &FeatureSchema, len: usize, rng: &mut impl Rng) -> TrainingExample {
    let input = random_sequence(schema, len, rng);
    let target = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
    TrainingExample { input, target }
}

/// Small schema with one variable of every form.
pub fn small_schema(max_layers: usize) -> FeatureSchema {
    FeatureSchema {
        variables: vec![
            Variable::new("qubits", VariableForm::SingleDiscrete),
            Variable::new("angle", VariableForm::SingleContinuous),
            Variable::new("observable", VariableForm::MultiDiscrete { len: 3 }),
        ],
        include_noisy: true,
        max_layers,
    }
}
