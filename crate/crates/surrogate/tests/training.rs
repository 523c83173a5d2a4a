mod common;

use common::{random_example, random_sequence, rng, small_schema};
use nnas_surrogate::{
    evaluate_loss, train, train_new, FeatureSchema, ModelKind, Optimizer, SurrogateError, SurrogateModel,
    TrainingConfig, TrainingExample,
};

fn config(lr: f64, epochs: usize, seed: u64) -> TrainingConfig {
    TrainingConfig { learning_rate: lr, epochs, batch_size: 8, seed, ..TrainingConfig::default() }
}

#[test]
fn empty_dataset_and_bad_config_are_errors() {
    let mut model = SurrogateModel::new(ModelKind::Nnas, small_schema(3), 4, 0);
    assert!(matches!(train(&mut model, &[], &TrainingConfig::default()), Err(SurrogateError::EmptyDataset)));
    let data = vec![random_example(&small_schema(3), 3, &mut rng(1))];
    for bad in [config(0.0, 1, 0), config(1e-3, 0, 0), TrainingConfig { batch_size: 0, ..config(1e-3, 1, 0) }] {
        assert!(matches!(train(&mut model, &data, &bad), Err(SurrogateError::InvalidConfig(_))));
    }
}

#[test]
fn identity_data_drives_corrections_to_zero() {
    let schema = small_schema(5);
    let mut r = rng(4);
    let data: Vec<TrainingExample> = (0..20)
        .map(|i| {
            let mut seq = random_sequence(&schema, 1 + i % 5, &mut r);
            seq.p_hats = vec![0.0; seq.len()];
            TrainingExample { target: seq.noisy.clone(), input: seq }
        })
        .collect();
    for kind in [ModelKind::Nnas, ModelKind::Nea] {
        let (model, curve) = train_new(kind, schema.clone(), 8, &data, &config(3e-3, 150, 9)).unwrap();
        let mse = evaluate_loss(&model, &data).unwrap();
        assert!(mse < 1e-4, "{kind}: {mse:e}");
        assert!(curve.last().unwrap() < curve.first().unwrap());
    }
}

#[test]
fn single_sequence_overfits() {
    let schema = FeatureSchema::trotter(8);
    let ex = random_example(&schema, 8, &mut rng(17));
    let cfg = TrainingConfig { learning_rate: 1e-2, epochs: 2000, batch_size: 1, seed: 3, ..TrainingConfig::default() };
    let (model, _) = train_new(ModelKind::Nnas, schema, 32, std::slice::from_ref(&ex), &cfg).unwrap();
    let mse = evaluate_loss(&model, &[ex]).unwrap();
    assert!(mse < 1e-6, "{mse:e}");
}

#[test]
fn training_is_deterministic() {
    let schema = small_schema(4);
    let mut r = rng(8);
    let data: Vec<_> = (0..12).map(|i| random_example(&schema, 1 + i % 4, &mut r)).collect();
    for kind in [ModelKind::Nnas, ModelKind::Nea, ModelKind::Nna] {
        let (a, ca) = train_new(kind, schema.clone(), 6, &data, &config(1e-2, 20, 5)).unwrap();
        let (b, cb) = train_new(kind, schema.clone(), 6, &data, &config(1e-2, 20, 5)).unwrap();
        assert_eq!(ca, cb);
        assert_eq!(a.params(), b.params());
        let (c, _) = train_new(kind, schema.clone(), 6, &data, &config(1e-2, 20, 6)).unwrap();
        assert_ne!(a.params(), c.params());
    }
}

#[test]
fn every_model_reduces_its_loss() {
    let schema = small_schema(5);
    let mut r = rng(10);
    let data: Vec<_> = (0..16).map(|i| random_example(&schema, 1 + i % 5, &mut r)).collect();
    for kind in [ModelKind::Nnas, ModelKind::Nea, ModelKind::Nna] {
        for optimizer in [Optimizer::Adam, Optimizer::GradientDescent] {
            let cfg = TrainingConfig { optimizer, ..config(if optimizer == Optimizer::Adam { 3e-3 } else { 3e-2 }, 60, 2) };
            let mut model = SurrogateModel::new(kind, schema.clone(), 6, 2);
            let before = evaluate_loss(&model, &data).unwrap();
            let curve = train(&mut model, &data, &cfg).unwrap();
            assert_eq!(curve.len(), 60);
            let after = evaluate_loss(&model, &data).unwrap();
            assert!(after < before, "{kind} {optimizer:?}: {before} -> {after}");
        }
    }
}

#[test]
fn divergence_is_reported() {
    let schema = small_schema(3);
    let mut ex = random_example(&schema, 3, &mut rng(1));
    ex.target = vec![1e3; 3];
    let mut model = SurrogateModel::new(ModelKind::Nna, schema, 4, 1);
    assert!(matches!(train(&mut model, &[ex], &config(1e-3, 5, 0)), Err(SurrogateError::Diverged { epoch: 0, .. })));
}
