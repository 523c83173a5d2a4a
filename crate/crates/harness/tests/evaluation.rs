mod common;

use common::dataset;
use nnas_core::noise::BASELINE_T1_US;
use nnas_harness::evaluate::{bucket_mae, bucket_slices, evaluate, model_predictions, DepthBucket, Method, Predictions};
use nnas_harness::metrology::{delta_method_curve, metrology_rate, theta_mse_curve};
use nnas_harness::{baseline_predictions, Split, Task};
use nnas_core::baselines::OverheadLedger;
use nnas_surrogate::{ModelKind, SurrogateModel};

#[test]
fn depth_buckets_split_layers_at_the_base_length() {
    let values = vec![vec![1.0; 10], vec![2.0; 3]];
    let easy = bucket_slices(&values, DepthBucket::Easy, 5);
    let hard = bucket_slices(&values, DepthBucket::Hard, 5);
    assert_eq!(easy, vec![vec![1.0; 5], vec![2.0; 3]]);
    // sequences without deep layers drop out of the hard bucket
    assert_eq!(hard, vec![vec![1.0; 5]]);
    assert_eq!(bucket_slices(&values, DepthBucket::All, 5), values);
}

#[test]
fn perfect_predictions_score_zero() {
    let test = dataset(Task::Trotter, 3, 6, Some(BASELINE_T1_US), Split::Test, 1);
    let pred = Predictions {
        model: "oracle".into(),
        values: test.records.iter().map(|r| r.noiseless.clone()).collect(),
        ledger: OverheadLedger::single_circuit(),
        flagged: 0,
    };
    for b in [DepthBucket::All, DepthBucket::Easy, DepthBucket::Hard] {
        assert_eq!(bucket_mae(&pred, &test, b).unwrap(), 0.0);
    }
    let reports = evaluate(&pred, &test).unwrap();
    assert_eq!(reports.len(), 3);
    assert!(reports.iter().all(|r| r.overhead_total == 9192 && r.mae_point == 0.0));
}

#[test]
fn hard_bucket_mae_by_hand() {
    let test = dataset(Task::Trotter, 3, 5, Some(BASELINE_T1_US), Split::Test, 2);
    let pred = baseline_predictions(Method::Noisy, &test).unwrap();
    let (mut sum, mut n) = (0.0, 0);
    for r in &test.records {
        for l in 5..r.length {
            sum += (r.noisy[l] - r.noiseless[l]).abs();
            n += 1;
        }
    }
    assert!((bucket_mae(&pred, &test, DepthBucket::Hard).unwrap() - sum / n as f64).abs() < 1e-15);
}

#[test]
fn untrained_surrogate_predicts_every_record() {
    let test = dataset(Task::Ghz, 4, 5, Some(BASELINE_T1_US), Split::Test, 3);
    let schema = nnas_harness::features::schema_for(Task::Ghz, 6);
    let model = SurrogateModel::new(ModelKind::Nnas, schema, 4, 0);
    let pred = model_predictions(&model, &test).unwrap();
    assert_eq!(pred.values.len(), 5);
    assert!(pred.values.iter().zip(&test.records).all(|(v, r)| v.len() == r.length));
    // a checkpoint for shorter sequences refuses longer ones
    let short = SurrogateModel::new(ModelKind::Nnas, nnas_harness::features::schema_for(Task::Ghz, 3), 4, 0);
    assert_eq!(model_predictions(&short, &test).unwrap_err().exit_code(), 3);
}

#[test]
fn exact_expectations_reach_the_heisenberg_rate() {
    let test = dataset(Task::Ghz, 4, 200, None, Split::Test, 5);
    let reference = delta_method_curve(&test.records, 8192).unwrap();
    // delta-method variance is 1 / (N n^2) at every θ
    for (n, m) in reference.ns.iter().zip(&reference.mse) {
        assert!((m * 8192.0 * (*n * *n) as f64 - 1.0).abs() < 1e-6, "n = {n}: {m}");
    }
    assert!((metrology_rate(&reference, &reference).unwrap().r - 2.0).abs() < 1e-9);
    let exact: Vec<Vec<f64>> = test.records.iter().map(|r| r.noiseless.clone()).collect();
    let perfect = theta_mse_curve(&test.records, &exact).unwrap();
    assert!(perfect.mse.iter().all(|&m| m < 1e-20));
}

#[test]
fn noise_flattens_the_metrology_rate() {
    let test = dataset(Task::Ghz, 4, 200, Some(BASELINE_T1_US), Split::Test, 6);
    let reference = delta_method_curve(&test.records, 8192).unwrap();
    let noisy: Vec<Vec<f64>> = test.records.iter().map(|r| r.noisy.clone()).collect();
    let curve = theta_mse_curve(&test.records, &noisy).unwrap();
    let r = metrology_rate(&curve, &reference).unwrap().r;
    assert!(r < 1.5, "{r}");
    let reports = evaluate(&baseline_predictions(Method::Noisy, &test).unwrap(), &test).unwrap();
    let all = reports.iter().find(|r| r.bucket == "all").unwrap();
    assert!((all.fit_rate_r.unwrap() - r).abs() < 1e-12);
    assert!((all.rmse_theta.unwrap() - curve.pooled_rmse()).abs() < 1e-12);
}
