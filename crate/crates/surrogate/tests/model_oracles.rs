mod common;

use common::{random_features, random_sequence, rng, small_schema};
use nnas_surrogate::{
    ablation_nea, ablation_nna, accumulate, embed_features, extract, mitigate_sequence, softmax_scores,
    EmbeddedFeatures, FeatureSchema, FeatureValue, ModelKind, SequenceInput, SurrogateError, SurrogateModel,
    Variable, VariableForm,
};
use rand::Rng;

fn set(model: &mut SurrogateModel, name: &str, values: Vec<f64>) {
    let t = model.param_mut(name).unwrap_or_else(|| panic!("no parameter {name}"));
    assert_eq!(t.values.len(), values.len(), "{name}");
    t.values = values;
}

fn get(model: &SurrogateModel, name: &str) -> Vec<f64> {
    model.param(name).unwrap().values.clone()
}

fn matvec(w: &[f64], x: &[f64]) -> Vec<f64> {
    let c = x.len();
    w.chunks(c).map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

#[test]
fn zero_embeddings_give_zero_matrix_plus_noisy_row() {
    let schema = FeatureSchema::trotter(6);
    let model = SurrogateModel::zeroed(ModelKind::Nnas, schema.clone(), 8);
    let mut r = rng(1);
    let feats = random_features(&schema, &mut r);
    let noisy = vec![0.9, 0.8, 0.7, 0.6];
    let x = embed_features(&model, &feats, Some(&noisy), 4).unwrap();
    assert_eq!(x.rows(), schema.variables.len() + 1);
    assert_eq!(x.layers(), 4);
    assert!(x.includes_noisy);
    for row in &x.matrix[..schema.variables.len()] {
        assert!(row.iter().all(|&v| v == 0.0));
    }
    assert_eq!(x.matrix.last().unwrap(), &noisy);
}

#[test]
fn single_discrete_row_is_scaled_value() {
    let schema = FeatureSchema {
        variables: vec![Variable::new("qubits", VariableForm::SingleDiscrete)],
        include_noisy: false,
        max_layers: 5,
    };
    let mut model = SurrogateModel::zeroed(ModelKind::Nnas, schema, 4);
    set(&mut model, "embed.0.w1", vec![0.1]);
    set(&mut model, "embed.0.w2", vec![1.0; 5]);
    set(&mut model, "embed.0.b", vec![0.0, 0.1, 0.2, 0.3, 0.4]);
    let x = embed_features(&model, &[FeatureValue::Scalar(6.0)], None, 5).unwrap();
    assert_eq!(x.rows(), 1);
    for (l, v) in x.matrix[0].iter().enumerate() {
        assert!((v - (0.6 + 0.1 * l as f64)).abs() < 1e-15);
    }
}

#[test]
fn continuous_row_is_affine_then_linear() {
    let schema = FeatureSchema {
        variables: vec![Variable::new("h_dt", VariableForm::SingleContinuous)],
        include_noisy: false,
        max_layers: 3,
    };
    let mut model = SurrogateModel::zeroed(ModelKind::Nea, schema, 4);
    set(&mut model, "embed.0.w1", vec![2.0]);
    set(&mut model, "embed.0.b1", vec![-0.5]);
    set(&mut model, "embed.0.w2", vec![1.0, -1.0, 0.5]);
    let x = embed_features(&model, &[FeatureValue::Scalar(1.5)], None, 3).unwrap();
    assert_eq!(x.matrix[0], vec![2.5, -2.5, 1.25]);
}

#[test]
fn multi_discrete_row_shape_and_value() {
    let schema = small_schema(7);
    let mut r = rng(3);
    let model = SurrogateModel::new(ModelKind::Nnas, schema.clone(), 4, 9);
    let codes = vec![3.0, 0.0, 1.0];
    let feats = vec![FeatureValue::Scalar(2.0), FeatureValue::Scalar(0.4), FeatureValue::Codes(codes.clone())];
    for len in 1..=7 {
        let noisy: Vec<f64> = (0..len).map(|_| r.random_range(-1.0..1.0)).collect();
        let x = embed_features(&model, &feats, Some(&noisy), len).unwrap();
        assert_eq!(x.matrix[2].len(), len);
        let w1 = get(&model, "embed.2.w1");
        let w2 = get(&model, "embed.2.w2");
        let b = get(&model, "embed.2.b");
        for l in 0..len {
            let want: f64 = (0..3).map(|k| codes[k] * w1[k * 7 + l] * w2[k]).sum::<f64>() + b[l];
            assert!((x.matrix[2][l] - want).abs() < 1e-14);
        }
    }
}

#[test]
fn mismatched_forms_are_rejected() {
    let schema = small_schema(4);
    let model = SurrogateModel::zeroed(ModelKind::Nnas, schema, 4);
    let bad = vec![FeatureValue::Codes(vec![1.0]), FeatureValue::Scalar(0.4), FeatureValue::Codes(vec![0.0; 3])];
    assert!(matches!(
        embed_features(&model, &bad, Some(&[0.0]), 1),
        Err(SurrogateError::UndeclaredForm { .. })
    ));
    let short = vec![FeatureValue::Scalar(1.0), FeatureValue::Scalar(0.4), FeatureValue::Codes(vec![0.0; 2])];
    assert!(embed_features(&model, &short, Some(&[0.0]), 1).is_err());
    let ok = vec![FeatureValue::Scalar(1.0), FeatureValue::Scalar(0.4), FeatureValue::Codes(vec![0.0; 3])];
    assert!(matches!(embed_features(&model, &ok, Some(&[0.0; 5]), 5), Err(SurrogateError::SequenceLength { .. })));
}

#[test]
fn zero_accumulator_is_constant_in_biases() {
    let schema = small_schema(4);
    let mut r = rng(5);
    let x = EmbeddedFeatures { matrix: (0..4).map(|_| (0..4).map(|_| r.random()).collect()).collect(), includes_noisy: true };
    let mut model = SurrogateModel::zeroed(ModelKind::Nnas, schema, 3);
    assert!(accumulate(&model, &x).unwrap().iter().flatten().all(|&h| h == 0.0));
    set(&mut model, "rnn.bx", vec![0.1, -0.2, 0.3]);
    set(&mut model, "rnn.bh", vec![0.4, 0.0, -0.1]);
    for h in accumulate(&model, &x).unwrap() {
        for (v, b) in h.iter().zip([0.5f64, -0.2, 0.2]) {
            assert!((v - b.tanh()).abs() < 1e-15);
        }
    }
}

#[test]
fn accumulator_matches_hand_unrolled_loops() {
    let schema = small_schema(6);
    let mut r = rng(7);
    for trial in 0..5 {
        let model = SurrogateModel::new(ModelKind::Nnas, schema.clone(), 5, trial);
        let m = schema.rows();
        let x = EmbeddedFeatures {
            matrix: (0..m).map(|_| (0..4).map(|_| r.random_range(-2.0..2.0)).collect()).collect(),
            includes_noisy: true,
        };
        let hs = accumulate(&model, &x).unwrap();
        let (wx, bx, wh, bh) = (get(&model, "rnn.wx"), get(&model, "rnn.bx"), get(&model, "rnn.wh"), get(&model, "rnn.bh"));
        let d = 5;
        let mut h = vec![0.0; d];
        for l in 0..4 {
            let mut next = vec![0.0; d];
            for i in 0..d {
                let mut z = bx[i] + bh[i];
                for j in 0..m {
                    z += wx[i * m + j] * x.matrix[j][l];
                }
                for j in 0..d {
                    z += wh[i * d + j] * h[j];
                }
                next[i] = z.tanh();
            }
            h = next;
            for i in 0..d {
                assert!((hs[l][i] - h[i]).abs() < 1e-12);
                assert!(hs[l][i].abs() < 1.0);
            }
        }
    }
}

#[test]
fn single_layer_accumulation() {
    let schema = small_schema(3);
    let model = SurrogateModel::new(ModelKind::Nea, schema.clone(), 4, 11);
    let x = EmbeddedFeatures { matrix: vec![vec![0.3], vec![-0.2], vec![1.0], vec![0.5]], includes_noisy: true };
    let h = &accumulate(&model, &x).unwrap()[0];
    let pre = matvec(&get(&model, "rnn.wx"), &x.column(0));
    let (bx, bh) = (get(&model, "rnn.bx"), get(&model, "rnn.bh"));
    for i in 0..4 {
        assert!((h[i] - (pre[i] + bx[i] + bh[i]).tanh()).abs() < 1e-15);
    }
}

#[test]
fn accumulator_is_order_aware() {
    let schema = small_schema(4);
    let model = SurrogateModel::new(ModelKind::Nnas, schema, 6, 2);
    let x = EmbeddedFeatures {
        matrix: vec![vec![1.0, 0.0, -1.0, 2.0], vec![0.0; 4], vec![0.5, 0.5, -0.5, 0.0], vec![0.9, 0.7, 0.5, 0.3]],
        includes_noisy: true,
    };
    let fwd = accumulate(&model, &x).unwrap();
    let rev = accumulate(&model, &x.reversed()).unwrap();
    let diff: f64 = fwd[3].iter().zip(&rev[3]).map(|(a, b)| (a - b).abs()).sum();
    assert!(diff > 1e-3, "reversal left H_L unchanged ({diff})");
}

#[test]
fn zero_keys_give_uniform_attention() {
    let mut model = SurrogateModel::new(ModelKind::Nnas, small_schema(3), 6, 4);
    set(&mut model, "ext.wn", vec![0.0; 36]);
    set(&mut model, "ext.bn", vec![0.0; 6]);
    let h = vec![0.1, -0.4, 0.8, 0.2, -0.9, 0.5];
    let e = extract(&model, &h).unwrap();
    let mean = e.u.iter().sum::<f64>() / 6.0;
    assert!(e.attention.iter().all(|a| (a - mean).abs() < 1e-14));
    assert!(e.scores.iter().all(|s| (s - 1.0 / 6.0).abs() < 1e-15));
    let w = get(&model, "ext.readout");
    let c = get(&model, "ext.readout_b")[0];
    assert!((e.r - (mean * w.iter().sum::<f64>() + c)).abs() < 1e-14);
}

#[test]
fn scalar_extractor_is_affine() {
    let model = SurrogateModel::new(ModelKind::Nnas, small_schema(3), 1, 8);
    let e = extract(&model, &[0.37]).unwrap();
    assert_eq!(e.scores, vec![1.0]);
    assert!((e.attention[0] - e.u[0]).abs() < 1e-15);
    let (w, c) = (get(&model, "ext.readout")[0], get(&model, "ext.readout_b")[0]);
    assert!((e.r - (w * e.u[0] + c)).abs() < 1e-15);
}

#[test]
fn softmax_rows_and_attention_bounds() {
    let mut r = rng(12);
    for trial in 0..20 {
        let model = SurrogateModel::new(ModelKind::Nnas, small_schema(3), 8, trial);
        let h: Vec<f64> = (0..8).map(|_| r.random_range(-1.0..1.0)).collect();
        let e = extract(&model, &h).unwrap();
        for row in e.scores.chunks(8) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let lo = e.u.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = e.u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(e.attention.iter().all(|&a| a >= lo - 1e-12 && a <= hi + 1e-12));
    }
    let big = softmax_scores(&[300.0, -200.0], &[50.0, -40.0]);
    assert!(big.iter().all(|v| v.is_finite()));
}

#[test]
fn mitigation_arithmetic() {
    let m = mitigate_sequence(&[0.3, -0.2], &[0.0, 0.0], &[0.0, 0.0], &[0.0, 0.0]).unwrap();
    assert_eq!(m.values, vec![0.3, -0.2]);
    let m = mitigate_sequence(&[0.5], &[0.2], &[0.05], &[0.0]).unwrap();
    assert!((m.values[0] - 0.5 / 0.85).abs() < 1e-15);
    assert!((m.values[0] - 0.58824).abs() < 1e-5);
    assert!(!m.degenerate);
    let m = mitigate_sequence(&[0.5], &[0.2], &[-0.8], &[0.0]).unwrap();
    assert!(m.degenerate);
    assert!((m.values[0] - 0.5e6).abs() < 1e-6);
    assert!(mitigate_sequence(&[0.5, 0.1], &[0.2], &[0.0], &[0.0]).is_err());
}

#[test]
fn depolarizing_sequence_is_recovered_exactly() {
    let y = [0.8, -0.3, 0.55, 0.1, -0.95];
    let noisy: Vec<f64> = y.iter().enumerate().map(|(l, v)| 0.9f64.powi(l as i32 + 1) * v).collect();
    let m = mitigate_sequence(&noisy, &[0.1; 5], &[0.0; 5], &[0.0; 5]).unwrap();
    for (a, b) in m.values.iter().zip(y) {
        assert!((a - b).abs() < 1e-14);
    }
}

#[test]
fn zero_models_leave_noisy_values() {
    let schema = small_schema(5);
    let mut r = rng(21);
    for kind in [ModelKind::Nnas, ModelKind::Nea] {
        let model = SurrogateModel::zeroed(kind, schema.clone(), 4);
        let mut seq = random_sequence(&schema, 5, &mut r);
        seq.p_hats = vec![0.0; 5];
        let p = model.predict(&seq).unwrap();
        assert_eq!(p.values, seq.noisy);
        seq.p_hats = vec![0.1; 5];
        let p = model.predict(&seq).unwrap();
        for (l, (a, b)) in p.values.iter().zip(&seq.noisy).enumerate() {
            assert!((a - b / 0.9f64.powi(l as i32 + 1)).abs() < 1e-14);
        }
    }
}

#[test]
fn nna_zero_weights_give_final_bias() {
    let schema = small_schema(6);
    let mut model = SurrogateModel::zeroed(ModelKind::Nna, schema.clone(), 4);
    set(&mut model, "mlp.4.b", vec![0.25]);
    let mut r = rng(2);
    for len in 1..=6 {
        let seq = random_sequence(&schema, len, &mut r);
        let p = model.predict(&seq).unwrap();
        assert_eq!(p.values, vec![0.25; len]);
        let x = embed_features(&model, &seq.features, Some(&seq.noisy), len).unwrap();
        assert_eq!(ablation_nna(&model, &x).unwrap(), vec![0.25; len]);
    }
}

#[test]
fn nna_prediction_matches_its_ablation_op() {
    let schema = small_schema(4);
    let model = SurrogateModel::new(ModelKind::Nna, schema.clone(), 4, 5);
    let seq = random_sequence(&schema, 4, &mut rng(6));
    let x = embed_features(&model, &seq.features, Some(&seq.noisy), 4).unwrap();
    assert_eq!(model.predict(&seq).unwrap().values, ablation_nna(&model, &x).unwrap());
}

#[test]
fn nea_shares_the_nnas_accumulator() {
    let schema = small_schema(5);
    let nnas = SurrogateModel::new(ModelKind::Nnas, schema.clone(), 6, 31);
    let mut nea = SurrogateModel::new(ModelKind::Nea, schema.clone(), 6, 32);
    for t in nnas.params() {
        if let Some(dst) = nea.param_mut(&t.name) {
            dst.values = t.values.clone();
        }
    }
    let seq = random_sequence(&schema, 5, &mut rng(33));
    let x = embed_features(&nnas, &seq.features, Some(&seq.noisy), 5).unwrap();
    assert_eq!(x, embed_features(&nea, &seq.features, Some(&seq.noisy), 5).unwrap());
    let hs = accumulate(&nnas, &x).unwrap();
    assert_eq!(hs, accumulate(&nea, &x).unwrap());

    // NNAS with its extractor replaced by the NEA readout
    let ys: Vec<f64> = hs.iter().map(|h| ablation_nea(&nea, h).unwrap()).collect();
    let want = mitigate_sequence(&seq.noisy, &seq.p_hats, &ys, &[0.0; 5]).unwrap();
    let got = nea.predict(&seq).unwrap();
    for (a, b) in got.values.iter().zip(&want.values) {
        assert!((a - b).abs() < 1e-14);
    }

    let rs: Vec<f64> = hs.iter().map(|h| extract(&nnas, h).unwrap().r).collect();
    let want = mitigate_sequence(&seq.noisy, &seq.p_hats, &rs, &get(&nnas, "out.b")).unwrap();
    let got = nnas.predict(&seq).unwrap();
    for (a, b) in got.values.iter().zip(&want.values) {
        assert!((a - b).abs() < 1e-14);
    }
}

#[test]
fn clamped_denominator_is_flagged() {
    let schema = small_schema(2);
    let mut model = SurrogateModel::zeroed(ModelKind::Nnas, schema.clone(), 2);
    let seq = SequenceInput {
        features: random_features(&schema, &mut rng(1)),
        noisy: vec![0.4, 0.3],
        p_hats: vec![0.5, 0.0],
    };
    set(&mut model, "ext.readout_b", vec![-0.5]);
    let p = model.predict(&seq).unwrap();
    assert!(p.degenerate);
    assert!(p.values.iter().all(|v| v.is_finite()));
}

#[test]
fn checkpoint_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for kind in [ModelKind::Nnas, ModelKind::Nea, ModelKind::Nna] {
        let model = SurrogateModel::new(kind, FeatureSchema::trotter(10), 8, 77);
        let path = dir.path().join(format!("{kind}.json"));
        model.save(&path).unwrap();
        let back = SurrogateModel::load(&path).unwrap();
        assert_eq!(back.params(), model.params());
        assert_eq!(back.schema, model.schema);

        let mut ck = model.to_checkpoint();
        ck.hidden_dim = 9;
        assert!(SurrogateModel::from_checkpoint(&ck).is_err());
        let mut ck = model.to_checkpoint();
        ck.version = 99;
        assert!(SurrogateModel::from_checkpoint(&ck).is_err());
        let mut ck = model.to_checkpoint();
        ck.params.pop();
        assert!(SurrogateModel::from_checkpoint(&ck).is_err());
    }
}

#[test]
fn ops_reject_the_wrong_model_kind() {
    let schema = small_schema(3);
    let nna = SurrogateModel::zeroed(ModelKind::Nna, schema.clone(), 4);
    let x = EmbeddedFeatures { matrix: vec![vec![0.0]; 4], includes_noisy: true };
    assert!(accumulate(&nna, &x).is_err());
    assert!(extract(&nna, &[0.0; 4]).is_err());
    let nnas = SurrogateModel::zeroed(ModelKind::Nnas, schema, 4);
    assert!(ablation_nna(&nnas, &x).is_err());
    assert!(ablation_nea(&nnas, &[0.0; 4]).is_err());
}
