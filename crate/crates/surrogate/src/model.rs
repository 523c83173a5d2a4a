//! NNAS and its two ablations.
//!
//! All three share the embedding layer. NNAS and NEA also share the
//! recurrent accumulator `H_l = tanh(W_x X_l + b_x + W_h H_{l-1} + b_h)`;
//! they differ in how a hidden state becomes a correction:
//!
//! * NNAS: `U = W_U H + b_U`, `N = W_N H + b_N`,
//!   `A = rowsoftmax(U N^T / sqrt(d)) U`, `r = w . A + c`, and
//!   `y_l = noisy_l / (s_l + r_l) + b_l`.
//! * NEA: `Y = W_3 H + b_3`, `y_l = noisy_l / (s_l + Y_l)`.
//!
//! NNA skips all of that and runs a five-layer tanh MLP on each column of
//! the embedded matrix.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SurrogateError};
use crate::features::{EmbeddedFeatures, FeatureSchema, FeatureValue, SequenceInput, VariableForm};
use crate::tape::{Gradients, Graph, Var};

pub const DEFAULT_HIDDEN_DIM: usize = 32;
/// Denominators smaller than this in magnitude are clamped.
pub const DENOMINATOR_FLOOR: f64 = 1e-6;
pub const MLP_WIDTH: usize = 32;
pub const MLP_LAYERS: usize = 5;
/// Initial scale of the correction readouts relative to Xavier.
const READOUT_INIT_SCALE: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ModelKind {
    Nnas,
    Nea,
    Nna,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Nnas => "NNAS",
            ModelKind::Nea => "NEA",
            ModelKind::Nna => "NNA",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = SurrogateError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "NNAS" => Ok(ModelKind::Nnas),
            "NEA" => Ok(ModelKind::Nea),
            "NNA" => Ok(ModelKind::Nna),
            _ => Err(SurrogateError::InvalidConfig(format!("unknown model kind `{s}`"))),
        }
    }
}

/// A named parameter block; vectors are `(n, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    pub name: String,
    pub shape: (usize, usize),
    pub values: Vec<f64>,
    pub gradient: Vec<f64>,
}

impl Tensor {
    pub fn zeros(name: String, shape: (usize, usize)) -> Self {
        let n = shape.0 * shape.1;
        Self { name, shape, values: vec![0.0; n], gradient: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Clone, Copy, Debug)]
enum Init {
    Zero,
    Xavier(f64),
}

fn layout(kind: ModelKind, schema: &FeatureSchema, d: usize) -> Vec<(String, (usize, usize), Init)> {
    let lm = schema.max_layers;
    let m = schema.rows();
    let w = Init::Xavier(1.0);
    let mut out = Vec::new();
    let mut push = |name: String, shape, init| out.push((name, shape, init));
    for (i, var) in schema.variables.iter().enumerate() {
        match var.form {
            VariableForm::SingleDiscrete => {
                push(format!("embed.{i}.w1"), (1, 1), w);
                push(format!("embed.{i}.w2"), (lm, 1), w);
            }
            VariableForm::SingleContinuous => {
                push(format!("embed.{i}.w1"), (1, 1), w);
                push(format!("embed.{i}.b1"), (1, 1), Init::Zero);
                push(format!("embed.{i}.w2"), (lm, 1), w);
            }
            VariableForm::MultiDiscrete { len } => {
                push(format!("embed.{i}.w1"), (len, lm), w);
                push(format!("embed.{i}.w2"), (len, 1), w);
            }
        }
        push(format!("embed.{i}.b"), (lm, 1), Init::Zero);
    }
    match kind {
        ModelKind::Nnas | ModelKind::Nea => {
            push("rnn.wx".into(), (d, m), w);
            push("rnn.bx".into(), (d, 1), Init::Zero);
            push("rnn.wh".into(), (d, d), w);
            push("rnn.bh".into(), (d, 1), Init::Zero);
        }
        ModelKind::Nna => {}
    }
    match kind {
        ModelKind::Nnas => {
            push("ext.wu".into(), (d, d), w);
            push("ext.bu".into(), (d, 1), Init::Zero);
            push("ext.wn".into(), (d, d), w);
            push("ext.bn".into(), (d, 1), Init::Zero);
            push("ext.readout".into(), (1, d), Init::Xavier(READOUT_INIT_SCALE));
            push("ext.readout_b".into(), (1, 1), Init::Zero);
            push("out.b".into(), (lm, 1), Init::Zero);
        }
        ModelKind::Nea => {
            push("nea.w3".into(), (1, d), Init::Xavier(READOUT_INIT_SCALE));
            push("nea.b3".into(), (1, 1), Init::Zero);
        }
        ModelKind::Nna => {
            let dims: Vec<usize> = std::iter::once(m)
                .chain(std::iter::repeat_n(MLP_WIDTH, MLP_LAYERS - 1))
                .chain(std::iter::once(1))
                .collect();
            for k in 0..MLP_LAYERS {
                push(format!("mlp.{k}.w"), (dims[k + 1], dims[k]), w);
                push(format!("mlp.{k}.b"), (dims[k + 1], 1), Init::Zero);
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct SurrogateModel {
    pub kind: ModelKind,
    pub hidden_dim: usize,
    pub schema: FeatureSchema,
    params: Vec<Tensor>,
    index: BTreeMap<String, usize>,
}

/// Per-sequence model output.
#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub values: Vec<f64>,
    /// Some denominator was clamped.
    pub degenerate: bool,
}

/// Intermediate quantities of the attention extractor for one layer.
#[derive(Clone, Debug, PartialEq)]
pub struct Extraction {
    pub u: Vec<f64>,
    pub n: Vec<f64>,
    /// Row-softmax scores, `d x d` row-major.
    pub scores: Vec<f64>,
    pub attention: Vec<f64>,
    pub r: f64,
}

struct Bound<'a> {
    model: &'a SurrogateModel,
    vars: Vec<Var>,
}

impl Bound<'_> {
    fn get(&self, name: &str) -> Var {
        self.vars[self.model.index[name]]
    }
}

/// Graph nodes of one forward pass.
struct Forward {
    outputs: Vec<Var>,
    degenerate: bool,
}

impl SurrogateModel {
    /// Xavier-uniform weights, zero biases.
    pub fn new(kind: ModelKind, schema: FeatureSchema, hidden_dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut model = Self::zeroed(kind, schema, hidden_dim);
        let specs = layout(kind, &model.schema, hidden_dim);
        for (t, (_, (r, c), init)) in model.params.iter_mut().zip(specs) {
            if let Init::Xavier(scale) = init {
                let limit = scale * (6.0 / (r + c) as f64).sqrt();
                for v in t.values.iter_mut() {
                    *v = rng.random_range(-limit..=limit);
                }
            }
        }
        model
    }

    /// Every parameter zero.
    pub fn zeroed(kind: ModelKind, schema: FeatureSchema, hidden_dim: usize) -> Self {
        assert!(hidden_dim >= 1, "hidden dimension must be positive");
        let params: Vec<Tensor> =
            layout(kind, &schema, hidden_dim).into_iter().map(|(n, s, _)| Tensor::zeros(n, s)).collect();
        let index = params.iter().enumerate().map(|(i, t)| (t.name.clone(), i)).collect();
        Self { kind, hidden_dim, schema, params, index }
    }

    pub fn params(&self) -> &[Tensor] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Tensor] {
        &mut self.params
    }

    pub fn param(&self, name: &str) -> Option<&Tensor> {
        self.index.get(name).map(|&i| &self.params[i])
    }

    pub fn param_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.index.get(name).map(|&i| &mut self.params[i])
    }

    pub fn parameter_count(&self) -> usize {
        self.params.iter().map(Tensor::len).sum()
    }

    pub fn zero_grad(&mut self) {
        for t in &mut self.params {
            t.gradient.iter_mut().for_each(|g| *g = 0.0);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|t| t.values.iter().all(|v| v.is_finite()))
    }

    fn bind(&self, g: &mut Graph) -> Bound<'_> {
        let vars = self.params.iter().map(|t| g.leaf(t.values.clone(), t.shape.0, t.shape.1)).collect();
        Bound { model: self, vars }
    }

    /// One `max_layers`-long row per variable, plus the columns `X_l`.
    fn embed_on(&self, g: &mut Graph, p: &Bound, features: &[FeatureValue], noisy: Option<&[f64]>, len: usize) -> Vec<Var> {
        let mut rows = Vec::with_capacity(features.len());
        for (i, (var, val)) in self.schema.variables.iter().zip(features).enumerate() {
            let w1 = p.get(&format!("embed.{i}.w1"));
            let w2 = p.get(&format!("embed.{i}.w2"));
            let b = p.get(&format!("embed.{i}.b"));
            let raw = match (var.form, val) {
                (VariableForm::SingleDiscrete, FeatureValue::Scalar(x)) => {
                    let x = g.scalar(*x);
                    let scaled = g.mul(w1, x);
                    g.scalar_mul(scaled, w2)
                }
                (VariableForm::SingleContinuous, FeatureValue::Scalar(x)) => {
                    let x = g.scalar(*x);
                    let scaled = g.mul(w1, x);
                    let shifted = g.add(scaled, p.get(&format!("embed.{i}.b1")));
                    g.scalar_mul(shifted, w2)
                }
                (VariableForm::MultiDiscrete { len: s }, FeatureValue::Codes(codes)) => {
                    // X_l = Σ_k G_k W1[k, l] W2[k]
                    debug_assert_eq!(codes.len(), s);
                    let c = g.vector(codes.clone());
                    let weighted = g.mul(c, w2);
                    g.matvec_t(w1, weighted)
                }
                _ => unreachable!("forms checked before embedding"),
            };
            rows.push(g.add(raw, b));
        }
        let noisy_vars: Option<Vec<Var>> = noisy.map(|v| v[..len].iter().map(|&y| g.scalar(y)).collect());
        (0..len)
            .map(|l| {
                let mut parts: Vec<Var> = rows.iter().map(|&r| g.index(r, l)).collect();
                if let Some(nv) = &noisy_vars {
                    parts.push(nv[l]);
                }
                g.concat(&parts)
            })
            .collect()
    }

    fn accumulate_on(&self, g: &mut Graph, p: &Bound, columns: &[Var]) -> Vec<Var> {
        let (wx, bx, wh, bh) = (p.get("rnn.wx"), p.get("rnn.bx"), p.get("rnn.wh"), p.get("rnn.bh"));
        let mut h = g.vector(vec![0.0; self.hidden_dim]);
        let mut out = Vec::with_capacity(columns.len());
        for &x in columns {
            let a = g.matvec(wx, x);
            let a = g.add(a, bx);
            let b = g.matvec(wh, h);
            let b = g.add(b, bh);
            let z = g.add(a, b);
            h = g.tanh(z);
            out.push(h);
        }
        out
    }

    /// Returns `(U, N, A, r)` nodes.
    fn extract_on(&self, g: &mut Graph, p: &Bound, h: Var) -> (Var, Var, Var, Var) {
        let u = g.matvec(p.get("ext.wu"), h);
        let u = g.add(u, p.get("ext.bu"));
        let n = g.matvec(p.get("ext.wn"), h);
        let n = g.add(n, p.get("ext.bn"));
        let a = g.attention(u, n);
        let r = g.matvec(p.get("ext.readout"), a);
        let r = g.add(r, p.get("ext.readout_b"));
        (u, n, a, r)
    }

    fn mlp_on(&self, g: &mut Graph, p: &Bound, x: Var) -> Var {
        let mut z = x;
        for k in 0..MLP_LAYERS {
            let w = g.matvec(p.get(&format!("mlp.{k}.w")), z);
            z = g.add(w, p.get(&format!("mlp.{k}.b")));
            if k + 1 < MLP_LAYERS {
                z = g.tanh(z);
            }
        }
        z
    }

    fn forward(&self, g: &mut Graph, p: &Bound, seq: &SequenceInput) -> Result<Forward> {
        seq.validate(&self.schema)?;
        let len = seq.len();
        let noisy = self.schema.include_noisy.then_some(seq.noisy.as_slice());
        let cols = self.embed_on(g, p, &seq.features, noisy, len);
        let survival = seq.survival();
        let mut outputs = Vec::with_capacity(len);
        let mut degenerate = false;
        match self.kind {
            ModelKind::Nna => {
                for &c in &cols {
                    outputs.push(self.mlp_on(g, p, c));
                }
            }
            ModelKind::Nnas | ModelKind::Nea => {
                let hs = self.accumulate_on(g, p, &cols);
                let out_b = (self.kind == ModelKind::Nnas).then(|| p.get("out.b"));
                for (l, &h) in hs.iter().enumerate() {
                    let corr = if self.kind == ModelKind::Nnas {
                        self.extract_on(g, p, h).3
                    } else {
                        let y = g.matvec(p.get("nea.w3"), h);
                        g.add(y, p.get("nea.b3"))
                    };
                    let s = g.scalar(survival[l]);
                    let den = g.add(s, corr);
                    degenerate |= g.scalar_value(den).abs() < DENOMINATOR_FLOOR;
                    let den = g.floor_magnitude(den, DENOMINATOR_FLOOR);
                    let num = g.scalar(seq.noisy[l]);
                    let mut y = g.div(num, den);
                    if let Some(b) = out_b {
                        let bl = g.index(b, l);
                        y = g.add(y, bl);
                    }
                    outputs.push(y);
                }
            }
        }
        Ok(Forward { outputs, degenerate })
    }

    pub fn predict(&self, seq: &SequenceInput) -> Result<Prediction> {
        let mut g = Graph::new();
        let p = self.bind(&mut g);
        let f = self.forward(&mut g, &p, seq)?;
        let values = f.outputs.iter().map(|&v| g.scalar_value(v)).collect();
        Ok(Prediction { values, degenerate: f.degenerate })
    }

    /// Mean squared error over the layers of one sequence.
    pub fn loss(&self, seq: &SequenceInput, target: &[f64]) -> Result<f64> {
        let pred = self.predict(seq)?;
        check_target(&pred.values, target)?;
        Ok(mean_sq(&pred.values, target))
    }

    /// Loss of one sequence and its gradient, one vector per parameter.
    pub fn loss_and_gradient(&self, seq: &SequenceInput, target: &[f64]) -> Result<(f64, Vec<Vec<f64>>)> {
        let mut g = Graph::new();
        let p = self.bind(&mut g);
        let f = self.forward(&mut g, &p, seq)?;
        if target.len() != f.outputs.len() {
            return Err(SurrogateError::LengthMismatch(format!(
                "{} predictions, {} targets",
                f.outputs.len(),
                target.len()
            )));
        }
        let pred = g.concat(&f.outputs);
        let t = g.vector(target.to_vec());
        let diff = g.sub(pred, t);
        let sq = g.square(diff);
        let total = g.sum(sq);
        let loss = g.scale(total, 1.0 / target.len() as f64);
        let grads: Gradients = g.backward(loss);
        let per_param = p.vars.iter().map(|&v| grads.get(v).to_vec()).collect();
        Ok((g.scalar_value(loss), per_param))
    }

    /// Adds the gradient of `weight * loss(seq)` into the parameter
    /// gradients; returns the unweighted loss.
    pub fn accumulate_gradient(&mut self, seq: &SequenceInput, target: &[f64], weight: f64) -> Result<f64> {
        let (loss, grads) = self.loss_and_gradient(seq, target)?;
        for (t, gr) in self.params.iter_mut().zip(grads) {
            for (acc, v) in t.gradient.iter_mut().zip(gr) {
                *acc += weight * v;
            }
        }
        Ok(loss)
    }

    fn require(&self, kinds: &[ModelKind], what: &str) -> Result<()> {
        if kinds.contains(&self.kind) {
            Ok(())
        } else {
            Err(SurrogateError::InvalidConfig(format!("{what} is not part of {}", self.kind)))
        }
    }
}

fn check_target(pred: &[f64], target: &[f64]) -> Result<()> {
    if pred.len() != target.len() {
        return Err(SurrogateError::LengthMismatch(format!("{} predictions, {} targets", pred.len(), target.len())));
    }
    Ok(())
}

pub(crate) fn mean_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

/// Embeds the descriptors of one sequence of length `len`.
pub fn embed_features(
    model: &SurrogateModel,
    features: &[FeatureValue],
    noisy: Option<&[f64]>,
    len: usize,
) -> Result<EmbeddedFeatures> {
    model.schema.check(features)?;
    model.schema.check_length(len)?;
    if let Some(n) = noisy {
        if n.len() < len {
            return Err(SurrogateError::LengthMismatch(format!("{} noisy values for {len} layers", n.len())));
        }
    }
    let noisy = if model.schema.include_noisy { noisy } else { None };
    if model.schema.include_noisy && noisy.is_none() {
        return Err(SurrogateError::LengthMismatch("schema expects a noisy row".into()));
    }
    let mut g = Graph::new();
    let p = model.bind(&mut g);
    let cols = model.embed_on(&mut g, &p, features, noisy, len);
    let m = model.schema.rows();
    let matrix = (0..m).map(|r| cols.iter().map(|&c| g.value(c)[r]).collect()).collect();
    Ok(EmbeddedFeatures { matrix, includes_noisy: noisy.is_some() })
}

/// Hidden states `H_1..H_L` of the recurrent accumulator.
pub fn accumulate(model: &SurrogateModel, x: &EmbeddedFeatures) -> Result<Vec<Vec<f64>>> {
    model.require(&[ModelKind::Nnas, ModelKind::Nea], "the accumulator")?;
    if x.rows() != model.schema.rows() {
        return Err(SurrogateError::LengthMismatch(format!("{} feature rows, model expects {}", x.rows(), model.schema.rows())));
    }
    let mut g = Graph::new();
    let p = model.bind(&mut g);
    let cols: Vec<Var> = (0..x.layers()).map(|l| g.vector(x.column(l))).collect();
    let hs = model.accumulate_on(&mut g, &p, &cols);
    Ok(hs.iter().map(|&h| g.value(h).to_vec()).collect())
}

/// Attention extractor applied to one hidden state.
pub fn extract(model: &SurrogateModel, h: &[f64]) -> Result<Extraction> {
    model.require(&[ModelKind::Nnas], "the attention extractor")?;
    if h.len() != model.hidden_dim {
        return Err(SurrogateError::LengthMismatch(format!("hidden state of length {}", h.len())));
    }
    let mut g = Graph::new();
    let p = model.bind(&mut g);
    let hv = g.vector(h.to_vec());
    let (u, n, a, r) = model.extract_on(&mut g, &p, hv);
    let (u, n) = (g.value(u).to_vec(), g.value(n).to_vec());
    let scores = softmax_scores(&u, &n);
    Ok(Extraction { u, n, scores, attention: g.value(a).to_vec(), r: g.scalar_value(r) })
}

/// `rowsoftmax(u n^T / sqrt(d))`, row-major.
pub fn softmax_scores(u: &[f64], n: &[f64]) -> Vec<f64> {
    let d = u.len();
    let scale = 1.0 / (d as f64).sqrt();
    let mut s = Vec::with_capacity(d * d);
    for &ui in u {
        let logits: Vec<f64> = n.iter().map(|nj| ui * nj * scale).collect();
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
        let z: f64 = e.iter().sum();
        s.extend(e.iter().map(|v| v / z));
    }
    s
}

/// NEA readout `Y_l = W_3 H_l + b_3`.
pub fn ablation_nea(model: &SurrogateModel, h: &[f64]) -> Result<f64> {
    model.require(&[ModelKind::Nea], "the linear readout")?;
    if h.len() != model.hidden_dim {
        return Err(SurrogateError::LengthMismatch(format!("hidden state of length {}", h.len())));
    }
    let w = &model.param("nea.w3").expect("NEA readout").values;
    let b = model.param("nea.b3").expect("NEA bias").values[0];
    Ok(w.iter().zip(h).map(|(a, b)| a * b).sum::<f64>() + b)
}

/// NNA predictions for an embedded matrix.
pub fn ablation_nna(model: &SurrogateModel, x: &EmbeddedFeatures) -> Result<Vec<f64>> {
    model.require(&[ModelKind::Nna], "the MLP")?;
    if x.rows() != model.schema.rows() {
        return Err(SurrogateError::LengthMismatch(format!("{} feature rows, model expects {}", x.rows(), model.schema.rows())));
    }
    let mut g = Graph::new();
    let p = model.bind(&mut g);
    Ok((0..x.layers())
        .map(|l| {
            let c = g.vector(x.column(l));
            let y = model.mlp_on(&mut g, &p, c);
            g.scalar_value(y)
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mitigation {
    pub values: Vec<f64>,
    pub degenerate: bool,
}

/// `y_l = noisy_l / (Π_{j<=l}(1 - p_j) + r_l) + b_l`, denominators clamped
/// away from zero.
pub fn mitigate_sequence(noisy: &[f64], p_hats: &[f64], r: &[f64], b: &[f64]) -> Result<Mitigation> {
    let len = noisy.len();
    if p_hats.len() != len || r.len() != len || b.len() < len {
        return Err(SurrogateError::LengthMismatch(format!(
            "noisy {len}, p_hats {}, r {}, b {}",
            p_hats.len(),
            r.len(),
            b.len()
        )));
    }
    let survival = crate::features::survival_products(p_hats);
    let mut degenerate = false;
    let values = (0..len)
        .map(|l| {
            let mut den = survival[l] + r[l];
            if den.abs() < DENOMINATOR_FLOOR {
                degenerate = true;
                den = if den < 0.0 { -DENOMINATOR_FLOOR } else { DENOMINATOR_FLOOR };
            }
            noisy[l] / den + b[l]
        })
        .collect();
    Ok(Mitigation { values, degenerate })
}
