//! Layered circuits: gates, layer structure, builders for the Trotterized
//! Ising chain and the GHZ phase-estimation circuit.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::noise::GateNoise;
use crate::pauli::{Pauli, PauliString};
use crate::scalar::{cx, lit, Scalar, C};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    RX,
    RY,
    RZ,
    RZZ,
    CNOT,
    H,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::RZZ | GateKind::CNOT => 2,
            _ => 1,
        }
    }

    pub fn is_rotation(self) -> bool {
        matches!(self, GateKind::RX | GateKind::RY | GateKind::RZ)
    }
}

/// Position of a gate inside a [`LayeredCircuit`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GateId {
    pub layer: usize,
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    /// For CNOT, `[control, target]`.
    pub qubits: Vec<usize>,
    #[serde(default)]
    pub angle: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<GateNoise>,
}

impl Gate {
    fn make(kind: GateKind, qubits: Vec<usize>, angle: f64) -> Self {
        Self { kind, qubits, angle, noise: None }
    }

    pub fn rx(q: usize, angle: f64) -> Self {
        Self::make(GateKind::RX, vec![q], angle)
    }
    pub fn ry(q: usize, angle: f64) -> Self {
        Self::make(GateKind::RY, vec![q], angle)
    }
    pub fn rz(q: usize, angle: f64) -> Self {
        Self::make(GateKind::RZ, vec![q], angle)
    }
    pub fn h(q: usize) -> Self {
        Self::make(GateKind::H, vec![q], 0.0)
    }
    pub fn cnot(control: usize, target: usize) -> Self {
        Self::make(GateKind::CNOT, vec![control, target], 0.0)
    }
    pub fn rzz(a: usize, b: usize, angle: f64) -> Self {
        Self::make(GateKind::RZZ, vec![a, b], angle)
    }

    /// Local unitary; for two-qubit gates the local basis index is
    /// `bit(qubits[0]) + 2 * bit(qubits[1])`.
    pub fn local_unitary<T: Scalar>(&self) -> DMatrix<C<T>> {
        local_unitary(self.kind, self.angle)
    }

    /// The gate as a `2^n x 2^n` matrix on the full register.
    pub fn full_unitary<T: Scalar>(&self, n: usize) -> DMatrix<C<T>> {
        embed_unitary(&self.local_unitary::<T>(), &self.qubits, n)
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.qubits.len() != self.kind.arity() {
            return Err(CoreError::InvalidCircuit(format!(
                "{:?} expects {} qubits, got {:?}",
                self.kind,
                self.kind.arity(),
                self.qubits
            )));
        }
        if self.qubits.iter().any(|&q| q >= n) {
            return Err(CoreError::InvalidCircuit(format!("qubits {:?} exceed register of {n}", self.qubits)));
        }
        if self.qubits.len() == 2 && self.qubits[0] == self.qubits[1] {
            return Err(CoreError::InvalidCircuit("two-qubit gate on a single wire".into()));
        }
        if !self.angle.is_finite() {
            return Err(CoreError::InvalidCircuit("non-finite angle".into()));
        }
        Ok(())
    }
}

pub fn local_unitary<T: Scalar>(kind: GateKind, angle: f64) -> DMatrix<C<T>> {
    let half: T = lit(angle / 2.0);
    let (c, s) = (half.cos(), half.sin());
    let z = T::zero();
    let o = T::one();
    match kind {
        GateKind::RX => DMatrix::from_row_slice(2, 2, &[cx(c, z), cx(z, -s), cx(z, -s), cx(c, z)]),
        GateKind::RY => DMatrix::from_row_slice(2, 2, &[cx(c, z), cx(-s, z), cx(s, z), cx(c, z)]),
        GateKind::RZ => DMatrix::from_row_slice(2, 2, &[cx(c, -s), cx(z, z), cx(z, z), cx(c, s)]),
        GateKind::H => {
            let r: T = lit(FRAC_1_SQRT_2);
            DMatrix::from_row_slice(2, 2, &[cx(r, z), cx(r, z), cx(r, z), cx(-r, z)])
        }
        GateKind::CNOT => {
            let mut m = DMatrix::zeros(4, 4);
            m[(0, 0)] = cx(o, z);
            m[(2, 2)] = cx(o, z);
            m[(3, 1)] = cx(o, z);
            m[(1, 3)] = cx(o, z);
            m
        }
        GateKind::RZZ => {
            let even = cx(c, -s);
            let odd = cx(c, s);
            let mut m = DMatrix::zeros(4, 4);
            m[(0, 0)] = even;
            m[(1, 1)] = odd;
            m[(2, 2)] = odd;
            m[(3, 3)] = even;
            m
        }
    }
}

/// Lifts a local operator on `targets` to the full `n`-qubit register.
pub fn embed_unitary<T: Scalar>(local: &DMatrix<C<T>>, targets: &[usize], n: usize) -> DMatrix<C<T>> {
    let dim = 1usize << n;
    let k = targets.len();
    let mut full = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut lc = 0usize;
        for (j, &t) in targets.iter().enumerate() {
            lc |= ((col >> t) & 1) << j;
        }
        for lr in 0..(1usize << k) {
            let v = local[(lr, lc)];
            if v.re == T::zero() && v.im == T::zero() {
                continue;
            }
            let mut row = col;
            for (j, &t) in targets.iter().enumerate() {
                row = (row & !(1 << t)) | (((lr >> j) & 1) << t);
            }
            full[(row, col)] = v;
        }
    }
    full
}

/// Ordered gates applied one after another.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Layer {
    pub gates: Vec<Gate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayeredCircuit {
    pub qubits: usize,
    pub layers: Vec<Layer>,
    pub observable: PauliString,
}

impl LayeredCircuit {
    pub fn new(qubits: usize, layers: Vec<Layer>, observable: PauliString) -> Result<Self> {
        let c = Self { qubits, layers, observable };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(CoreError::InvalidCircuit("circuit needs at least one layer".into()));
        }
        if self.observable.qubits() != self.qubits {
            return Err(CoreError::InvalidCircuit("observable width differs from register".into()));
        }
        self.gates().try_for_each(|g| g.validate(self.qubits))
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.layers.iter().flat_map(|l| l.gates.iter())
    }

    pub fn gates_with_ids(&self) -> impl Iterator<Item = (GateId, &Gate)> {
        self.layers.iter().enumerate().flat_map(|(l, layer)| {
            layer.gates.iter().enumerate().map(move |(i, g)| (GateId { layer: l, index: i }, g))
        })
    }

    pub fn gate_mut(&mut self, id: GateId) -> Option<&mut Gate> {
        self.layers.get_mut(id.layer)?.gates.get_mut(id.index)
    }

    /// Replaces every RZZ by `CNOT · RZ(target) · CNOT`.
    pub fn compiled(&self) -> LayeredCircuit {
        let layers = self
            .layers
            .iter()
            .map(|layer| Layer {
                gates: layer
                    .gates
                    .iter()
                    .flat_map(|g| match g.kind {
                        GateKind::RZZ => {
                            let (a, b) = (g.qubits[0], g.qubits[1]);
                            vec![Gate::cnot(a, b), Gate::rz(b, g.angle), Gate::cnot(a, b)]
                        }
                        _ => vec![g.clone()],
                    })
                    .collect(),
            })
            .collect();
        LayeredCircuit { qubits: self.qubits, layers, observable: self.observable.clone() }
    }

    pub fn is_fully_noisy(&self) -> bool {
        self.gates().all(|g| g.noise.is_some())
    }

    pub fn without_noise(&self) -> LayeredCircuit {
        let mut c = self.clone();
        for layer in &mut c.layers {
            for g in &mut layer.gates {
                g.noise = None;
            }
        }
        c
    }

    /// First `depth` layers.
    pub fn prefix(&self, depth: usize) -> LayeredCircuit {
        let mut c = self.clone();
        c.layers.truncate(depth.max(1));
        c
    }

    /// Per-gate effectiveness factors of one layer (0 for noiseless gates).
    pub fn layer_factors(&self, layer: usize) -> Vec<f64> {
        self.layers[layer].gates.iter().map(|g| g.noise.as_ref().map_or(0.0, |n| n.p)).collect()
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates().filter(|g| g.qubits.len() == 2).count()
    }

    /// Noiseless unitary of one layer on the full register.
    pub fn layer_unitary<T: Scalar>(&self, layer: usize) -> DMatrix<C<T>> {
        let dim = 1usize << self.qubits;
        self.layers[layer]
            .gates
            .iter()
            .fold(DMatrix::identity(dim, dim), |acc, g| g.full_unitary::<T>(self.qubits) * acc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("circuit serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: LayeredCircuit =
            serde_json::from_str(s).map_err(|e| CoreError::InvalidCircuit(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }
}

/// First-order Trotterization of the transverse-field Ising chain
/// `H = -J Σ Z_j Z_{j+1} + h Σ X_j`: each layer is `RX(2 h dt)` on every
/// qubit followed by the `RZZ(-2 J dt)` chain. Observable: `Z` on the last
/// qubit.
pub fn build_ising_trotter(n: usize, coupling: f64, field: f64, dt: f64, steps: usize) -> Result<LayeredCircuit> {
    if n < 2 {
        return Err(CoreError::InvalidArgument("Ising chain needs at least 2 qubits".into()));
    }
    if steps < 1 {
        return Err(CoreError::InvalidArgument("at least one Trotter step".into()));
    }
    let layer = Layer {
        gates: (0..n)
            .map(|q| Gate::rx(q, 2.0 * field * dt))
            .chain((0..n - 1).map(|q| Gate::rzz(q, q + 1, -2.0 * coupling * dt)))
            .collect(),
    };
    LayeredCircuit::new(n, vec![layer; steps], PauliString::single(n, n - 1, Pauli::Z))
}

/// GHZ preparation followed by `U(θ) = exp(-iθ/2 Σ Z_i)`, observable `X^⊗n`.
///
/// Each CNOT of the preparation chain is one layer; the Hadamard joins the
/// first layer and the RZ column the last. For `n = 1` the single layer is
/// `H, RZ(θ)`.
pub fn build_ghz_metrology(n: usize, theta: f64) -> Result<LayeredCircuit> {
    if n < 1 {
        return Err(CoreError::InvalidArgument("GHZ needs at least 1 qubit".into()));
    }
    let mut layers: Vec<Layer> = if n == 1 {
        vec![Layer { gates: vec![Gate::h(0)] }]
    } else {
        (0..n - 1).map(|i| Layer { gates: vec![Gate::cnot(i, i + 1)] }).collect()
    };
    if n > 1 {
        layers[0].gates.insert(0, Gate::h(0));
    }
    let last = layers.len() - 1;
    layers[last].gates.extend((0..n).map(|q| Gate::rz(q, theta)));
    LayeredCircuit::new(n, layers, PauliString::uniform(n, Pauli::X))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trotter_structure() {
        let c = build_ising_trotter(2, 0.6, 1.0, 0.5, 1).unwrap();
        let kinds: Vec<_> = c.gates().map(|g| g.kind).collect();
        assert_eq!(kinds, vec![GateKind::RX, GateKind::RX, GateKind::RZZ]);
        let compiled = c.compiled();
        let count = |k| compiled.gates().filter(|g| g.kind == k).count();
        assert_eq!((count(GateKind::RX), count(GateKind::CNOT), count(GateKind::RZ)), (2, 2, 1));
        assert_eq!(c.observable.to_string(), "IZ");
        assert!(build_ising_trotter(1, 1.0, 1.0, 1.0, 1).is_err());
        assert!(build_ising_trotter(2, 1.0, 1.0, 1.0, 0).is_err());
    }

    #[test]
    fn ghz_structure() {
        let c = build_ghz_metrology(3, 0.5).unwrap();
        assert_eq!(c.depth(), 2);
        assert_eq!(c.layers[0].gates[0].kind, GateKind::H);
        assert_eq!(c.layers[1].gates.len(), 4);
        let one = build_ghz_metrology(1, 0.5).unwrap();
        assert_eq!(one.depth(), 1);
        assert_eq!(one.gates().count(), 2);
    }

    #[test]
    fn rzz_matches_decomposition() {
        let rzz = Gate::rzz(0, 1, 0.37).full_unitary::<f64>(2);
        let c = Gate::cnot(0, 1).full_unitary::<f64>(2);
        let rz = Gate::rz(1, 0.37).full_unitary::<f64>(2);
        assert!((&c * rz * &c - rzz).norm() < 1e-14);
    }

    #[test]
    fn json_round_trip() {
        let c = build_ising_trotter(3, 0.6, 1.0, 0.7, 2).unwrap();
        let back = LayeredCircuit::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert!(c.to_json().contains("\"kind\":\"RX\""));
        assert!(LayeredCircuit::from_json(r#"{"qubits":1,"layers":[],"observable":"Z"}"#).is_err());
    }
}
