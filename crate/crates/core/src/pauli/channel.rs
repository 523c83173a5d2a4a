use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::string::{commutes, masks, product_index, from_masks};
use crate::error::{CoreError, Result};
use crate::scalar::{lit, Scalar, C};

/// Probability-weighted mixture of Pauli conjugations,
/// `rho -> sum_i delta_i P_i rho P_i`.
///
/// Storage is sparse: an absent index has probability zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de> + Scalar"))]
pub struct PauliChannel<T> {
    qubits: usize,
    coeffs: BTreeMap<usize, T>,
}

impl<T: Scalar> PauliChannel<T> {
    /// Validates nonnegativity and normalization; zero entries are dropped.
    pub fn new(qubits: usize, coeffs: impl IntoIterator<Item = (usize, T)>) -> Result<Self> {
        let dim = 1usize << (2 * qubits);
        let mut map = BTreeMap::new();
        for (i, d) in coeffs {
            if i >= dim {
                return Err(CoreError::InvalidChannel(format!(
                    "index {i} out of range for {qubits} qubits"
                )));
            }
            if !d.is_finite() || d < T::zero() {
                return Err(CoreError::InvalidChannel(format!(
                    "coefficient {} on index {i} is negative or non-finite",
                    d.to_f64()
                )));
            }
            if d > T::zero() {
                *map.entry(i).or_insert(T::zero()) += d;
            }
        }
        let ch = Self { qubits, coeffs: map };
        let total = ch.total();
        if (total - T::one()).abs() > T::norm_tol() {
            return Err(CoreError::InvalidChannel(format!(
                "coefficients sum to {}",
                total.to_f64()
            )));
        }
        Ok(ch)
    }

    pub fn identity(qubits: usize) -> Self {
        Self { qubits, coeffs: BTreeMap::from([(0, T::one())]) }
    }

    /// Dense coefficient vector of length `4^n`.
    pub fn from_dense(qubits: usize, dense: &[T]) -> Result<Self> {
        let dim = 1usize << (2 * qubits);
        if dense.len() != dim {
            return Err(CoreError::DimensionMismatch { expected: dim, got: dense.len() });
        }
        Self::new(qubits, dense.iter().copied().enumerate())
    }

    /// `(1 - px - py - pz) I + px X + py Y + pz Z`.
    pub fn single_qubit(px: T, py: T, pz: T) -> Result<Self> {
        Self::new(1, [(0, T::one() - px - py - pz), (1, px), (2, py), (3, pz)])
    }

    /// Builds a channel from the non-identity weights, putting the remainder
    /// on the identity.
    pub fn from_errors(qubits: usize, errors: impl IntoIterator<Item = (usize, T)>) -> Result<Self> {
        let errors: Vec<_> = errors.into_iter().filter(|(i, _)| *i != 0).collect();
        let rest = errors.iter().fold(T::one(), |acc, (_, d)| acc - *d);
        Self::new(qubits, std::iter::once((0, rest)).chain(errors))
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn coefficient(&self, index: usize) -> T {
        self.coeffs.get(&index).copied().unwrap_or_else(T::zero)
    }

    pub fn identity_weight(&self) -> T {
        self.coefficient(0)
    }

    /// Total non-identity probability.
    pub fn error_probability(&self) -> T {
        self.coeffs
            .iter()
            .filter(|(&i, _)| i != 0)
            .fold(T::zero(), |acc, (_, &d)| acc + d)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.coeffs.iter().map(|(&i, &d)| (i, d))
    }

    pub fn dense(&self) -> Vec<T> {
        let mut v = vec![T::zero(); 1usize << (2 * self.qubits)];
        for (i, d) in self.iter() {
            v[i] = d;
        }
        v
    }

    fn total(&self) -> T {
        self.coeffs.values().fold(T::zero(), |acc, &d| acc + d)
    }

    /// Pauli fidelity of `P_a`: `sum_i delta_i * (+1 if [P_i, P_a] = 0 else -1)`.
    pub fn fidelity(&self, a: usize) -> T {
        self.iter().fold(T::zero(), |acc, (i, d)| {
            if commutes(i, a) {
                acc + d
            } else {
                acc - d
            }
        })
    }

    /// All `4^n` Pauli fidelities, i.e. the PTM diagonal.
    pub fn fidelities(&self) -> Vec<T> {
        (0..1usize << (2 * self.qubits)).map(|a| self.fidelity(a)).collect()
    }

    /// Inverse of [`fidelities`](Self::fidelities); the result may contain
    /// negative weights when `f` is not the spectrum of a physical channel.
    pub fn weights_from_fidelities(qubits: usize, f: &[T]) -> Vec<T> {
        let dim = 1usize << (2 * qubits);
        let scale = T::one() / lit::<T>(dim as f64);
        (0..dim)
            .map(|i| {
                f.iter().enumerate().fold(T::zero(), |acc, (a, &fa)| {
                    if commutes(i, a) {
                        acc + fa
                    } else {
                        acc - fa
                    }
                }) * scale
            })
            .collect()
    }

    /// Places a channel acting on `targets.len()` qubits onto `targets`
    /// of an `n`-qubit register. Local qubit `k` maps to `targets[k]`.
    pub fn embed(&self, n: usize, targets: &[usize]) -> Result<Self> {
        if targets.len() != self.qubits {
            return Err(CoreError::DimensionMismatch { expected: self.qubits, got: targets.len() });
        }
        if targets.iter().any(|&t| t >= n) {
            return Err(CoreError::InvalidArgument(format!("targets {targets:?} exceed {n} qubits")));
        }
        let coeffs = self
            .iter()
            .map(|(i, d)| {
                let (x, z) = masks(i);
                let (mut gx, mut gz) = (0usize, 0usize);
                for (k, &t) in targets.iter().enumerate() {
                    gx |= ((x >> k) & 1) << t;
                    gz |= ((z >> k) & 1) << t;
                }
                (from_masks(gx, gz), d)
            })
            .collect();
        Ok(Self { qubits: n, coeffs })
    }

    /// Channel `self ⊗ other` with `self` on the low qubits.
    pub fn tensor(&self, other: &PauliChannel<T>) -> Self {
        let shift = 2 * self.qubits;
        let mut coeffs = BTreeMap::new();
        for (i, a) in self.iter() {
            for (j, b) in other.iter() {
                *coeffs.entry(i | (j << shift)).or_insert(T::zero()) += a * b;
            }
        }
        Self { qubits: self.qubits + other.qubits, coeffs }
    }

    /// Sequential composition. Pauli channels commute, so the order is
    /// immaterial; the weights convolve under Pauli multiplication.
    pub fn compose(&self, other: &PauliChannel<T>) -> Result<Self> {
        if self.qubits != other.qubits {
            return Err(CoreError::DimensionMismatch { expected: self.qubits, got: other.qubits });
        }
        let a: Vec<_> = self.iter().collect();
        let b: Vec<_> = other.iter().collect();
        Ok(Self { qubits: self.qubits, coeffs: convolve(&a, &b) })
    }

    /// Kraus operators `sqrt(delta_i) P_i`.
    pub fn kraus(&self) -> Vec<DMatrix<C<T>>> {
        self.iter()
            .map(|(i, d)| {
                let p = super::PauliString::from_index(self.qubits, i).expect("index in range");
                p.matrix::<T>() * C::new(d.sqrt(), T::zero())
            })
            .collect()
    }
}

/// Convolution of two weight maps under Pauli multiplication (phases drop
/// out of conjugation). Works for signed quasi-probabilities too.
pub(crate) fn convolve<T: Scalar>(a: &[(usize, T)], b: &[(usize, T)]) -> BTreeMap<usize, T> {
    let mut out = BTreeMap::new();
    for &(i, x) in a {
        for &(j, y) in b {
            *out.entry(product_index(i, j)).or_insert(T::zero()) += x * y;
        }
    }
    out.retain(|_, v: &mut T| *v != T::zero());
    out
}
