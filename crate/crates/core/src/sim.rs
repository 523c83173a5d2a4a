//! Exact density-matrix simulation with per-gate Pauli noise, and shot
//! sampling of Pauli expectation values.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::circuit::{GateId, LayeredCircuit};
use crate::error::{CoreError, Result};
use crate::pauli::{PauliAction, PauliChannel, PauliString};
use crate::scalar::{lit, Scalar, C};

/// Largest register the density-matrix simulator accepts.
pub const MAX_SIM_QUBITS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimMode {
    Noiseless,
    Noisy,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T: Scalar> {
    qubits: usize,
    matrix: DMatrix<C<T>>,
}

impl<T: Scalar> DensityMatrix<T> {
    /// `|0...0><0...0|`.
    pub fn zero_state(qubits: usize) -> Self {
        let dim = 1usize << qubits;
        let mut matrix = DMatrix::zeros(dim, dim);
        matrix[(0, 0)] = C::new(T::one(), T::zero());
        Self { qubits, matrix }
    }

    pub fn maximally_mixed(qubits: usize) -> Self {
        let dim = 1usize << qubits;
        let w: T = lit(1.0 / dim as f64);
        Self { qubits, matrix: DMatrix::identity(dim, dim) * C::new(w, T::zero()) }
    }

    pub fn from_matrix(matrix: DMatrix<C<T>>) -> Result<Self> {
        let dim = matrix.nrows();
        if !dim.is_power_of_two() || matrix.ncols() != dim {
            return Err(CoreError::InvalidArgument("density matrix must be 2^n square".into()));
        }
        Ok(Self { qubits: dim.trailing_zeros() as usize, matrix })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn matrix(&self) -> &DMatrix<C<T>> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C<T>> {
        self.matrix
    }

    pub fn trace(&self) -> C<T> {
        self.matrix.trace()
    }

    pub fn hermiticity_error(&self) -> T {
        let d = &self.matrix - self.matrix.adjoint();
        d.iter().fold(T::zero(), |acc, z| acc.max((z.re * z.re + z.im * z.im).sqrt()))
    }

    pub fn min_eigenvalue(&self) -> T {
        let herm = (&self.matrix + self.matrix.adjoint()) * C::new(lit::<T>(0.5), T::zero());
        nalgebra::SymmetricEigen::new(herm)
            .eigenvalues
            .iter()
            .fold(T::max_value().unwrap_or_else(T::one), |acc, &e| acc.min(e))
    }

    /// `Re Tr[P rho]`.
    pub fn expectation(&self, observable: &PauliString) -> T {
        PauliAction::from_string(observable).trace_with(&self.matrix).re
    }

    /// `rho -> U rho U^dagger` for a local unitary on `targets`.
    pub fn apply_unitary(&mut self, local: &DMatrix<C<T>>, targets: &[usize]) {
        let k = targets.len();
        let block = 1usize << k;
        let dim = self.matrix.nrows();
        let mask: usize = targets.iter().map(|&t| 1usize << t).sum();
        let offsets: Vec<usize> = (0..block)
            .map(|j| targets.iter().enumerate().map(|(b, &t)| ((j >> b) & 1) << t).sum())
            .collect();
        let mut buf = vec![C::new(T::zero(), T::zero()); block];
        // left: M <- U M
        for col in 0..dim {
            for base in (0..dim).filter(|r| r & mask == 0) {
                for (j, &o) in offsets.iter().enumerate() {
                    buf[j] = self.matrix[(base | o, col)];
                }
                for (i, &o) in offsets.iter().enumerate() {
                    let mut acc = C::new(T::zero(), T::zero());
                    for (j, v) in buf.iter().enumerate() {
                        acc += local[(i, j)] * v;
                    }
                    self.matrix[(base | o, col)] = acc;
                }
            }
        }
        // right: M <- M U^dagger
        for row in 0..dim {
            for base in (0..dim).filter(|c| c & mask == 0) {
                for (j, &o) in offsets.iter().enumerate() {
                    buf[j] = self.matrix[(row, base | o)];
                }
                for (i, &o) in offsets.iter().enumerate() {
                    let mut acc = C::new(T::zero(), T::zero());
                    for (j, v) in buf.iter().enumerate() {
                        acc += v * local[(i, j)].conj();
                    }
                    self.matrix[(row, base | o)] = acc;
                }
            }
        }
    }

    /// `rho -> sum_i w_i P_i rho P_i` with full-register Pauli indices.
    /// Weights may be negative (quasi-probability maps).
    pub fn apply_pauli_mixture(&mut self, weights: &[(usize, T)]) {
        let dim = self.matrix.nrows();
        let mut out = DMatrix::<C<T>>::zeros(dim, dim);
        for &(idx, w) in weights {
            if w == T::zero() {
                continue;
            }
            let act = PauliAction::from_index(idx);
            let wc = C::new(w, T::zero());
            for c in 0..dim {
                let (c2, phc) = act.apply(c);
                let pc = crate::pauli::phase_conj::<T>(phc);
                for r in 0..dim {
                    let (r2, phr) = act.apply(r);
                    let pr = crate::pauli::phase_of::<T>(phr);
                    out[(r2, c2)] += pr * pc * self.matrix[(r, c)] * wc;
                }
            }
        }
        self.matrix = out;
    }

    /// Applies a channel acting on `targets`.
    pub fn apply_channel(&mut self, channel: &PauliChannel<T>, targets: &[usize]) -> Result<()> {
        let embedded = channel.embed(self.qubits, targets)?;
        let weights: Vec<_> = embedded.iter().collect();
        self.apply_pauli_mixture(&weights);
        Ok(())
    }

    /// `rho -> P rho P` for a single Pauli string.
    pub fn apply_pauli(&mut self, pauli_index: usize) {
        self.apply_pauli_mixture(&[(pauli_index, T::one())]);
    }

    /// Panics in debug builds if the state is not a valid density matrix.
    pub fn debug_validate(&self) {
        if cfg!(debug_assertions) {
            let tol: T = lit(1e-9);
            debug_assert!(self.hermiticity_error() < tol, "state lost hermiticity");
            debug_assert!((self.trace().re - T::one()).abs() < tol, "state lost unit trace");
            debug_assert!(self.min_eigenvalue() > -tol, "state lost positivity");
        }
    }
}

/// Called after every gate (and after its noise, if any).
pub trait GateHook<T: Scalar> {
    fn after_gate(&mut self, id: GateId, state: &mut DensityMatrix<T>) -> Result<()>;
}

pub struct NoHook;

impl<T: Scalar> GateHook<T> for NoHook {
    fn after_gate(&mut self, _: GateId, _: &mut DensityMatrix<T>) -> Result<()> {
        Ok(())
    }
}

fn check_cap(circuit: &LayeredCircuit) -> Result<()> {
    if circuit.qubits > MAX_SIM_QUBITS {
        return Err(CoreError::QubitCapExceeded {
            what: "density-matrix simulation",
            cap: MAX_SIM_QUBITS,
            got: circuit.qubits,
        });
    }
    Ok(())
}

/// Runs the circuit from `|0...0>` and returns the state at every layer
/// boundary. Noisy mode applies each gate's channel right after the gate.
pub fn simulate_states_with<T: Scalar>(
    circuit: &LayeredCircuit,
    mode: SimMode,
    hook: &mut impl GateHook<T>,
) -> Result<Vec<DensityMatrix<T>>> {
    check_cap(circuit)?;
    let mut state = DensityMatrix::<T>::zero_state(circuit.qubits);
    let mut out = Vec::with_capacity(circuit.depth());
    for (l, layer) in circuit.layers.iter().enumerate() {
        for (g, gate) in layer.gates.iter().enumerate() {
            state.apply_unitary(&gate.local_unitary::<T>(), &gate.qubits);
            if mode == SimMode::Noisy {
                let noise = gate.noise.as_ref().ok_or(CoreError::MissingNoise { layer: l, index: g })?;
                let ch = convert_channel::<T>(&noise.channel);
                state.apply_channel(&ch, &gate.qubits)?;
            }
            hook.after_gate(GateId { layer: l, index: g }, &mut state)?;
        }
        out.push(state.clone());
    }
    Ok(out)
}

pub fn simulate_states<T: Scalar>(circuit: &LayeredCircuit, mode: SimMode) -> Result<Vec<DensityMatrix<T>>> {
    simulate_states_with(circuit, mode, &mut NoHook)
}

/// Per-layer expectation values `Tr[O rho_l]`.
pub fn simulate<T: Scalar>(circuit: &LayeredCircuit, mode: SimMode) -> Result<Vec<T>> {
    Ok(simulate_states::<T>(circuit, mode)?
        .iter()
        .map(|s| s.expectation(&circuit.observable))
        .collect())
}

pub(crate) fn convert_channel<T: Scalar>(ch: &PauliChannel<f64>) -> PauliChannel<T> {
    let w: Vec<T> = ch.dense().into_iter().map(lit::<T>).collect();
    PauliChannel::from_dense(ch.qubits(), &w).expect("converted channel stays valid")
}

/// Empirical `2k/N - 1` from `N` Bernoulli outcomes with
/// `P(+1) = (1 + <O>)/2`.
pub fn sample_shots<R: Rng + ?Sized>(expectation: f64, shots: u64, rng: &mut R) -> Result<f64> {
    if shots == 0 {
        return Err(CoreError::InvalidArgument("at least one shot".into()));
    }
    if !(expectation.abs() <= 1.0 + 1e-9) {
        return Err(CoreError::ExpectationOutOfRange(expectation));
    }
    if expectation.abs() > 1.0 {
        log::warn!("clamping expectation {expectation} into [-1, 1]");
    }
    let e = expectation.clamp(-1.0, 1.0);
    let p = (1.0 + e) / 2.0;
    let k = Binomial::new(shots, p).expect("p in [0,1]").sample(rng);
    Ok(2.0 * k as f64 / shots as f64 - 1.0)
}

pub fn sample_shots_seeded(expectation: f64, shots: u64, seed: u64) -> Result<f64> {
    sample_shots(expectation, shots, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_ghz_metrology, build_ising_trotter};
    use crate::noise::{attach_noise, DecoherenceSpec};

    #[test]
    fn ghz_single_qubit_is_cosine() {
        for theta in [0.0, 0.3, 1.2, 2.9] {
            let c = build_ghz_metrology(1, theta).unwrap();
            let y = simulate::<f64>(&c, SimMode::Noiseless).unwrap();
            assert!((y[0] - f64::cos(theta)).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_angles_keep_z() {
        let c = build_ising_trotter(3, 0.0, 0.0, 0.1, 4).unwrap();
        let y = simulate::<f64>(&c, SimMode::Noiseless).unwrap();
        assert!(y.iter().all(|v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn noisy_mode_requires_noise() {
        let c = build_ising_trotter(2, 0.6, 1.0, 0.5, 1).unwrap();
        assert!(matches!(simulate::<f64>(&c, SimMode::Noisy), Err(CoreError::MissingNoise { .. })));
    }

    #[test]
    fn qubit_cap() {
        let c = build_ghz_metrology(7, 0.1).unwrap();
        assert!(matches!(simulate::<f64>(&c, SimMode::Noiseless), Err(CoreError::QubitCapExceeded { .. })));
    }

    #[test]
    fn full_depolarizing_kills_signal() {
        let c = build_ising_trotter(2, 0.6, 1.0, 0.5, 2).unwrap().compiled();
        let mut noisy = c.clone();
        let dep1 = PauliChannel::new(1, (0..4).map(|i| (i, 0.25))).unwrap();
        let dep2 = PauliChannel::new(2, (0..16).map(|i| (i, 1.0 / 16.0))).unwrap();
        for (id, g) in c.gates_with_ids() {
            let ch = if g.qubits.len() == 1 { dep1.clone() } else { dep2.clone() };
            noisy.gate_mut(id).unwrap().noise = Some(crate::noise::GateNoise::new(id, ch));
        }
        let y = simulate::<f64>(&noisy, SimMode::Noisy).unwrap();
        assert!(y.iter().all(|v| v.abs() < 1e-12), "{y:?}");
    }

    #[test]
    fn noisy_states_stay_physical() {
        let c = build_ising_trotter(3, 0.6, 1.0, 0.9, 3).unwrap().compiled();
        let c = attach_noise(&c, &DecoherenceSpec::default().with_seed(3)).unwrap();
        for s in simulate_states::<f64>(&c, SimMode::Noisy).unwrap() {
            assert!(s.hermiticity_error() < 1e-12);
            assert!((s.trace().re - 1.0).abs() < 1e-12);
            assert!(s.min_eigenvalue() > -1e-10);
            assert!(s.expectation(&c.observable).abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn shots_degenerate_and_deterministic() {
        assert_eq!(sample_shots_seeded(1.0, 17, 1).unwrap(), 1.0);
        assert_eq!(sample_shots_seeded(-1.0, 17, 1).unwrap(), -1.0);
        assert_eq!(sample_shots_seeded(0.2, 8192, 9).unwrap(), sample_shots_seeded(0.2, 8192, 9).unwrap());
        assert!(sample_shots_seeded(1.5, 10, 0).is_err());
        assert_eq!(sample_shots_seeded(1.0 + 1e-12, 10, 0).unwrap(), 1.0);
        assert!(sample_shots_seeded(0.0, 0, 0).is_err());
    }

    #[test]
    fn shots_converge() {
        let v = sample_shots_seeded(0.3, 10_000_000, 5).unwrap();
        assert!((v - 0.3).abs() < 1e-3);
    }
}
