use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{local_unitary, GateKind};
use crate::error::{CoreError, Result};
use crate::pauli::{commutes, PauliChannel};
use crate::sim::{sample_shots, DensityMatrix};

/// Gate repetition counts used by the sampled calibration.
pub const SPL_REPETITIONS: [u32; 5] = [2, 4, 6, 8, 10];

const TERMS: usize = 15;
const NEGATIVE_LAMBDA_TOL: f64 = 1e-8;

/// Sparse Pauli-Lindblad model of two-qubit gate noise:
/// `Π_k (ω_k I + (1 - ω_k) P_k)` with `ω_k = (1 + e^{-2λ_k}) / 2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplModel {
    /// `λ_k` for the non-identity Paulis `k = 1..15`.
    pub lambdas: Vec<f64>,
    /// Set when the least-squares fit produced a negative `λ` that was
    /// clamped to zero.
    #[serde(default)]
    pub clamped: bool,
}

impl SplModel {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.len() != TERMS {
            return Err(CoreError::DimensionMismatch { expected: TERMS, got: lambdas.len() });
        }
        if lambdas.iter().any(|&l| !(l >= 0.0) || !l.is_finite()) {
            return Err(CoreError::InvalidArgument("SPL coefficients must be finite and nonnegative".into()));
        }
        Ok(Self { lambdas, clamped: false })
    }

    /// `ω_k` in `(0.5, 1]`.
    pub fn omegas(&self) -> Vec<f64> {
        self.lambdas.iter().map(|l| (1.0 + (-2.0 * l).exp()) / 2.0).collect()
    }

    /// `f_a = exp(-2 Σ_{k: {a,k} anticommute} λ_k)` for all 16 Paulis.
    pub fn fidelities(&self) -> Vec<f64> {
        (0..16)
            .map(|a| {
                let s: f64 = (1..16).filter(|&k| !commutes(a, k)).map(|k| self.lambdas[k - 1]).sum();
                (-2.0 * s).exp()
            })
            .collect()
    }

    pub fn channel(&self) -> Result<PauliChannel<f64>> {
        let w = PauliChannel::weights_from_fidelities(2, &self.fidelities());
        PauliChannel::new(2, w.into_iter().enumerate().map(|(i, x)| (i, x.max(0.0))))
    }

    /// PEC sampling overhead of one gate, `e^{2 Σ λ}`.
    pub fn gamma(&self) -> f64 {
        (2.0 * self.lambdas.iter().sum::<f64>()).exp()
    }
}

/// `M_{ak} = 1` when `P_a` and `P_k` anticommute (two qubits, identity
/// excluded).
pub fn anticommutation_matrix() -> DMatrix<f64> {
    DMatrix::from_fn(TERMS, TERMS, |a, k| if commutes(a + 1, k + 1) { 0.0 } else { 1.0 })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationMode {
    /// Fidelities read off the channel's PTM diagonal.
    Exact,
    /// Fidelities fitted from shot-sampled decays of `CNOT^m`.
    Sampled { shots: u64, seed: u64 },
}

/// Learns an SPL model for a noisy CNOT.
///
/// In sampled mode the noise is interleaved with CNOTs, which map `P_a` to
/// `P_σ(a)`; the decay then measures `sqrt(f_a f_σ(a))` rather than `f_a`,
/// so the fitted model is the CNOT-symmetrized one.
pub fn spl_calibrate(noise: &PauliChannel<f64>, mode: CalibrationMode) -> Result<SplModel> {
    if noise.qubits() != 2 {
        return Err(CoreError::DimensionMismatch { expected: 2, got: noise.qubits() });
    }
    let f = match mode {
        CalibrationMode::Exact => noise.fidelities(),
        CalibrationMode::Sampled { shots, seed } => sampled_fidelities(noise, shots, seed)?,
    };
    fit_lambdas(&f)
}

fn fit_lambdas(f: &[f64]) -> Result<SplModel> {
    if f[1..].iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(CoreError::Singular);
    }
    let b = DVector::from_iterator(TERMS, f[1..].iter().map(|x| -x.ln() / 2.0));
    let m = anticommutation_matrix();
    let lambdas = m.svd(true, true).solve(&b, 1e-12).map_err(|_| CoreError::Singular)?;
    let mut clamped = false;
    let lambdas = lambdas
        .iter()
        .map(|&l| {
            if l < -NEGATIVE_LAMBDA_TOL {
                clamped = true;
            }
            l.max(0.0)
        })
        .collect();
    if clamped {
        log::warn!("SPL fit produced negative coefficients; clamped to zero");
    }
    Ok(SplModel { lambdas, clamped })
}

fn sampled_fidelities(noise: &PauliChannel<f64>, shots: u64, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cnot = local_unitary::<f64>(GateKind::CNOT, 0.0);
    let mut f = vec![1.0; 16];
    for (a, fa) in f.iter_mut().enumerate().skip(1) {
        let p = crate::pauli::PauliString::from_index(2, a)?;
        let start = (DMatrix::identity(4, 4) + p.matrix::<f64>()) * num_complex::Complex::new(0.25, 0.0);
        let mut rho = DensityMatrix::from_matrix(start)?;
        let mut points = Vec::with_capacity(SPL_REPETITIONS.len());
        let mut done = 0;
        for &m in &SPL_REPETITIONS {
            while done < m {
                rho.apply_unitary(&cnot, &[0, 1]);
                rho.apply_channel(noise, &[0, 1])?;
                done += 1;
            }
            let y = sample_shots(rho.expectation(&p), shots, &mut rng)?;
            points.push((m as f64, y.max(1e-6).ln()));
        }
        // log-linear least squares: ln y = ln a0 + m ln f
        let n = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
        let my = points.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
        *fa = (sxy / sxx).exp().min(1.0);
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anticommutation_matrix_is_invertible() {
        let m = anticommutation_matrix();
        assert!(m.clone().try_inverse().is_some());
        // every non-identity Pauli anticommutes with exactly 8 of the 15
        for r in 0..TERMS {
            assert_eq!(m.row(r).sum(), 8.0);
        }
    }

    #[test]
    fn identity_noise_gives_zero_lambdas() {
        let m = spl_calibrate(&PauliChannel::identity(2), CalibrationMode::Exact).unwrap();
        assert!(m.lambdas.iter().all(|&l| l.abs() < 1e-15));
        assert!(m.fidelities().iter().all(|&f| (f - 1.0).abs() < 1e-15));
    }

    #[test]
    fn single_term_fidelities() {
        let mut l = vec![0.0; 15];
        l[4] = 0.03; // P_5
        let m = SplModel::new(l).unwrap();
        for (a, f) in m.fidelities().into_iter().enumerate() {
            let want = if commutes(a, 5) { 1.0 } else { (-0.06f64).exp() };
            assert!((f - want).abs() < 1e-15);
        }
    }

    #[test]
    fn gamma_from_lambdas() {
        let mut l = vec![0.0; 15];
        l[0] = 0.01;
        l[1] = 0.02;
        let m = SplModel::new(l).unwrap();
        assert!((m.gamma() - 0.06f64.exp()).abs() < 1e-15);
        assert!((m.gamma() - 1.0618).abs() < 1e-4);
    }

    #[test]
    fn plant_and_recover() {
        let l: Vec<f64> = (0..15).map(|k| 1e-3 * (k as f64 + 1.0) / 3.0).collect();
        let planted = SplModel::new(l.clone()).unwrap();
        let got = spl_calibrate(&planted.channel().unwrap(), CalibrationMode::Exact).unwrap();
        for (a, b) in got.lambdas.iter().zip(&l) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn sampled_calibration_is_close_for_symmetric_noise() {
        let l = vec![2e-3; 15];
        let planted = SplModel::new(l).unwrap();
        let got = spl_calibrate(
            &planted.channel().unwrap(),
            CalibrationMode::Sampled { shots: 1_000_000, seed: 3 },
        )
        .unwrap();
        for x in &got.lambdas {
            assert!((x - 2e-3).abs() < 1e-3, "{x}");
        }
    }
}
