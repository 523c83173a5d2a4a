#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use nnas_core::circuit::{Gate, GateId, Layer, LayeredCircuit};
use nnas_core::noise::GateNoise;
use nnas_core::pauli::{PauliChannel, PauliString};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type Cm = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Random Pauli channel with total error probability at most `max_err`.
pub fn random_pauli_channel(n: usize, max_err: f64, rng: &mut impl Rng) -> PauliChannel<f64> {
    let dim = 1usize << (2 * n);
    let raw: Vec<f64> = (1..dim).map(|_| rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    let err = rng.random::<f64>() * max_err;
    let mut w = vec![1.0 - err];
    w.extend(raw.iter().map(|x| x / total * err));
    PauliChannel::from_dense(n, &w).unwrap()
}

/// Random layered circuit of 1- and 2-qubit gates with random Pauli noise.
pub fn random_circuit(n: usize, layers: usize, max_err: f64, rng: &mut impl Rng) -> LayeredCircuit {
    let mut out = Vec::new();
    for l in 0..layers {
        let mut gates = Vec::new();
        let count = rng.random_range(1..=3);
        for i in 0..count {
            let mut g = if n >= 2 && rng.random_bool(0.4) {
                let a = rng.random_range(0..n);
                let mut b = rng.random_range(0..n - 1);
                if b >= a {
                    b += 1;
                }
                if rng.random_bool(0.5) {
                    Gate::cnot(a, b)
                } else {
                    Gate::rzz(a, b, rng.random_range(-3.0..3.0))
                }
            } else {
                let q = rng.random_range(0..n);
                let angle = rng.random_range(-3.0..3.0);
                match rng.random_range(0..4) {
                    0 => Gate::rx(q, angle),
                    1 => Gate::ry(q, angle),
                    2 => Gate::rz(q, angle),
                    _ => Gate::h(q),
                }
            };
            let id = GateId { layer: l, index: i };
            g.noise = Some(GateNoise::new(id, random_pauli_channel(g.qubits.len(), max_err, rng)));
            gates.push(g);
        }
        out.push(Layer { gates });
    }
    LayeredCircuit::new(n, out, PauliString::single(n, n - 1, nnas_core::pauli::Pauli::Z)).unwrap()
}

/// Random unitary from the QR decomposition of a complex Gaussian matrix.
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> Cm {
    let m = Cm::from_fn(dim, dim, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    m.qr().q()
}

// Independent state-vector simulator: single-qubit matrices written out by
// hand and applied by explicit index manipulation.

pub fn one_qubit(kind: &str, theta: f64) -> [[Complex64; 2]; 2] {
    let (co, si) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match kind {
        "RX" => [[c(co, 0.0), c(0.0, -si)], [c(0.0, -si), c(co, 0.0)]],
        "RY" => [[c(co, 0.0), c(-si, 0.0)], [c(si, 0.0), c(co, 0.0)]],
        "RZ" => [[c(co, -si), c(0.0, 0.0)], [c(0.0, 0.0), c(co, si)]],
        "H" => [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]],
        _ => unreachable!(),
    }
}

pub fn apply_one(psi: &mut DVector<Complex64>, q: usize, m: [[Complex64; 2]; 2]) {
    for b in 0..psi.len() {
        if b >> q & 1 == 0 {
            let b1 = b | 1 << q;
            let (a0, a1) = (psi[b], psi[b1]);
            psi[b] = m[0][0] * a0 + m[0][1] * a1;
            psi[b1] = m[1][0] * a0 + m[1][1] * a1;
        }
    }
}

pub fn apply_cnot(psi: &mut DVector<Complex64>, control: usize, target: usize) {
    for b in 0..psi.len() {
        if b >> control & 1 == 1 && b >> target & 1 == 0 {
            psi.swap_rows(b, b | 1 << target);
        }
    }
}

/// `exp(-i θ/2 Z_a Z_b)`.
pub fn apply_rzz(psi: &mut DVector<Complex64>, a: usize, b: usize, theta: f64) {
    for i in 0..psi.len() {
        let parity = (i >> a & 1) ^ (i >> b & 1);
        let s = if parity == 0 { -1.0 } else { 1.0 };
        psi[i] *= c((theta / 2.0).cos(), s * (theta / 2.0).sin());
    }
}

pub fn expect_z(psi: &DVector<Complex64>, q: usize) -> f64 {
    psi.iter().enumerate().map(|(b, a)| if b >> q & 1 == 0 { a.norm_sqr() } else { -a.norm_sqr() }).sum()
}

pub fn expect_all_x(psi: &DVector<Complex64>) -> f64 {
    let flip = psi.len() - 1;
    psi.iter().enumerate().map(|(b, a)| (a.conj() * psi[b ^ flip]).re).sum()
}

pub fn zero_state(n: usize) -> DVector<Complex64> {
    let mut v = DVector::from_element(1 << n, c(0.0, 0.0));
    v[0] = c(1.0, 0.0);
    v
}
