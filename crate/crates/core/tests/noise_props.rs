use nnas_core::circuit::build_ising_trotter;
use nnas_core::noise::{
    attach_noise, single_qubit_channel, single_qubit_rates, two_qubit_channel, DecoherenceSpec, BASELINE_T1_US,
    T1_GRID_US,
};

#[test]
fn rates_vanish_without_decoherence() {
    let spec = DecoherenceSpec::new(1e300, 1e300).unwrap();
    let (x, y, z) = single_qubit_rates(&spec, 48.0).unwrap();
    assert!(x.abs() < 1e-15 && y.abs() < 1e-15 && z.abs() < 1e-15);
    let zero = DecoherenceSpec::noiseless();
    assert_eq!(two_qubit_channel(&zero).unwrap().error_probability(), 0.0);
}

#[test]
fn two_qubit_total_is_uncorrelated_square() {
    for &t1 in T1_GRID_US.iter() {
        let spec = DecoherenceSpec::scaled(t1).unwrap();
        let (x, y, z) = single_qubit_rates(&spec, spec.two_gate_time).unwrap();
        let p = x + y + z;
        let ch = two_qubit_channel(&spec).unwrap();
        assert!((ch.error_probability() - (1.0 - (1.0 - p).powi(2))).abs() < 1e-12);
        let sum: f64 = ch.dense().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }
}

#[test]
fn monotone_in_coherence_time() {
    let mut last = f64::INFINITY;
    for t1 in [5.0, 10.0, 20.0, BASELINE_T1_US, 30.0, 40.0, 80.0] {
        let spec = DecoherenceSpec::scaled(t1).unwrap();
        let p = two_qubit_channel(&spec).unwrap().error_probability();
        assert!(p < last);
        last = p;
        let single = single_qubit_channel(&spec).unwrap().error_probability();
        let (x, y, z) = single_qubit_rates(&spec, 48.0).unwrap();
        assert!(single < x + y + z);
    }
}

#[test]
fn unphysical_t2_is_rejected() {
    assert!(DecoherenceSpec::new(10.0, 25.0).is_err());
}

#[test]
fn jitter_is_bounded_and_seeded() {
    // 10 layers of 4 RX and 3 compiled RZZ (2 CNOT + 1 RZ) = 10 gates/layer
    let c = build_ising_trotter(4, 0.6, 1.0, 0.8, 100).unwrap().compiled();
    let spec = DecoherenceSpec::default().with_seed(9);
    let a = attach_noise(&c, &spec).unwrap();
    let b = attach_noise(&c, &spec).unwrap();
    assert_eq!(a, b);
    assert!(a.gates().count() >= 1000);
    let one = single_qubit_channel(&spec).unwrap();
    let two = two_qubit_channel(&spec).unwrap();
    let mut max_dev: f64 = 0.0;
    for g in a.gates() {
        let ch = &g.noise.as_ref().unwrap().channel;
        let base = if g.qubits.len() == 1 { &one } else { &two };
        for i in 1..ch.dense().len() {
            max_dev = max_dev.max((ch.coefficient(i) - base.coefficient(i)).abs());
            assert!(ch.coefficient(i) >= 0.0);
        }
        let sum: f64 = ch.dense().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }
    assert!(max_dev <= 2e-5 + 1e-18 && max_dev > 0.0);
    let other = attach_noise(&c, &DecoherenceSpec::default().with_seed(10)).unwrap();
    assert_ne!(a, other);
    let exact = attach_noise(&c, &spec.clone().with_fluctuation(0.0)).unwrap();
    for g in exact.gates().filter(|g| g.qubits.len() == 1) {
        assert_eq!(&g.noise.as_ref().unwrap().channel, &one);
    }
}

#[test]
fn spec_json_keys() {
    let spec = DecoherenceSpec::default();
    let v: serde_json::Value = serde_json::to_value(&spec).unwrap();
    for k in ["t1_us", "t2_us", "t1q_ns", "t2q_ns", "fluctuation", "seed"] {
        assert!(v.get(k).is_some(), "{k}");
    }
    let back: DecoherenceSpec = serde_json::from_value(v).unwrap();
    assert_eq!(back, spec);
}
