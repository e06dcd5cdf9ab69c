//! Shared helpers for unit tests.

use crate::circuit::{Gate, Layer, LayeredCircuit};
use crate::clifford::SingleQubitClifford;

/// Two qubits with a non-trivial, non-uniform output distribution.
pub(crate) fn hadamard_pair_circuit() -> LayeredCircuit {
    LayeredCircuit::new(
        2,
        vec![
            Layer::Local { gates: vec![Gate::Clifford(SingleQubitClifford::H), Gate::Rx(0.8)] },
            Layer::Entangling { edges: vec![(0, 1)] },
            Layer::Local { gates: vec![Gate::Ry(0.3), Gate::Clifford(SingleQubitClifford::H)] },
        ],
    )
    .unwrap()
}

/// Pearson goodness-of-fit at a one-in-a-million false alarm rate.
///
/// Outcomes with zero expected probability must never appear. Bins expected
/// to hold fewer than five counts are pooled.
pub(crate) fn assert_chi_squared_consistent(counts: &[u64], probs: &[f64]) {
    assert_eq!(counts.len(), probs.len());
    let total: u64 = counts.iter().sum();
    let shots = total as f64;
    let (mut stat, mut bins) = (0.0, 0usize);
    let (mut pooled_obs, mut pooled_exp) = (0.0, 0.0);
    for (&k, &p) in counts.iter().zip(probs) {
        if p < 1e-12 {
            assert_eq!(k, 0, "outcome with zero probability observed");
            continue;
        }
        let e = p * shots;
        if e < 5.0 {
            pooled_obs += k as f64;
            pooled_exp += e;
        } else {
            stat += (k as f64 - e).powi(2) / e;
            bins += 1;
        }
    }
    if pooled_exp > 0.0 {
        stat += (pooled_obs - pooled_exp).powi(2) / pooled_exp;
        bins += 1;
    }
    if bins < 2 {
        return;
    }
    // Wilson-Hilferty upper quantile, z for 1e-6.
    let k = (bins - 1) as f64;
    let z = 4.753;
    let critical = k * (1.0 - 2.0 / (9.0 * k) + z * (2.0 / (9.0 * k)).sqrt()).powi(3);
    assert!(stat < critical, "chi-squared {stat:.2} exceeds {critical:.2} with {k} dof");
}

/// Random valid circuit with `layers` layers on `n` qubits. Entangling
/// layers are random matchings; single-qubit gates are random Cliffords, or
/// a mix of rotations and Cliffords when `clifford_only` is false.
pub(crate) fn random_circuit<R: rand::Rng>(rng: &mut R, n: usize, layers: usize, clifford_only: bool) -> LayeredCircuit {
    use rand::seq::SliceRandom;
    let mut out = Vec::with_capacity(layers);
    for k in 0..layers {
        if k % 2 == 0 {
            let gates = (0..n)
                .map(|_| {
                    let cl = Gate::Clifford(SingleQubitClifford::new(rng.gen_range(0..24)).unwrap());
                    if clifford_only {
                        return cl;
                    }
                    let t = rng.gen_range(-3.2..3.2);
                    match rng.gen_range(0..4) {
                        0 => cl,
                        1 => Gate::Rx(t),
                        2 => Gate::Ry(t),
                        _ => Gate::Rz(t).then(&Gate::Ry(rng.gen_range(-3.2..3.2))),
                    }
                })
                .collect();
            out.push(Layer::Local { gates });
        } else {
            let mut qubits: Vec<usize> = (0..n).collect();
            qubits.shuffle(rng);
            let pairs = rng.gen_range(0..=n / 2);
            let edges = qubits.chunks_exact(2).take(pairs).map(|p| (p[0].min(p[1]), p[0].max(p[1]))).collect();
            out.push(Layer::Entangling { edges });
        }
    }
    LayeredCircuit::new(n, out).unwrap()
}
