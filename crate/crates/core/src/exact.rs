//! Exact noisy output distributions by density-matrix evolution.
//!
//! Independent of the Monte Carlo sampler: channels are applied as mixtures
//! rather than sampled, so this serves as its reference on small registers.

use num_complex::Complex64;

use crate::circuit::{Layer, LayeredCircuit};
use crate::linalg::Mat2;
use crate::noise::{FaultSpec, NoiseBehaviour, NoiseError, PauliDistribution};
use crate::observable::PauliObservable;

/// Largest register the density-matrix oracle accepts.
pub const EXACT_MAX_QUBITS: usize = 6;

struct Density {
    dim: usize,
    data: Vec<Complex64>,
}

fn parity_sign(bits: usize, mask: usize) -> f64 {
    if (bits & mask).count_ones() % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

impl Density {
    fn zero(n: usize) -> Self {
        let dim = 1 << n;
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        data[0] = Complex64::new(1.0, 0.0);
        Density { dim, data }
    }

    fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    fn single(&mut self, q: usize, u: &Mat2) {
        let [[a, b], [c, d]] = u.0;
        let s = 1 << q;
        let dim = self.dim;
        // U acting on the row index.
        for j in 0..dim {
            for i in (0..dim).filter(|i| i & s == 0) {
                let (lo, hi) = (self.data[i * dim + j], self.data[(i | s) * dim + j]);
                self.data[i * dim + j] = a * lo + b * hi;
                self.data[(i | s) * dim + j] = c * lo + d * hi;
            }
        }
        // U† acting on the column index.
        for i in 0..dim {
            for j in (0..dim).filter(|j| j & s == 0) {
                let (lo, hi) = (self.data[i * dim + j], self.data[i * dim + (j | s)]);
                self.data[i * dim + j] = lo * a.conj() + hi * b.conj();
                self.data[i * dim + (j | s)] = lo * c.conj() + hi * d.conj();
            }
        }
    }

    fn cz(&mut self, a: usize, b: usize) {
        let mask = (1 << a) | (1 << b);
        let dim = self.dim;
        for i in 0..dim {
            for j in 0..dim {
                if (i & mask == mask) != (j & mask == mask) {
                    self.data[i * dim + j] = -self.data[i * dim + j];
                }
            }
        }
    }

    fn conjugated_by(&self, x: usize, z: usize) -> Vec<Complex64> {
        let dim = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                out[(i ^ x) * dim + (j ^ x)] = self.at(i, j) * (parity_sign(i, z) * parity_sign(j, z));
            }
        }
        out
    }

    fn fault(&mut self, f: &FaultSpec) {
        if f.p == 0.0 {
            return;
        }
        let dim = self.dim;
        match &f.dist {
            PauliDistribution::Depolarizing(_) => {
                let tr: Complex64 = (0..dim).map(|i| self.at(i, i)).sum();
                for v in &mut self.data {
                    *v *= 1.0 - f.p;
                }
                for i in 0..dim {
                    self.data[i * dim + i] += tr * (f.p / dim as f64);
                }
            }
            PauliDistribution::Explicit(list) => {
                let total: f64 = list.iter().map(|w| w.weight).sum();
                let mut acc: Vec<Complex64> = self.data.iter().map(|v| v * (1.0 - f.p)).collect();
                for wp in list {
                    let w = f.p * wp.weight / total;
                    let moved = self.conjugated_by(wp.pauli.x_mask() as usize, wp.pauli.z_mask() as usize);
                    for (a, m) in acc.iter_mut().zip(moved) {
                        *a += m * w;
                    }
                }
                self.data = acc;
            }
        }
    }

    fn layer(&mut self, layer: &Layer) {
        match layer {
            Layer::Local { gates } => {
                for (q, g) in gates.iter().enumerate() {
                    self.single(q, &g.matrix());
                }
            }
            Layer::Entangling { edges } => {
                for &(a, b) in edges {
                    self.cz(a, b);
                }
            }
        }
    }
}

fn flip_readout(p: &[f64], f: &FaultSpec) -> Vec<f64> {
    if f.p == 0.0 {
        return p.to_vec();
    }
    let dim = p.len();
    match &f.dist {
        PauliDistribution::Depolarizing(_) => p.iter().map(|v| (1.0 - f.p) * v + f.p / dim as f64).collect(),
        PauliDistribution::Explicit(list) => {
            let total: f64 = list.iter().map(|w| w.weight).sum();
            let mut out: Vec<f64> = p.iter().map(|v| (1.0 - f.p) * v).collect();
            for wp in list {
                let x = wp.pauli.x_mask() as usize;
                let w = f.p * wp.weight / total;
                for (b, v) in p.iter().enumerate() {
                    out[b ^ x] += w * v;
                }
            }
            out
        }
    }
}

/// Exact probabilities of every outcome of `c` under `b`, indexed by the
/// outcome's bit pattern.
pub fn exact_output_distribution(c: &LayeredCircuit, b: &NoiseBehaviour) -> Result<Vec<f64>, NoiseError> {
    b.check_bound(c)?;
    if c.n() > EXACT_MAX_QUBITS {
        return Err(NoiseError::OracleScale { qubits: c.n(), max_qubits: EXACT_MAX_QUBITS });
    }
    let locs = b.locations(c);
    let mut rho = Density::zero(c.n());
    rho.fault(locs[0]);
    for (k, layer) in c.layers().iter().enumerate() {
        rho.layer(layer);
        rho.fault(locs[k + 1]);
    }
    let diag: Vec<f64> = (0..rho.dim).map(|i| rho.at(i, i).re.max(0.0)).collect();
    Ok(flip_readout(&diag, locs[locs.len() - 1]))
}

/// Exact `⟨O⟩` of `c` under `b`, measuring in the eigenbasis of `o`.
pub fn exact_noisy_expectation(c: &LayeredCircuit, b: &NoiseBehaviour, o: &PauliObservable) -> Result<f64, NoiseError> {
    let rotated = c.with_measurement_basis(o).map_err(|e| NoiseError::Invalid { path: "observable".into(), message: e.to_string() })?;
    let p = exact_output_distribution(&rotated, b)?;
    Ok(p.iter().enumerate().map(|(bits, v)| v * f64::from(o.eigenvalue_of_bits(bits as u64))).sum())
}

/// Noiseless `⟨O⟩`.
pub fn ideal_expectation(c: &LayeredCircuit, o: &PauliObservable) -> Result<f64, NoiseError> {
    exact_noisy_expectation(c, &NoiseBehaviour::noiseless(1), o)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::brickwork_ansatz;
    use crate::linalg::{embed_single, kron_all, pauli_matrix, CMat};
    use crate::noise::{FaultSpec, LayerFaults};
    use crate::pauli::PauliLetter;
    use crate::sim::ideal_probabilities;
    use crate::testutil::hadamard_pair_circuit;

    #[test]
    fn noiseless_matches_statevector() {
        for c in [hadamard_pair_circuit(), brickwork_ansatz(3, 5).unwrap()] {
            let exact = exact_output_distribution(&c, &NoiseBehaviour::noiseless(1)).unwrap();
            let ideal = ideal_probabilities(&c).unwrap();
            for (a, b) in exact.iter().zip(&ideal) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn depolarizing_scales_expectation_by_survival() {
        let c = brickwork_ansatz(4, 9).unwrap();
        let o: PauliObservable = "ZIZI".parse().unwrap();
        let ideal = ideal_expectation(&c, &o).unwrap();
        for p_err in [0.0, 0.1, 0.37, 0.9, 1.0] {
            let b = NoiseBehaviour::global_depolarizing(1, p_err, &c).unwrap();
            let got = exact_noisy_expectation(&c, &b, &o).unwrap();
            assert!((got - (1.0 - p_err) * ideal).abs() < 1e-10, "{p_err}: {got}");
        }
    }

    #[test]
    fn explicit_fault_matches_dense_kraus_sum() {
        // Dense oracle: rho -> (1 - p) rho + p P rho P† after the first layer.
        let c = hadamard_pair_circuit();
        let p = 0.3;
        let mut b = NoiseBehaviour::noiseless(1);
        b.local = LayerFaults::PerLayer(vec![FaultSpec::explicit(p, vec![("YZ".parse().unwrap(), 1.0)]).unwrap(), FaultSpec::none()]);
        let got = exact_output_distribution(&c, &b).unwrap();

        let mut rho = CMat::zeros(4);
        rho[(0, 0)] = Complex64::new(1.0, 0.0);
        let apply = |rho: &CMat, u: &CMat| u.mul(rho).mul(&u.adjoint());
        let local = |gates: &[crate::circuit::Gate]| gates.iter().enumerate().fold(CMat::identity(4), |m, (q, g)| embed_single(&g.matrix(), q, 2).mul(&m));
        let layers = c.layers();
        let Layer::Local { gates } = &layers[0] else { unreachable!() };
        rho = apply(&rho, &local(gates));
        let pm = kron_all(&[pauli_matrix(PauliLetter::Y), pauli_matrix(PauliLetter::Z)]);
        let flipped = apply(&rho, &pm).scale(Complex64::new(p, 0.0));
        rho = rho.scale(Complex64::new(1.0 - p, 0.0)).add(&flipped);
        let mut cz = CMat::identity(4);
        cz[(3, 3)] = Complex64::new(-1.0, 0.0);
        rho = apply(&rho, &cz);
        let Layer::Local { gates } = &layers[2] else { unreachable!() };
        rho = apply(&rho, &local(gates));
        for i in 0..4 {
            assert!((rho[(i, i)].re - got[i]).abs() < 1e-12);
        }
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn measurement_flip_moves_mass() {
        let c = brickwork_ansatz(2, 3).unwrap();
        let mut b = NoiseBehaviour::noiseless(1);
        b.meas = FaultSpec::explicit(0.25, vec![("XI".parse().unwrap(), 1.0)]).unwrap();
        let p = exact_output_distribution(&c, &b).unwrap();
        // Two X layers cancel, so the ideal outcome is 00; qubit 0 flips a quarter of the time.
        assert!((p[0b00] - 0.75).abs() < 1e-12 && (p[0b01] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn oracle_scale_limit() {
        let c = brickwork_ansatz(EXACT_MAX_QUBITS + 1, 3).unwrap();
        assert!(matches!(exact_output_distribution(&c, &NoiseBehaviour::noiseless(1)), Err(NoiseError::OracleScale { .. })));
    }
}
