//! Dense statevector engine for layered circuits.

use num_complex::Complex64;
use thiserror::Error;

use crate::circuit::{Layer, LayeredCircuit};
use crate::linalg::Mat2;
use crate::pauli::PauliString;

/// Largest register the dense engine accepts.
pub const DENSE_MAX_QUBITS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("{0} qubits exceeds the dense simulation limit of {DENSE_MAX_QUBITS}")]
    TooManyQubits(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `n` qubits.
    pub fn zero(n: usize) -> Result<Self, SimError> {
        if n > DENSE_MAX_QUBITS {
            return Err(SimError::TooManyQubits(n));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn apply_single(&mut self, q: usize, m: &Mat2) {
        let [[a, b], [c, d]] = m.0;
        let stride = 1usize << q;
        for base in (0..self.amps.len()).step_by(stride << 1) {
            for i in base..base + stride {
                let (lo, hi) = (self.amps[i], self.amps[i + stride]);
                self.amps[i] = a * lo + b * hi;
                self.amps[i + stride] = c * lo + d * hi;
            }
        }
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) {
        let mask = (1usize << a) | (1usize << b);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *amp = -*amp;
            }
        }
    }

    pub fn apply_layer(&mut self, layer: &Layer) {
        match layer {
            Layer::Local { gates } => {
                for (q, g) in gates.iter().enumerate() {
                    self.apply_single(q, &g.matrix());
                }
            }
            Layer::Entangling { edges } => {
                for &(a, b) in edges {
                    self.apply_cz(a, b);
                }
            }
        }
    }

    /// Applies `p` as an operator; the caller guarantees matching width.
    pub fn apply_pauli(&mut self, p: &PauliString) {
        debug_assert_eq!(p.n(), self.n);
        let (x, z) = (p.x_mask() as usize, p.z_mask() as usize);
        let y_count = (x & z).count_ones();
        let base = Complex64::i().powu((u32::from(p.phase().exponent()) + y_count) % 4);
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (b, amp) in self.amps.iter().enumerate() {
            let sign = if (b & z).count_ones() % 2 == 1 { -base } else { base };
            out[b ^ x] = sign * amp;
        }
        self.amps = out;
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Basis index selected by inverse-CDF lookup of `u ∈ [0, 1)`.
    pub fn sample_index(&self, u: f64) -> u64 {
        let mut acc = 0.0;
        let mut last_nonzero = 0;
        for (i, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if p > 0.0 {
                last_nonzero = i;
            }
            acc += p;
            if u < acc {
                return i as u64;
            }
        }
        // Rounding left the total a hair under u.
        last_nonzero as u64
    }
}

/// Noiseless final state of `c` on `|0…0⟩`.
pub fn simulate_ideal(c: &LayeredCircuit) -> Result<Vec<Complex64>, SimError> {
    let mut psi = StateVector::zero(c.n())?;
    for layer in c.layers() {
        psi.apply_layer(layer);
    }
    Ok(psi.into_amplitudes())
}

pub fn ideal_probabilities(c: &LayeredCircuit) -> Result<Vec<f64>, SimError> {
    Ok(simulate_ideal(c)?.iter().map(|a| a.norm_sqr()).collect())
}
