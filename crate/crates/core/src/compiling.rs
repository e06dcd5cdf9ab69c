//! Randomized compiling with a quantum one-time pad.
//!
//! A random Pauli is inserted after every single-qubit layer and folded into
//! that layer; the next single-qubit layer undoes it after it has been pushed
//! through the intervening CZ layer. The pad after the final layer is X-type,
//! so it survives only as a known flip of the readout. A random Z-type pad at
//! preparation acts trivially on `|0…0⟩` and is folded into the first layer.

use std::fmt;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;
use crate::circuit::{Gate, Layer, LayeredCircuit};
use crate::pauli::{PauliError, PauliLetter, PauliString, Phase};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error("frame acts on {frame} qubits but bitstring has {bits}")]
    LengthMismatch { frame: usize, bits: usize },
    #[error("transfer matrix entry ({row}, {col}) is {value}, expected {expected}")]
    MalformedPtm { row: usize, col: usize, value: f64, expected: f64 },
    #[error("transfer matrix entry ({row}, {col}) is not finite")]
    NonFinitePtm { row: usize, col: usize },
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

/// Pad bookkeeping for one single-qubit layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PadStep {
    /// Fresh random Pauli applied after the layer.
    pub inserted: PauliString,
    /// Pauli undone before the layer: the previous pad as it emerges from the CZ layer in between.
    pub correction: PauliString,
}

/// Net Pauli between the compiled circuit and the original at readout, plus
/// the per-layer pads that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliFrame {
    pub frame: PauliString,
    /// Z-type pad at preparation.
    pub prep: PauliString,
    pub history: Vec<PadStep>,
}

impl PauliFrame {
    pub fn identity(n: usize) -> Self {
        let id = PauliString::identity(n).expect("width checked by circuit");
        PauliFrame { frame: id.clone(), prep: id, history: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.frame.n()
    }

    /// Re-derives the readout frame from the history and the entangling
    /// layers of `c`; `None` if a correction does not cancel the pad it
    /// follows or the result disagrees with `frame`.
    pub fn replay(&self, c: &LayeredCircuit) -> Option<PauliString> {
        if self.prep.x_mask() != 0 || self.history.len() != c.m() {
            return None;
        }
        let mut entangling = c.entangling_layers();
        // A Z-type string fixes |0…0⟩, so the prep pad is the starting deviation at no cost.
        let mut net = self.prep.clone();
        for (k, step) in self.history.iter().enumerate() {
            if k > 0 {
                net = net.conjugate_through_cz(entangling.next()?).ok()?;
            }
            let residue = step.correction.inverse().mul(&net).ok()?;
            if !residue.is_identity_up_to_phase() {
                return None;
            }
            net = step.inserted.mul(&residue).ok()?;
        }
        (net.x_mask() == self.frame.x_mask() && net.z_mask() == self.frame.z_mask()).then_some(net)
    }
}

impl fmt::Display for PauliFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.frame.fmt(f)
    }
}

fn mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Pads every single-qubit layer of `c` with random Paulis. The compiled
/// circuit has the same layer structure and entangling layers; measuring it
/// and applying [`undo_pad`] reproduces the statistics of `c`.
pub fn randomized_compile<R: RngCore + ?Sized>(c: &LayeredCircuit, rng: &mut R) -> (LayeredCircuit, PauliFrame) {
    let n = c.n();
    let m = c.m();
    let full = mask(n);
    let prep = PauliString::from_masks(n, 0, rng.next_u64() & full, Phase::ONE).expect("masked to width");

    let mut locals = Vec::with_capacity(m);
    let mut history = Vec::with_capacity(m);
    let mut previous = prep.clone();
    let mut layers = c.layers().iter();
    for k in 0..m {
        let Some(Layer::Local { gates }) = layers.next() else { unreachable!("valid circuits alternate") };
        let inserted = if k + 1 == m {
            PauliString::from_masks(n, rng.next_u64() & full, 0, Phase::ONE)
        } else {
            let x = rng.next_u64() & full;
            PauliString::from_masks(n, x, rng.next_u64() & full, Phase::ONE)
        }
        .expect("masked to width");
        let correction = previous;
        locals.push(
            gates
                .iter()
                .enumerate()
                .map(|(q, g)| g.dress(correction.letter(q), inserted.letter(q)))
                .collect::<Vec<Gate>>(),
        );
        if let Some(Layer::Entangling { edges }) = layers.next() {
            previous = inserted.conjugate_through_cz(edges).expect("edges validated with circuit");
        } else {
            previous = inserted.clone();
        }
        history.push(PadStep { inserted, correction });
    }
    let compiled = c.with_local_layers(locals).expect("layer structure unchanged");
    let frame = history.last().map(|s| s.inserted.clone()).expect("circuits have at least one layer");
    (compiled, PauliFrame { frame, prep, history })
}

/// Removes the readout flip left by the final pad.
pub fn undo_pad(frame: &PauliFrame, s: &BitString) -> Result<BitString, CompileError> {
    if frame.n() != s.len() {
        return Err(CompileError::LengthMismatch { frame: frame.n(), bits: s.len() });
    }
    Ok(s.xor_mask(frame.frame.x_mask()))
}

/// Single-qubit Pauli transfer matrix in the `I, X, Y, Z` basis.
pub type Ptm = [[f64; 4]; 4];

/// Average of `P·R·P` over the four single-qubit Paulis `P`, each as a
/// transfer matrix. The result is the Pauli-twirled channel and is diagonal.
pub fn twirl_channel_oracle(channel: &Ptm) -> Result<Ptm, CompileError> {
    for (row, r) in channel.iter().enumerate() {
        for (col, &v) in r.iter().enumerate() {
            if !v.is_finite() {
                return Err(CompileError::NonFinitePtm { row, col });
            }
        }
    }
    for (col, &v) in channel[0].iter().enumerate() {
        let expected = if col == 0 { 1.0 } else { 0.0 };
        if (v - expected).abs() > 1e-12 {
            return Err(CompileError::MalformedPtm { row: 0, col, value: v, expected });
        }
    }
    // Conjugation by P keeps basis element i when it commutes with P and negates it otherwise.
    let sign = |p: PauliLetter, i: usize| {
        let q = PauliLetter::ALL[i];
        if p == PauliLetter::I || q == PauliLetter::I || p == q {
            1.0
        } else {
            -1.0
        }
    };
    // Sign sums are small integers, so a fixed point of the twirl is reproduced bit for bit.
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let s: f64 = PauliLetter::ALL.iter().map(|&p| sign(p, i) * sign(p, j)).sum();
            out[i][j] = channel[i][j] * (s / 4.0);
        }
    }
    Ok(out)
}
