//! n-qubit Pauli strings in symplectic form.
//!
//! A [`PauliString`] stores one X bit and one Z bit per qubit plus a global
//! phase in {+1, +i, -1, -i}. Non-identity letters are the Hermitian Paulis
//! X, Y, Z, so `(x, z) = (1, 1)` is Y rather than XZ. Qubit `q` lives in bit
//! `q` of both masks, which caps strings at [`MAX_QUBITS`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Widest string representable by the `u64` masks.
pub const MAX_QUBITS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PauliError {
    #[error("qubit count mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("qubit count {0} outside 1..={MAX_QUBITS}")]
    BadWidth(usize),
    #[error("qubit index {index} out of range for {n} qubits")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("qubit {0} appears more than once in the edge list")]
    RepeatedQubit(usize),
    #[error("cannot parse Pauli string {0:?}")]
    Parse(String),
}

/// Power of `i`: the phase is `i^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: u32) -> Self {
        Phase((k % 4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn mul(self, other: Phase) -> Phase {
        Phase((self.0 + other.0) % 4)
    }

    pub fn conj(self) -> Phase {
        Phase((4 - self.0) % 4)
    }

    fn prefix(self) -> &'static str {
        match self.0 {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        }
    }
}

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliLetter {
    I,
    X,
    Y,
    Z,
}

impl PauliLetter {
    pub const ALL: [PauliLetter; 4] = [PauliLetter::I, PauliLetter::X, PauliLetter::Y, PauliLetter::Z];

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => PauliLetter::I,
            (true, false) => PauliLetter::X,
            (true, true) => PauliLetter::Y,
            (false, true) => PauliLetter::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            PauliLetter::I => (false, false),
            PauliLetter::X => (true, false),
            PauliLetter::Y => (true, true),
            PauliLetter::Z => (false, true),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            PauliLetter::I => 'I',
            PauliLetter::X => 'X',
            PauliLetter::Y => 'Y',
            PauliLetter::Z => 'Z',
        }
    }

    /// Accepts `I`/`1`, `X`, `Y`, `Z` (either case).
    pub fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'I' | '1' => Some(PauliLetter::I),
            'X' => Some(PauliLetter::X),
            'Y' => Some(PauliLetter::Y),
            'Z' => Some(PauliLetter::Z),
            _ => None,
        }
    }

    /// Exponent `k` such that `a * b = i^k * (a xor b)` for Hermitian letters.
    pub(crate) fn product_exponent(a: PauliLetter, b: PauliLetter) -> u8 {
        use PauliLetter::*;
        match (a, b) {
            (X, Y) | (Y, Z) | (Z, X) => 1,
            (Y, X) | (Z, Y) | (X, Z) => 3,
            _ => 0,
        }
    }
}

/// A single-qubit Pauli with a real sign, the image type of Clifford conjugation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignedPauli {
    pub letter: PauliLetter,
    pub negative: bool,
}

impl SignedPauli {
    pub const fn new(letter: PauliLetter, negative: bool) -> Self {
        SignedPauli { letter, negative }
    }

    pub const fn plus(letter: PauliLetter) -> Self {
        SignedPauli { letter, negative: false }
    }

    pub fn anticommutes(self, other: SignedPauli) -> bool {
        self.letter != PauliLetter::I && other.letter != PauliLetter::I && self.letter != other.letter
    }

    /// Product of two signed Paulis as (phase exponent, letter).
    pub(crate) fn product(self, other: SignedPauli) -> (u8, PauliLetter) {
        let (ax, az) = self.letter.bits();
        let (bx, bz) = other.letter.bits();
        let sign = 2 * ((self.negative ^ other.negative) as u8);
        let k = (sign + PauliLetter::product_exponent(self.letter, other.letter)) % 4;
        (k, PauliLetter::from_bits(ax ^ bx, az ^ bz))
    }
}

impl fmt::Display for SignedPauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", if self.negative { '-' } else { '+' }, self.letter.as_char())
    }
}

/// An n-qubit Pauli operator `i^phase * P_0 ⊗ P_1 ⊗ ... ⊗ P_{n-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: u64,
    z: u64,
    phase: Phase,
}

fn width_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl PauliString {
    pub fn identity(n: usize) -> Result<Self, PauliError> {
        Self::from_masks(n, 0, 0, Phase::ONE)
    }

    pub fn from_masks(n: usize, x: u64, z: u64, phase: Phase) -> Result<Self, PauliError> {
        if n == 0 || n > MAX_QUBITS {
            return Err(PauliError::BadWidth(n));
        }
        let mask = width_mask(n);
        if (x | z) & !mask != 0 {
            return Err(PauliError::IndexOutOfRange { index: 63 - ((x | z).leading_zeros() as usize), n });
        }
        Ok(PauliString { n, x, z, phase })
    }

    pub fn from_letters(letters: &[PauliLetter]) -> Result<Self, PauliError> {
        let n = letters.len();
        let (mut x, mut z) = (0u64, 0u64);
        for (q, l) in letters.iter().enumerate().take(MAX_QUBITS) {
            let (bx, bz) = l.bits();
            x |= (bx as u64) << q;
            z |= (bz as u64) << q;
        }
        Self::from_masks(n, x, z, Phase::ONE)
    }

    /// Weight-one string with `letter` on qubit `q`.
    pub fn single(n: usize, q: usize, letter: PauliLetter) -> Result<Self, PauliError> {
        if q >= n {
            return Err(PauliError::IndexOutOfRange { index: q, n });
        }
        let (bx, bz) = letter.bits();
        Self::from_masks(n, (bx as u64) << q, (bz as u64) << q, Phase::ONE)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    pub fn letter(&self, q: usize) -> PauliLetter {
        PauliLetter::from_bits(self.x >> q & 1 == 1, self.z >> q & 1 == 1)
    }

    pub fn letters(&self) -> Vec<PauliLetter> {
        (0..self.n).map(|q| self.letter(q)).collect()
    }

    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    /// True when every letter is I, whatever the phase.
    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn is_identity(&self) -> bool {
        self.is_identity_up_to_phase() && self.phase == Phase::ONE
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    /// Operator product `self · other`, phase included.
    pub fn mul(&self, other: &PauliString) -> Result<PauliString, PauliError> {
        if self.n != other.n {
            return Err(PauliError::LengthMismatch(self.n, other.n));
        }
        let mut k = u32::from(self.phase.0) + u32::from(other.phase.0);
        let mut overlap = (self.x | self.z) & (other.x | other.z);
        while overlap != 0 {
            let q = overlap.trailing_zeros() as usize;
            overlap &= overlap - 1;
            k += u32::from(PauliLetter::product_exponent(self.letter(q), other.letter(q)));
        }
        Ok(PauliString { n: self.n, x: self.x ^ other.x, z: self.z ^ other.z, phase: Phase::from_exponent(k) })
    }

    /// Inverse operator. Hermitian letters square to one, so only the phase changes.
    pub fn inverse(&self) -> PauliString {
        PauliString { phase: self.phase.conj(), ..self.clone() }
    }

    /// `CZ(E) · self · CZ(E)` for a layer of disjoint edges.
    ///
    /// X on one endpoint picks up Z on the partner; the sign flips when both
    /// endpoints carry X and exactly one of them also carries Z.
    pub fn conjugate_through_cz(&self, edges: &[(usize, usize)]) -> Result<PauliString, PauliError> {
        check_edges(self.n, edges)?;
        let mut out = self.clone();
        for &(a, b) in edges {
            let xa = self.x >> a & 1;
            let xb = self.x >> b & 1;
            let za = self.z >> a & 1;
            let zb = self.z >> b & 1;
            out.z ^= (xb << a) | (xa << b);
            if xa & xb & (za ^ zb) == 1 {
                out.phase = out.phase.mul(Phase::MINUS_ONE);
            }
        }
        Ok(out)
    }
}

/// Edges must be pairs of distinct in-range qubits with no qubit reused.
pub(crate) fn check_edges(n: usize, edges: &[(usize, usize)]) -> Result<(), PauliError> {
    let mut used = 0u128;
    for &(a, b) in edges {
        for q in [a, b] {
            if q >= n {
                return Err(PauliError::IndexOutOfRange { index: q, n });
            }
            if used >> q & 1 == 1 {
                return Err(PauliError::RepeatedQubit(q));
            }
            used |= 1 << q;
        }
    }
    Ok(())
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.phase.prefix())?;
        for q in 0..self.n {
            write!(f, "{}", self.letter(q).as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = PauliError;

    /// Parses `"+XIZY"`, `"-ZZ"`, `"+iXY"`, or a bare `"XIZ"` (phase +1).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || PauliError::Parse(s.to_string());
        let t = s.trim();
        let (phase, body) = if let Some(rest) = t.strip_prefix("+i") {
            (Phase::I, rest)
        } else if let Some(rest) = t.strip_prefix("-i") {
            (Phase::MINUS_I, rest)
        } else if let Some(rest) = t.strip_prefix('+') {
            (Phase::ONE, rest)
        } else if let Some(rest) = t.strip_prefix('-') {
            (Phase::MINUS_ONE, rest)
        } else {
            (Phase::ONE, t)
        };
        let letters = body.chars().map(PauliLetter::from_char).collect::<Option<Vec<_>>>().ok_or_else(err)?;
        Ok(PauliString::from_letters(&letters).map_err(|_| err())?.with_phase(phase))
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
