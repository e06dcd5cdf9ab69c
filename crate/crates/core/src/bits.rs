use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Measurement outcome of `n` qubits; bit `q` is qubit `q`'s result.
///
/// Rendered with qubit 0 leftmost, so `"01"` means qubit 0 read 0 and qubit 1 read 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitString {
    n: usize,
    bits: u64,
}

impl BitString {
    pub fn zeros(n: usize) -> Self {
        BitString { n, bits: 0 }
    }

    /// Panics if `bits` has a set bit at or above `n`.
    pub fn from_bits(n: usize, bits: u64) -> Self {
        assert!(n <= 64 && (n == 64 || bits >> n == 0), "bit pattern wider than {n} qubits");
        BitString { n, bits }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn get(&self, q: usize) -> bool {
        self.bits >> q & 1 == 1
    }

    pub fn is_all_zeros(&self) -> bool {
        self.bits == 0
    }

    pub fn xor_mask(self, mask: u64) -> Self {
        BitString::from_bits(self.n, self.bits ^ mask)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n {
            f.write_str(if self.get(q) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid bitstring {0:?}")]
pub struct BitStringParseError(String);

impl FromStr for BitString {
    type Err = BitStringParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() || s.len() > 64 {
            return Err(BitStringParseError(s.to_string()));
        }
        let mut bits = 0u64;
        for (q, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << q,
                _ => return Err(BitStringParseError(s.to_string())),
            }
        }
        Ok(BitString { n: s.len(), bits })
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}
