use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::bits::BitString;
use crate::pauli::{PauliLetter, MAX_QUBITS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ObservableError {
    #[error("observable must act non-trivially on at least one qubit")]
    Identity,
    #[error("observable width must be 1..={MAX_QUBITS}, got {0}")]
    BadWidth(usize),
    #[error("cannot parse observable {0:?}")]
    Parse(String),
    #[error("bitstring has {bits} bits but observable has {qubits} qubits")]
    LengthMismatch { bits: usize, qubits: usize },
}

/// A tensor product of single-qubit Paulis, not all identity. Text form is
/// one letter per qubit, qubit 0 first, e.g. `"ZZIZ"`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliObservable {
    letters: Vec<PauliLetter>,
    support: u64,
}

impl PauliObservable {
    pub fn new(letters: Vec<PauliLetter>) -> Result<Self, ObservableError> {
        if letters.is_empty() || letters.len() > MAX_QUBITS {
            return Err(ObservableError::BadWidth(letters.len()));
        }
        let support = letters.iter().enumerate().filter(|(_, l)| **l != PauliLetter::I).fold(0u64, |m, (q, _)| m | 1 << q);
        if support == 0 {
            return Err(ObservableError::Identity);
        }
        Ok(PauliObservable { letters, support })
    }

    /// Z on qubit `q` only.
    pub fn z_on(n: usize, q: usize) -> Result<Self, ObservableError> {
        Self::new((0..n).map(|k| if k == q { PauliLetter::Z } else { PauliLetter::I }).collect())
    }

    pub fn n(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[PauliLetter] {
        &self.letters
    }

    /// Bit mask of non-identity positions.
    pub fn support(&self) -> u64 {
        self.support
    }

    /// Eigenvalue of a basis-rotated readout: the product of `(-1)^{s_q}`
    /// over non-identity positions.
    pub fn eigenvalue(&self, s: &BitString) -> Result<i8, ObservableError> {
        if s.len() != self.n() {
            return Err(ObservableError::LengthMismatch { bits: s.len(), qubits: self.n() });
        }
        Ok(self.eigenvalue_of_bits(s.bits()))
    }

    pub(crate) fn eigenvalue_of_bits(&self, bits: u64) -> i8 {
        if (bits & self.support).count_ones() % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

pub fn eigenvalue_from_bitstring(o: &PauliObservable, s: &BitString) -> Result<i8, ObservableError> {
    o.eigenvalue(s)
}

impl fmt::Display for PauliObservable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.letters.iter().try_for_each(|l| write!(f, "{}", l.as_char()))
    }
}

impl FromStr for PauliObservable {
    type Err = ObservableError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let letters = s
            .trim()
            .chars()
            .map(PauliLetter::from_char)
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| ObservableError::Parse(s.to_string()))?;
        Self::new(letters)
    }
}

impl Serialize for PauliObservable {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliObservable {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(o: &str, s: &str) -> i8 {
        eigenvalue_from_bitstring(&o.parse().unwrap(), &s.parse().unwrap()).unwrap()
    }

    #[test]
    fn zz_eigenvalues() {
        assert_eq!(ev("ZZ", "00"), 1);
        assert_eq!(ev("ZZ", "01"), -1);
        assert_eq!(ev("ZZ", "11"), 1);
        assert_eq!(ev("ZI", "01"), 1);
    }

    #[test]
    fn identity_observable_is_rejected() {
        assert_eq!("III".parse::<PauliObservable>(), Err(ObservableError::Identity));
        assert_eq!("11".parse::<PauliObservable>(), Err(ObservableError::Identity));
        assert!("ZQ".parse::<PauliObservable>().is_err());
    }

    #[test]
    fn length_mismatch() {
        let o: PauliObservable = "ZZ".parse().unwrap();
        assert!(o.eigenvalue(&"0".parse().unwrap()).is_err());
    }

    #[test]
    fn eigenvalues_split_outcomes_in_half() {
        // Brute force over every non-identity observable for n <= 3, plus a sample up to n = 10.
        let mut cases: Vec<PauliObservable> = Vec::new();
        for n in 1..=3usize {
            for code in 1..4usize.pow(n as u32) {
                let letters = (0..n).map(|q| PauliLetter::ALL[(code >> (2 * q)) & 3]).collect();
                cases.push(PauliObservable::new(letters).unwrap());
            }
        }
        for n in 4..=10 {
            cases.push(PauliObservable::z_on(n, n - 1).unwrap());
            cases.push(PauliObservable::new(vec![PauliLetter::X; n]).unwrap());
        }
        for o in cases {
            let n = o.n();
            let plus = (0..1u64 << n).filter(|&b| o.eigenvalue(&BitString::from_bits(n, b)).unwrap() == 1).count();
            assert_eq!(plus, 1 << (n - 1), "{o}");
        }
    }
}
