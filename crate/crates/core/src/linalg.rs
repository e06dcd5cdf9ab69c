//! Small dense complex matrices: 2×2 gate matrices and square matrices for
//! the density-matrix oracle.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::pauli::PauliLetter;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major 2×2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        let mut out = [[ZERO; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }

    pub fn adjoint(&self) -> Mat2 {
        let a = &self.0;
        Mat2([[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]])
    }

    pub fn scale(&self, s: Complex64) -> Mat2 {
        let a = &self.0;
        Mat2([[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]])
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                d = d.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        d
    }

    /// Distance to `other` after removing the best global phase.
    pub fn phase_insensitive_diff(&self, other: &Mat2) -> f64 {
        // <other, self> / 2 is the overlap; its phase aligns the two.
        let mut overlap = ZERO;
        for i in 0..2 {
            for j in 0..2 {
                overlap += other.0[i][j].conj() * self.0[i][j];
            }
        }
        if overlap.norm() < 1e-300 {
            return self.max_abs_diff(other);
        }
        let phase = overlap / overlap.norm();
        self.max_abs_diff(&other.scale(phase))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.mul(&self.adjoint()).max_abs_diff(&Mat2::IDENTITY) <= tol
    }

    pub fn to_cmat(&self) -> CMat {
        let mut m = CMat::zeros(2);
        for i in 0..2 {
            for j in 0..2 {
                m[(i, j)] = self.0[i][j];
            }
        }
        m
    }
}

pub fn pauli_mat2(letter: PauliLetter) -> Mat2 {
    let i = Complex64::i();
    match letter {
        PauliLetter::I => Mat2::IDENTITY,
        PauliLetter::X => Mat2([[ZERO, ONE], [ONE, ZERO]]),
        PauliLetter::Y => Mat2([[ZERO, -i], [i, ZERO]]),
        PauliLetter::Z => Mat2([[ONE, ZERO], [ZERO, -ONE]]),
    }
}

pub fn pauli_matrix(letter: PauliLetter) -> CMat {
    pauli_mat2(letter).to_cmat()
}

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(dim: usize) -> Self {
        CMat { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mul(&self, rhs: &CMat) -> CMat {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let d = self.dim;
        let mut out = CMat::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..d {
                    out.data[i * d + j] += a * rhs.data[k * d + j];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> CMat {
        let d = self.dim;
        let mut out = CMat::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out.data[j * d + i] = self.data[i * d + j].conj();
            }
        }
        out
    }

    pub fn scale(mut self, s: Complex64) -> CMat {
        self.data.iter_mut().for_each(|v| *v *= s);
        self
    }

    pub fn add(&self, rhs: &CMat) -> CMat {
        CMat { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }

    /// Kronecker product with `self` as the high-order factor.
    pub fn kron(&self, rhs: &CMat) -> CMat {
        let (da, db) = (self.dim, rhs.dim);
        let d = da * db;
        let mut out = CMat::zeros(d);
        for i in 0..da {
            for j in 0..da {
                let a = self.data[i * da + j];
                for k in 0..db {
                    for l in 0..db {
                        out.data[(i * db + k) * d + j * db + l] = a * rhs.data[k * db + l];
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &CMat, tol: f64) -> bool {
        self.dim == other.dim && self.max_abs_diff(other) <= tol
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

/// `factors[0]` acts on qubit 0, the least significant bit of the basis index.
pub fn kron_all(factors: &[CMat]) -> CMat {
    factors.iter().fold(CMat::identity(1), |acc, f| f.kron(&acc))
}

/// Embed a 2×2 operator on qubit `q` of an `n`-qubit register.
pub fn embed_single(m: &Mat2, q: usize, n: usize) -> CMat {
    let factors: Vec<CMat> = (0..n).map(|k| if k == q { m.to_cmat() } else { CMat::identity(2) }).collect();
    kron_all(&factors)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_orders_qubit_zero_lowest() {
        // X on qubit 0 of two qubits maps |00> (index 0) to |01> (index 1).
        let m = embed_single(&pauli_mat2(PauliLetter::X), 0, 2);
        assert_eq!(m[(1, 0)], ONE);
        assert_eq!(m[(2, 0)], ZERO);
    }

    #[test]
    fn paulis_are_unitary_and_square_to_one() {
        for l in PauliLetter::ALL {
            let p = pauli_mat2(l);
            assert!(p.is_unitary(1e-15));
            assert!(p.mul(&p).max_abs_diff(&Mat2::IDENTITY) < 1e-15);
        }
    }

    #[test]
    fn phase_insensitive_diff_ignores_global_phase() {
        let x = pauli_mat2(PauliLetter::X);
        assert!(x.scale(Complex64::new(0.0, 1.0)).phase_insensitive_diff(&x) < 1e-15);
        assert!(x.phase_insensitive_diff(&pauli_mat2(PauliLetter::Z)) > 0.5);
    }
}
