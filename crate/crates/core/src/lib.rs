pub mod accreditation;
pub mod bits;
pub mod circuit;
pub mod clifford;
pub mod compiling;
pub mod exact;
pub mod experiment;
pub mod linalg;
pub mod mitigation;
pub mod noise;
pub mod observable;
pub mod pauli;
pub mod sim;

#[cfg(test)]
pub(crate) mod testutil;
