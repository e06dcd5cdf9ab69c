//! Layered circuits: single-qubit layers alternating with CZ layers.
//!
//! A valid circuit has `2m - 1` layers, starting and ending with a
//! single-qubit ([`Layer::Local`]) layer. Every trap shares the target's
//! entangling layers verbatim.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clifford::{SingleQubitClifford, CLIFFORD_COUNT};
use crate::linalg::{pauli_mat2, Mat2};
use crate::observable::PauliObservable;
use crate::pauli::{PauliLetter, MAX_QUBITS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircuitError {
    #[error("invalid circuit: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("total layer count must be odd and at least 1, got {0}")]
    EvenLayerCount(usize),
    #[error("ansatz needs at least 2 qubits, got {0}")]
    TooFewQubits(usize),
    #[error("observable acts on {observable} qubits but circuit has {circuit}")]
    WidthMismatch { observable: usize, circuit: usize },
    #[error("header says m = {declared} but the layers give m = {actual}")]
    BandCountMismatch { declared: usize, actual: usize },
}

/// One single-qubit gate in a [`Layer::Local`] layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GateRepr", into = "GateRepr")]
pub enum Gate {
    Clifford(SingleQubitClifford),
    Rx(f64),
    Ry(f64),
    Rz(f64),
    Unitary(Mat2),
}

impl Gate {
    pub fn identity() -> Gate {
        Gate::Clifford(SingleQubitClifford::IDENTITY)
    }

    pub fn matrix(&self) -> Mat2 {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        match *self {
            Gate::Clifford(cl) => cl.matrix(),
            Gate::Rx(t) => {
                let (s, co) = (t / 2.0).sin_cos();
                Mat2([[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]])
            }
            Gate::Ry(t) => {
                let (s, co) = (t / 2.0).sin_cos();
                Mat2([[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]])
            }
            Gate::Rz(t) => Mat2([[Complex64::from_polar(1.0, -t / 2.0), c(0.0, 0.0)], [c(0.0, 0.0), Complex64::from_polar(1.0, t / 2.0)]]),
            Gate::Unitary(m) => m,
        }
    }

    pub fn as_clifford(&self) -> Option<SingleQubitClifford> {
        match self {
            Gate::Clifford(c) => Some(*c),
            _ => None,
        }
    }

    /// Gate that applies `self` and then `next`.
    pub fn then(&self, next: &Gate) -> Gate {
        match (self, next) {
            (Gate::Clifford(a), Gate::Clifford(b)) => Gate::Clifford(a.then(*b)),
            _ => Gate::Unitary(next.matrix().mul(&self.matrix())),
        }
    }

    /// `after · self · before` for Pauli `before` and `after`. Clifford gates stay in the table.
    pub fn dress(&self, before: PauliLetter, after: PauliLetter) -> Gate {
        if before == PauliLetter::I && after == PauliLetter::I {
            return *self;
        }
        match self {
            Gate::Clifford(c) => Gate::Clifford(SingleQubitClifford::pauli(before).then(*c).then(SingleQubitClifford::pauli(after))),
            _ => Gate::Unitary(pauli_mat2(after).mul(&self.matrix()).mul(&pauli_mat2(before))),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum GateRepr {
    Clifford(usize),
    Rx(f64),
    Ry(f64),
    Rz(f64),
    /// Row-major entries as `[re, im]` pairs.
    U([[f64; 2]; 4]),
}

impl TryFrom<GateRepr> for Gate {
    type Error = String;

    fn try_from(r: GateRepr) -> Result<Self, Self::Error> {
        Ok(match r {
            GateRepr::Clifford(i) => Gate::Clifford(
                SingleQubitClifford::new(i).ok_or_else(|| format!("Clifford index {i} outside 0..{CLIFFORD_COUNT}"))?,
            ),
            GateRepr::Rx(t) => Gate::Rx(t),
            GateRepr::Ry(t) => Gate::Ry(t),
            GateRepr::Rz(t) => Gate::Rz(t),
            GateRepr::U(e) => {
                let c = |k: usize| Complex64::new(e[k][0], e[k][1]);
                let m = Mat2([[c(0), c(1)], [c(2), c(3)]]);
                if !m.is_unitary(1e-9) {
                    return Err("matrix is not unitary".to_string());
                }
                Gate::Unitary(m)
            }
        })
    }
}

impl From<Gate> for GateRepr {
    fn from(g: Gate) -> Self {
        match g {
            Gate::Clifford(c) => GateRepr::Clifford(c.index()),
            Gate::Rx(t) => GateRepr::Rx(t),
            Gate::Ry(t) => GateRepr::Ry(t),
            Gate::Rz(t) => GateRepr::Rz(t),
            Gate::Unitary(m) => {
                let f = |z: Complex64| [z.re, z.im];
                GateRepr::U([f(m.0[0][0]), f(m.0[0][1]), f(m.0[1][0]), f(m.0[1][1])])
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Layer {
    /// Product of CZ gates on disjoint qubit pairs.
    Entangling { edges: Vec<(usize, usize)> },
    /// One single-qubit gate per qubit.
    Local { gates: Vec<Gate> },
}

impl Layer {
    pub fn is_local(&self) -> bool {
        matches!(self, Layer::Local { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoQubits,
    TooManyQubits(usize),
    NoLayers,
    FirstNotLocal,
    LastNotLocal,
    AlternationBroken { layer: usize },
    EdgeOutOfRange { layer: usize, qubit: usize },
    SelfEdge { layer: usize, qubit: usize },
    RepeatedQubit { layer: usize, qubit: usize },
    GateCount { layer: usize, expected: usize, found: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoQubits => write!(f, "qubit count must be at least 1"),
            Violation::TooManyQubits(n) => write!(f, "qubit count {n} exceeds {MAX_QUBITS}"),
            Violation::NoLayers => write!(f, "circuit has no layers"),
            Violation::FirstNotLocal => write!(f, "first layer must be a single-qubit layer"),
            Violation::LastNotLocal => write!(f, "last layer must be a single-qubit layer"),
            Violation::AlternationBroken { layer } => write!(f, "alternation broken at layer {layer}"),
            Violation::EdgeOutOfRange { layer, qubit } => write!(f, "layer {layer}: edge qubit {qubit} out of range"),
            Violation::SelfEdge { layer, qubit } => write!(f, "layer {layer}: edge joins qubit {qubit} to itself"),
            Violation::RepeatedQubit { layer, qubit } => write!(f, "layer {layer}: qubit {qubit} used by two edges"),
            Violation::GateCount { layer, expected, found } => {
                write!(f, "layer {layer}: expected {expected} gates, found {found}")
            }
        }
    }
}

/// Every structural problem with `layers` on `n` qubits; empty means valid.
pub fn validate_layers(n: usize, layers: &[Layer]) -> Vec<Violation> {
    let mut out = Vec::new();
    if n == 0 {
        out.push(Violation::NoQubits);
    }
    if n > MAX_QUBITS {
        out.push(Violation::TooManyQubits(n));
    }
    let Some(first) = layers.first() else {
        out.push(Violation::NoLayers);
        return out;
    };
    if !first.is_local() {
        out.push(Violation::FirstNotLocal);
    }
    if !layers.last().is_some_and(Layer::is_local) {
        out.push(Violation::LastNotLocal);
    }
    for (k, pair) in layers.windows(2).enumerate() {
        if pair[0].is_local() == pair[1].is_local() {
            out.push(Violation::AlternationBroken { layer: k + 1 });
        }
    }
    for (k, layer) in layers.iter().enumerate() {
        match layer {
            Layer::Local { gates } => {
                if gates.len() != n {
                    out.push(Violation::GateCount { layer: k, expected: n, found: gates.len() });
                }
            }
            Layer::Entangling { edges } => {
                let mut used = vec![false; n];
                for &(a, b) in edges {
                    if a == b {
                        out.push(Violation::SelfEdge { layer: k, qubit: a });
                        continue;
                    }
                    for q in [a, b] {
                        if q >= n {
                            out.push(Violation::EdgeOutOfRange { layer: k, qubit: q });
                        } else if std::mem::replace(&mut used[q], true) {
                            out.push(Violation::RepeatedQubit { layer: k, qubit: q });
                        }
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CircuitDoc", into = "CircuitDoc")]
pub struct LayeredCircuit {
    n: usize,
    layers: Vec<Layer>,
}

#[derive(Serialize, Deserialize)]
struct CircuitDoc {
    n: usize,
    m: usize,
    layers: Vec<Layer>,
}

impl TryFrom<CircuitDoc> for LayeredCircuit {
    type Error = CircuitError;

    fn try_from(doc: CircuitDoc) -> Result<Self, Self::Error> {
        let c = LayeredCircuit::new(doc.n, doc.layers)?;
        if c.m() != doc.m {
            return Err(CircuitError::BandCountMismatch { declared: doc.m, actual: c.m() });
        }
        Ok(c)
    }
}

impl From<LayeredCircuit> for CircuitDoc {
    fn from(c: LayeredCircuit) -> Self {
        CircuitDoc { n: c.n, m: c.m(), layers: c.layers }
    }
}

impl LayeredCircuit {
    pub fn new(n: usize, layers: Vec<Layer>) -> Result<Self, CircuitError> {
        let v = validate_layers(n, &layers);
        if !v.is_empty() {
            return Err(CircuitError::Invalid(v));
        }
        Ok(LayeredCircuit { n, layers })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of single-qubit layers.
    pub fn m(&self) -> usize {
        self.layers.len().div_ceil(2)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate_layers(self.n, &self.layers)
    }

    /// Edge sets of the `m - 1` entangling layers, in order.
    pub fn entangling_layers(&self) -> impl Iterator<Item = &[(usize, usize)]> {
        self.layers.iter().filter_map(|l| match l {
            Layer::Entangling { edges } => Some(edges.as_slice()),
            Layer::Local { .. } => None,
        })
    }

    pub fn local_layers(&self) -> impl Iterator<Item = &[Gate]> {
        self.layers.iter().filter_map(|l| match l {
            Layer::Local { gates } => Some(gates.as_slice()),
            Layer::Entangling { .. } => None,
        })
    }

    /// Same entangling layers, new single-qubit layers. `locals` must hold `m` layers of `n` gates.
    pub fn with_local_layers(&self, locals: Vec<Vec<Gate>>) -> Result<Self, CircuitError> {
        let mut locals = locals.into_iter();
        let layers = self
            .layers
            .iter()
            .map(|l| match l {
                Layer::Entangling { edges } => Layer::Entangling { edges: edges.clone() },
                Layer::Local { .. } => Layer::Local { gates: locals.next().unwrap_or_default() },
            })
            .collect();
        LayeredCircuit::new(self.n, layers)
    }

    /// Folds the basis change for `o` into the final single-qubit layer, so a
    /// Z-basis readout yields eigenvalues of `o` directly.
    pub fn with_measurement_basis(&self, o: &PauliObservable) -> Result<Self, CircuitError> {
        if o.n() != self.n {
            return Err(CircuitError::WidthMismatch { observable: o.n(), circuit: self.n });
        }
        let rotation = measurement_basis_layer(o);
        let mut out = self.clone();
        if let Some(Layer::Local { gates }) = out.layers.last_mut() {
            for (g, r) in gates.iter_mut().zip(&rotation) {
                if *r != Gate::identity() {
                    *g = g.then(r);
                }
            }
        }
        Ok(out)
    }

    /// True when every single-qubit gate is a Clifford table element.
    pub fn is_clifford(&self) -> bool {
        self.local_layers().flatten().all(|g| g.as_clifford().is_some())
    }
}

/// Per-qubit rotations taking a measurement of `o` onto Z-basis readout:
/// identity on I and Z, H on X, and `H·S†` (R Y R† = Z) on Y.
pub fn measurement_basis_layer(o: &PauliObservable) -> Vec<Gate> {
    let to_z_from_y = SingleQubitClifford::S.inverse().then(SingleQubitClifford::H);
    o.letters()
        .iter()
        .map(|l| match l {
            PauliLetter::I | PauliLetter::Z => Gate::identity(),
            PauliLetter::X => Gate::Clifford(SingleQubitClifford::H),
            PauliLetter::Y => Gate::Clifford(to_z_from_y),
        })
        .collect()
}

/// Benchmark ansatz: every single-qubit layer is RX(π) on all qubits; the
/// entangling layers alternate between pairs (0,1),(2,3),… and (1,2),(3,4),….
pub fn brickwork_ansatz(n: usize, total_layers: usize) -> Result<LayeredCircuit, CircuitError> {
    if total_layers % 2 == 0 {
        return Err(CircuitError::EvenLayerCount(total_layers));
    }
    if n < 2 {
        return Err(CircuitError::TooFewQubits(n));
    }
    let mut layers = Vec::with_capacity(total_layers);
    for k in 0..total_layers {
        if k % 2 == 0 {
            layers.push(Layer::Local { gates: vec![Gate::Rx(PI); n] });
        } else {
            let offset = if (k / 2) % 2 == 0 { 0 } else { 1 };
            let edges = (offset..n.saturating_sub(1)).step_by(2).map(|a| (a, a + 1)).collect();
            layers.push(Layer::Entangling { edges });
        }
    }
    LayeredCircuit::new(n, layers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::SignedPauli;

    fn local(n: usize) -> Layer {
        Layer::Local { gates: vec![Gate::identity(); n] }
    }

    #[test]
    fn brickwork_ansatz_has_expected_structure() {
        let c = brickwork_ansatz(4, 9).unwrap();
        assert!(c.validate().is_empty());
        assert_eq!(c.m(), 5);
        let edges: Vec<Vec<(usize, usize)>> = c.entangling_layers().map(|e| e.to_vec()).collect();
        assert_eq!(edges, vec![vec![(0, 1), (2, 3)], vec![(1, 2)], vec![(0, 1), (2, 3)], vec![(1, 2)]]);
        assert!(c.local_layers().flatten().all(|g| *g == Gate::Rx(PI)));
    }

    #[test]
    fn single_layer_ansatz() {
        let c = brickwork_ansatz(4, 1).unwrap();
        assert_eq!(c.layers().len(), 1);
        assert_eq!(c.entangling_layers().count(), 0);
    }

    #[test]
    fn ansatz_rejects_bad_parameters() {
        assert_eq!(brickwork_ansatz(4, 8), Err(CircuitError::EvenLayerCount(8)));
        assert_eq!(brickwork_ansatz(4, 0), Err(CircuitError::EvenLayerCount(0)));
        assert_eq!(brickwork_ansatz(1, 3), Err(CircuitError::TooFewQubits(1)));
    }

    #[test]
    fn adjacent_entangling_layers_break_alternation() {
        let layers = vec![
            local(2),
            Layer::Entangling { edges: vec![(0, 1)] },
            Layer::Entangling { edges: vec![(0, 1)] },
            local(2),
        ];
        assert!(validate_layers(2, &layers).contains(&Violation::AlternationBroken { layer: 2 }));
    }

    #[test]
    fn trailing_entangling_layer_is_reported() {
        let layers = vec![local(2), Layer::Entangling { edges: vec![(0, 1)] }];
        assert_eq!(validate_layers(2, &layers), vec![Violation::LastNotLocal]);
    }

    #[test]
    fn edge_problems_are_reported() {
        let layers = vec![local(3), Layer::Entangling { edges: vec![(0, 1), (1, 2), (0, 5), (2, 2)] }, local(2)];
        let v = validate_layers(3, &layers);
        assert!(v.contains(&Violation::RepeatedQubit { layer: 1, qubit: 1 }));
        assert!(v.contains(&Violation::EdgeOutOfRange { layer: 1, qubit: 5 }));
        assert!(v.contains(&Violation::SelfEdge { layer: 1, qubit: 2 }));
        assert!(v.contains(&Violation::GateCount { layer: 2, expected: 3, found: 2 }));
        assert_eq!(validate_layers(0, &[]), vec![Violation::NoQubits, Violation::NoLayers]);
    }

    #[test]
    fn measurement_layer_for_zz_is_identity() {
        let o: PauliObservable = "ZZ".parse().unwrap();
        assert_eq!(measurement_basis_layer(&o), vec![Gate::identity(); 2]);
    }

    #[test]
    fn y_rotation_maps_y_to_z() {
        let o: PauliObservable = "Y".parse().unwrap();
        let r = measurement_basis_layer(&o)[0];
        let c = r.as_clifford().unwrap();
        assert_eq!(c.conjugate(SignedPauli::plus(PauliLetter::Y)), SignedPauli::plus(PauliLetter::Z));
        // Independent 2x2 oracle.
        let m = r.matrix();
        let conj = m.mul(&pauli_mat2(PauliLetter::Y)).mul(&m.adjoint());
        assert!(conj.max_abs_diff(&pauli_mat2(PauliLetter::Z)) < 1e-12);
        let h = measurement_basis_layer(&"X".parse().unwrap())[0].matrix();
        assert!(h.mul(&pauli_mat2(PauliLetter::X)).mul(&h.adjoint()).max_abs_diff(&pauli_mat2(PauliLetter::Z)) < 1e-12);
    }

    #[test]
    fn absorbing_measurement_basis_keeps_structure() {
        let c = brickwork_ansatz(3, 5).unwrap();
        let o: PauliObservable = "XYZ".parse().unwrap();
        let d = c.with_measurement_basis(&o).unwrap();
        assert!(d.validate().is_empty());
        assert_eq!(d.layers().len(), c.layers().len());
        assert_eq!(d.layers()[..4], c.layers()[..4]);
        assert!(c.with_measurement_basis(&"XX".parse().unwrap()).is_err());
    }

    #[test]
    fn gate_dressing_matches_matrices() {
        for g in [Gate::Rx(0.3), Gate::Clifford(SingleQubitClifford::H), Gate::Ry(1.1)] {
            for a in PauliLetter::ALL {
                for b in PauliLetter::ALL {
                    let want = pauli_mat2(b).mul(&g.matrix()).mul(&pauli_mat2(a));
                    assert!(g.dress(a, b).matrix().phase_insensitive_diff(&want) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn circuit_document_round_trip() {
        let mut c = brickwork_ansatz(2, 3).unwrap();
        c = c.with_measurement_basis(&"XY".parse().unwrap()).unwrap();
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.starts_with(r#"{"n":2,"m":2,"layers":[{"kind":"local","gates":[{"rx":"#));
        let back: LayeredCircuit = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);

        let bad = r#"{"n":2,"m":1,"layers":[{"kind":"entangling","edges":[[0,1]]}]}"#;
        assert!(serde_json::from_str::<LayeredCircuit>(bad).is_err());
        let wrong_m = r#"{"n":1,"m":2,"layers":[{"kind":"local","gates":[{"clifford":3}]}]}"#;
        assert!(serde_json::from_str::<LayeredCircuit>(wrong_m).unwrap_err().to_string().contains("m = 2"));
    }
}
