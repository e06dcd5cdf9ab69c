//! Stochastic Pauli noise: fault specifications, noise behaviours, and the
//! Monte Carlo shot sampler.
//!
//! A circuit with `L` layers has `L + 2` fault locations, in order:
//! preparation, one after each layer, and measurement. Layer faults are keyed
//! by layer position only, so traps and target bound to the same behaviour see
//! identical channels. Measurement faults act as classical bit flips from the
//! X part of the sampled Pauli.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;
use crate::circuit::{Layer, LayeredCircuit};
use crate::pauli::{Phase, PauliString};
use crate::sim::{SimError, StateVector};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoiseError {
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("behaviour {label} has {found} {kind} fault specs but the circuit has {expected} such layers")]
    LayerCountMismatch { label: usize, kind: &'static str, expected: usize, found: usize },
    #[error("behaviour {label}: Pauli {pauli} has width {width}, circuit has {n} qubits")]
    WidthMismatch { label: usize, pauli: String, width: usize, n: usize },
    #[error("behaviour set is empty")]
    Empty,
    #[error("no behaviour with label {0}")]
    UnknownLabel(usize),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("exact oracle limited to {max_qubits} qubits, got {qubits}")]
    OracleScale { qubits: usize, max_qubits: usize },
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> NoiseError {
    NoiseError::Invalid { path: path.into(), message: message.into() }
}

/// What fires at a fault location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PauliDistribution {
    /// Uniform over all `4^n` Pauli strings on the register. A fired fault
    /// therefore replaces the state with the maximally mixed state.
    Depolarizing(DepolarizingTag),
    /// Explicit weighted non-identity strings; weights are normalized on use.
    Explicit(Vec<WeightedPauli>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DepolarizingTag {
    Depolarizing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedPauli {
    pub pauli: PauliString,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultSpec {
    /// Probability that this location fires.
    pub p: f64,
    pub dist: PauliDistribution,
}

impl FaultSpec {
    pub fn none() -> Self {
        FaultSpec { p: 0.0, dist: PauliDistribution::Depolarizing(DepolarizingTag::Depolarizing) }
    }

    pub fn depolarizing(p: f64) -> Result<Self, NoiseError> {
        let f = FaultSpec { p, dist: PauliDistribution::Depolarizing(DepolarizingTag::Depolarizing) };
        f.validate("fault")?;
        Ok(f)
    }

    pub fn explicit(p: f64, paulis: Vec<(PauliString, f64)>) -> Result<Self, NoiseError> {
        let f = FaultSpec {
            p,
            dist: PauliDistribution::Explicit(paulis.into_iter().map(|(pauli, weight)| WeightedPauli { pauli, weight }).collect()),
        };
        f.validate("fault")?;
        Ok(f)
    }

    pub fn is_depolarizing(&self) -> bool {
        matches!(self.dist, PauliDistribution::Depolarizing(_))
    }

    pub fn validate(&self, path: &str) -> Result<(), NoiseError> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(invalid(format!("{path}.p"), format!("probability {} outside [0, 1]", self.p)));
        }
        if let PauliDistribution::Explicit(list) = &self.dist {
            if list.is_empty() {
                return Err(invalid(format!("{path}.dist"), "explicit distribution is empty"));
            }
            let width = list[0].pauli.n();
            let mut total = 0.0;
            for (i, wp) in list.iter().enumerate() {
                let p = format!("{path}.dist[{i}]");
                if !(wp.weight.is_finite() && wp.weight >= 0.0) {
                    return Err(invalid(format!("{p}.weight"), format!("weight {} must be finite and non-negative", wp.weight)));
                }
                if wp.pauli.is_identity_up_to_phase() {
                    return Err(invalid(format!("{p}.pauli"), "identity string cannot be a fault"));
                }
                if wp.pauli.n() != width {
                    return Err(invalid(format!("{p}.pauli"), "all strings must have the same width"));
                }
                total += wp.weight;
            }
            if total <= 0.0 {
                return Err(invalid(format!("{path}.dist"), "weights sum to zero"));
            }
        }
        Ok(())
    }

    /// Draws whether the location fires and, if so, which Pauli.
    ///
    /// Always consumes one uniform for the fire decision, plus draws for the
    /// Pauli when it fires.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Option<PauliString> {
        let u: f64 = rng.gen();
        if u >= self.p {
            return None;
        }
        match &self.dist {
            PauliDistribution::Depolarizing(_) => {
                let mask = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
                let x = rng.next_u64() & mask;
                let z = rng.next_u64() & mask;
                Some(PauliString::from_masks(n, x, z, Phase::ONE).expect("mask within width"))
            }
            PauliDistribution::Explicit(list) => {
                let total: f64 = list.iter().map(|w| w.weight).sum();
                let mut t = rng.gen::<f64>() * total;
                for wp in list {
                    if t < wp.weight {
                        return Some(wp.pauli.clone());
                    }
                    t -= wp.weight;
                }
                list.iter().rev().find(|w| w.weight > 0.0).map(|w| w.pauli.clone())
            }
        }
    }
}

/// Fault specs for one kind of layer: a single spec reused at every layer of
/// that kind, or one spec per layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LayerFaults {
    Uniform(FaultSpec),
    PerLayer(Vec<FaultSpec>),
}

impl LayerFaults {
    fn get(&self, k: usize) -> &FaultSpec {
        match self {
            LayerFaults::Uniform(f) => f,
            LayerFaults::PerLayer(v) => &v[k],
        }
    }

    fn specs(&self) -> Box<dyn Iterator<Item = &FaultSpec> + '_> {
        match self {
            LayerFaults::Uniform(f) => Box::new(std::iter::once(f)),
            LayerFaults::PerLayer(v) => Box::new(v.iter()),
        }
    }
}

/// One noise configuration a run can be subjected to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseBehaviour {
    pub label: usize,
    pub prep: FaultSpec,
    /// After each CZ layer.
    pub entangling: LayerFaults,
    /// After each single-qubit layer; never depends on the gates.
    pub local: LayerFaults,
    pub meas: FaultSpec,
}

impl NoiseBehaviour {
    pub fn noiseless(label: usize) -> Self {
        Self::uniform(label, FaultSpec::none())
    }

    /// The same spec at every location.
    pub fn uniform(label: usize, spec: FaultSpec) -> Self {
        NoiseBehaviour {
            label,
            prep: spec.clone(),
            entangling: LayerFaults::Uniform(spec.clone()),
            local: LayerFaults::Uniform(spec.clone()),
            meas: spec,
        }
    }

    /// Depolarizing at every location with a common rate chosen so that the
    /// whole of `c` fails with probability `p_err`.
    pub fn global_depolarizing(label: usize, p_err: f64, c: &LayeredCircuit) -> Result<Self, NoiseError> {
        if !(0.0..=1.0).contains(&p_err) {
            return Err(invalid("p_err", format!("probability {p_err} outside [0, 1]")));
        }
        let locations = (c.layers().len() + 2) as f64;
        let p = 1.0 - (1.0 - p_err).powf(1.0 / locations);
        Ok(Self::uniform(label, FaultSpec::depolarizing(p.clamp(0.0, 1.0))?))
    }

    pub fn validate(&self, path: &str) -> Result<(), NoiseError> {
        if self.label == 0 {
            return Err(invalid(format!("{path}.label"), "labels start at 1"));
        }
        self.prep.validate(&format!("{path}.prep"))?;
        self.meas.validate(&format!("{path}.meas"))?;
        for (name, lf) in [("entangling", &self.entangling), ("local", &self.local)] {
            match lf {
                LayerFaults::Uniform(f) => f.validate(&format!("{path}.{name}"))?,
                LayerFaults::PerLayer(v) => {
                    for (i, f) in v.iter().enumerate() {
                        f.validate(&format!("{path}.{name}[{i}]"))?;
                    }
                }
            }
        }
        Ok(())
    }

    fn all_specs(&self) -> impl Iterator<Item = &FaultSpec> {
        std::iter::once(&self.prep).chain(self.entangling.specs()).chain(self.local.specs()).chain(std::iter::once(&self.meas))
    }

    /// Every fired fault replaces the state with the maximally mixed state.
    pub fn is_depolarizing(&self) -> bool {
        self.all_specs().all(|f| f.p == 0.0 || f.is_depolarizing())
    }

    /// Checks that this behaviour can drive `c`.
    pub fn check_bound(&self, c: &LayeredCircuit) -> Result<(), NoiseError> {
        let m = c.m();
        for (kind, lf, expected) in [("entangling", &self.entangling, m - 1), ("local", &self.local, m)] {
            if let LayerFaults::PerLayer(v) = lf {
                if v.len() != expected {
                    return Err(NoiseError::LayerCountMismatch { label: self.label, kind, expected, found: v.len() });
                }
            }
        }
        for f in self.all_specs() {
            if let PauliDistribution::Explicit(list) = &f.dist {
                if let Some(wp) = list.iter().find(|w| w.pauli.n() != c.n()) {
                    return Err(NoiseError::WidthMismatch {
                        label: self.label,
                        pauli: wp.pauli.to_string(),
                        width: wp.pauli.n(),
                        n: c.n(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Fault spec following layer `index` of `c`.
    fn layer_fault<'a>(&'a self, c: &LayeredCircuit, index: usize) -> &'a FaultSpec {
        // Local layers sit at even positions, entangling at odd ones.
        match c.layers()[index] {
            Layer::Local { .. } => self.local.get(index / 2),
            Layer::Entangling { .. } => self.entangling.get(index / 2),
        }
    }

    /// All `L + 2` locations of `c` in execution order. Assumes [`check_bound`](Self::check_bound) passed.
    pub fn locations<'a>(&'a self, c: &LayeredCircuit) -> Vec<&'a FaultSpec> {
        let mut out = Vec::with_capacity(c.layers().len() + 2);
        out.push(&self.prep);
        out.extend((0..c.layers().len()).map(|k| self.layer_fault(c, k)));
        out.push(&self.meas);
        out
    }
}

/// Probability that at least one location fires while running `c` under `b`.
pub fn p_err_of(c: &LayeredCircuit, b: &NoiseBehaviour) -> Result<f64, NoiseError> {
    b.check_bound(c)?;
    Ok(1.0 - b.locations(c).iter().map(|f| 1.0 - f.p).product::<f64>())
}

/// The finite set of behaviours runs are drawn from. Labels are exactly `1..=N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BehaviourSetDoc", into = "BehaviourSetDoc")]
pub struct BehaviourSet {
    behaviours: Vec<NoiseBehaviour>,
}

#[derive(Serialize, Deserialize)]
struct BehaviourSetDoc {
    behaviours: Vec<NoiseBehaviour>,
}

impl TryFrom<BehaviourSetDoc> for BehaviourSet {
    type Error = NoiseError;

    fn try_from(doc: BehaviourSetDoc) -> Result<Self, Self::Error> {
        BehaviourSet::new(doc.behaviours)
    }
}

impl From<BehaviourSet> for BehaviourSetDoc {
    fn from(s: BehaviourSet) -> Self {
        BehaviourSetDoc { behaviours: s.behaviours }
    }
}

impl BehaviourSet {
    pub fn new(mut behaviours: Vec<NoiseBehaviour>) -> Result<Self, NoiseError> {
        if behaviours.is_empty() {
            return Err(NoiseError::Empty);
        }
        for (i, b) in behaviours.iter().enumerate() {
            b.validate(&format!("behaviours[{i}]"))?;
        }
        let n = behaviours.len();
        let mut seen = vec![false; n + 1];
        for (i, b) in behaviours.iter().enumerate() {
            if b.label > n || std::mem::replace(&mut seen[b.label], true) {
                return Err(invalid(format!("behaviours[{i}].label"), format!("labels must be distinct and cover 1..={n}")));
            }
        }
        behaviours.sort_by_key(|b| b.label);
        Ok(BehaviourSet { behaviours })
    }

    pub fn len(&self) -> usize {
        self.behaviours.len()
    }

    pub fn is_empty(&self) -> bool {
        self.behaviours.is_empty()
    }

    pub fn get(&self, label: usize) -> Result<&NoiseBehaviour, NoiseError> {
        label.checked_sub(1).and_then(|i| self.behaviours.get(i)).ok_or(NoiseError::UnknownLabel(label))
    }

    pub fn iter(&self) -> impl Iterator<Item = &NoiseBehaviour> {
        self.behaviours.iter()
    }

    pub fn check_bound(&self, c: &LayeredCircuit) -> Result<(), NoiseError> {
        self.behaviours.iter().try_for_each(|b| b.check_bound(c))
    }
}

/// Runs one noisy shot with no binding checks.
pub(crate) fn run_shot<R: Rng + ?Sized>(c: &LayeredCircuit, b: &NoiseBehaviour, rng: &mut R) -> Result<BitString, SimError> {
    let n = c.n();
    let mut psi = StateVector::zero(n)?;
    if let Some(p) = b.prep.sample(n, rng) {
        psi.apply_pauli(&p);
    }
    for (k, layer) in c.layers().iter().enumerate() {
        psi.apply_layer(layer);
        if let Some(p) = b.layer_fault(c, k).sample(n, rng) {
            psi.apply_pauli(&p);
        }
    }
    let flip = b.meas.sample(n, rng).map_or(0, |p| p.x_mask());
    let outcome = psi.sample_index(rng.gen());
    Ok(BitString::from_bits(n, outcome ^ flip))
}

/// One measurement outcome of `c` under stochastic Pauli noise `b`.
pub fn sample_shot<R: Rng + ?Sized>(c: &LayeredCircuit, b: &NoiseBehaviour, rng: &mut R) -> Result<BitString, NoiseError> {
    b.check_bound(c)?;
    Ok(run_shot(c, b, rng)?)
}
