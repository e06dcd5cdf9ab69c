//! One accreditation run: random Clifford traps alongside the target, trap
//! failure counting, and the resulting bound on the target's output error.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;
use crate::circuit::{CircuitError, Gate, Layer, LayeredCircuit};
use crate::clifford::SingleQubitClifford;
use crate::compiling::{randomized_compile, undo_pad};
use crate::noise::{run_shot, NoiseBehaviour, NoiseError};
use crate::observable::PauliObservable;
use crate::pauli::{PauliLetter, PauliString, Phase, SignedPauli};
use crate::sim::SimError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AccreditationError {
    #[error("confidence must lie in (0, 1), got {0}")]
    BadAlpha(f64),
    #[error("theta must lie in (0, 1], got {0}")]
    BadTheta(f64),
    #[error("need at least one trap per run")]
    NoTraps,
    #[error("{n_inc} failed traps out of {traps}")]
    FailuresOutOfRange { n_inc: usize, traps: usize },
    #[error("quality factor must lie in [0, 1], got {0}")]
    BadEpsilon(f64),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Smallest trap count for which the failure fraction of a run lies within
/// `theta / 2` of its mean with probability at least `alpha` (Hoeffding).
pub fn min_traps(alpha: f64, theta: f64) -> Result<usize, AccreditationError> {
    check_alpha(alpha)?;
    check_theta(theta)?;
    Ok(crate::mitigation::ceil_tolerant(2.0 * (2.0 / (1.0 - alpha)).ln() / (theta * theta)))
}

/// Inverse of [`min_traps`]: the half-width parameter attained by `traps` traps at confidence `alpha`.
pub fn theta_for_traps(alpha: f64, traps: usize) -> Result<f64, AccreditationError> {
    check_alpha(alpha)?;
    if traps == 0 {
        return Err(AccreditationError::NoTraps);
    }
    Ok((2.0 * (2.0 / (1.0 - alpha)).ln() / traps as f64).sqrt().min(1.0))
}

fn check_alpha(alpha: f64) -> Result<(), AccreditationError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(AccreditationError::BadAlpha(alpha))
    }
}

fn check_theta(theta: f64) -> Result<(), AccreditationError> {
    if theta > 0.0 && theta <= 1.0 {
        Ok(())
    } else {
        Err(AccreditationError::BadTheta(theta))
    }
}

fn check_counts(n_inc: usize, traps: usize) -> Result<(), AccreditationError> {
    if traps == 0 {
        return Err(AccreditationError::NoTraps);
    }
    if n_inc > traps {
        return Err(AccreditationError::FailuresOutOfRange { n_inc, traps });
    }
    Ok(())
}

/// Upper bound on the target's total variation distance from its ideal
/// output: twice the failure fraction plus the Hoeffding half-width, capped at 1.
pub fn tvd_bound(n_inc: usize, traps: usize, theta: f64) -> Result<f64, AccreditationError> {
    check_counts(n_inc, traps)?;
    check_theta(theta)?;
    Ok((2.0 * (n_inc as f64 / traps as f64 + theta / 2.0)).min(1.0))
}

/// Twice the failure fraction, capped at 1, with no allowance for sampling error.
pub fn point_tvd_bound(n_inc: usize, traps: usize) -> Result<f64, AccreditationError> {
    check_counts(n_inc, traps)?;
    Ok((2.0 * n_inc as f64 / traps as f64).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Includes the Hoeffding half-width.
    #[default]
    Conservative,
    PointEstimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AcceptanceMode {
    /// Accept when the TVD bound is at most `epsilon`.
    TvdBound { epsilon: f64 },
    /// Accept when more than `cutoff` traps succeed.
    TrapCutoff { cutoff: usize },
}

impl AcceptanceMode {
    pub fn accepts(&self, n_inc: usize, traps: usize, bound: f64) -> bool {
        match *self {
            AcceptanceMode::TvdBound { epsilon } => bound <= epsilon,
            AcceptanceMode::TrapCutoff { cutoff } => traps - n_inc > cutoff,
        }
    }

    pub fn validate(&self) -> Result<(), AccreditationError> {
        match *self {
            AcceptanceMode::TvdBound { epsilon } if !(0.0..=1.0).contains(&epsilon) => Err(AccreditationError::BadEpsilon(epsilon)),
            _ => Ok(()),
        }
    }
}

impl std::fmt::Display for AcceptanceMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AcceptanceMode::TvdBound { epsilon } => write!(f, "tvd_bound <= {epsilon}"),
            AcceptanceMode::TrapCutoff { cutoff } => write!(f, "trap successes > {cutoff}"),
        }
    }
}

/// Trap count, bound convention, and acceptance rule for one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub traps: usize,
    pub theta: f64,
    pub bound: BoundKind,
    pub mode: AcceptanceMode,
}

impl RunParams {
    /// Trap count from confidence and half-width.
    pub fn from_confidence(alpha: f64, theta: f64, mode: AcceptanceMode) -> Result<Self, AccreditationError> {
        let p = RunParams { traps: min_traps(alpha, theta)?, theta, bound: BoundKind::Conservative, mode };
        mode.validate()?;
        Ok(p)
    }

    /// Explicit trap count; the half-width follows from `alpha`.
    pub fn from_traps(traps: usize, alpha: f64, mode: AcceptanceMode) -> Result<Self, AccreditationError> {
        let p = RunParams { traps, theta: theta_for_traps(alpha, traps)?, bound: BoundKind::Conservative, mode };
        mode.validate()?;
        Ok(p)
    }

    pub fn with_bound(mut self, bound: BoundKind) -> Self {
        self.bound = bound;
        self
    }

    pub fn bound_for(&self, n_inc: usize) -> Result<f64, AccreditationError> {
        match self.bound {
            BoundKind::Conservative => tvd_bound(n_inc, self.traps, self.theta),
            BoundKind::PointEstimate => point_tvd_bound(n_inc, self.traps),
        }
    }

    pub fn accepts(&self, n_inc: usize) -> Result<bool, AccreditationError> {
        Ok(self.mode.accepts(n_inc, self.traps, self.bound_for(n_inc)?))
    }
}

/// Basis a trap qubit is rotated into before an entangling layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisLabel {
    Z,
    X,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrapCircuit {
    pub circuit: LayeredCircuit,
    /// One label per qubit for each entangling layer.
    pub basis_plan: Vec<Vec<BasisLabel>>,
    /// Z-type sign flips each entangling layer imparts on X-labeled qubits.
    pub byproduct: Vec<PauliString>,
}

/// Random Clifford trap sharing the entangling layers of `target`; its
/// noiseless output is all zeros.
///
/// Each qubit stays in a single-qubit stabilizer state. Before every
/// entangling layer each qubit is rotated onto a Z or X eigenstate, never X on
/// both ends of an edge, so the CZs only flip signs of X eigenstates. The
/// final layer rotates every qubit back to `|0⟩`.
pub fn generate_trap<R: Rng + ?Sized>(target: &LayeredCircuit, rng: &mut R) -> TrapCircuit {
    let n = target.n();
    let m = target.m();
    let mut stab = vec![SignedPauli::plus(PauliLetter::Z); n];
    let mut locals = Vec::with_capacity(m);
    let mut basis_plan = Vec::with_capacity(m - 1);
    let mut byproduct = Vec::with_capacity(m - 1);

    for edges in target.entangling_layers() {
        let mut labels: Vec<BasisLabel> = (0..n).map(|_| if rng.gen::<bool>() { BasisLabel::X } else { BasisLabel::Z }).collect();
        for &(a, b) in edges {
            if labels[a] == BasisLabel::X && labels[b] == BasisLabel::X {
                labels[a.min(b)] = BasisLabel::Z;
            }
        }
        let gates = (0..n)
            .map(|q| {
                let c = *SingleQubitClifford::mapping_to_axis(stab[q], labels[q] == BasisLabel::X).choose(rng).expect("eight options");
                stab[q] = c.conjugate(stab[q]);
                Gate::Clifford(c)
            })
            .collect();
        locals.push(gates);

        let mut flips = 0u64;
        for &(a, b) in edges {
            for (ctrl, other) in [(a, b), (b, a)] {
                if stab[ctrl].letter == PauliLetter::Z && stab[ctrl].negative && stab[other].letter == PauliLetter::X {
                    stab[other].negative ^= true;
                    flips |= 1 << other;
                }
            }
        }
        basis_plan.push(labels);
        byproduct.push(PauliString::from_masks(n, 0, flips, Phase::ONE).expect("width checked by circuit"));
    }

    let last = (0..n)
        .map(|q| {
            let options = SingleQubitClifford::mapping_to_plus_z(stab[q]);
            let c = if m == 1 {
                // Nothing to undo: stay within the Paulis that fix |0⟩ up to sign.
                **options.iter().filter(|c| c.is_pauli()).collect::<Vec<_>>().choose(rng).expect("I and Z fix +Z")
            } else {
                *options.choose(rng).expect("four options")
            };
            Gate::Clifford(c)
        })
        .collect();
    locals.push(last);
    let circuit = target.with_local_layers(locals).expect("same structure as target");
    TrapCircuit { circuit, basis_plan, byproduct }
}

/// Structural audit: same entangling layers as `target`, Clifford-only, and
/// no edge with both endpoints X-labeled.
pub fn audit_trap(trap: &TrapCircuit, target: &LayeredCircuit) -> bool {
    let same_layers = trap.circuit.n() == target.n()
        && trap.circuit.layers().len() == target.layers().len()
        && trap.circuit.layers().iter().zip(target.layers()).all(|(a, b)| match (a, b) {
            (Layer::Entangling { edges: x }, Layer::Entangling { edges: y }) => x == y,
            (Layer::Local { .. }, Layer::Local { .. }) => true,
            _ => false,
        });
    let edges_ok = target
        .entangling_layers()
        .zip(&trap.basis_plan)
        .all(|(edges, labels)| edges.iter().all(|&(a, b)| labels[a] == BasisLabel::Z || labels[b] == BasisLabel::Z));
    same_layers && trap.circuit.is_clifford() && edges_ok && trap.basis_plan.len() + 1 == target.m()
}

/// One compiled, noisy shot of a fresh trap; true when it reports an error.
pub fn sample_trap_failure<R: Rng + ?Sized>(target: &LayeredCircuit, b: &NoiseBehaviour, rng: &mut R) -> Result<bool, AccreditationError> {
    b.check_bound(target)?;
    let trap = generate_trap(target, rng);
    let (compiled, frame) = randomized_compile(&trap.circuit, rng);
    let raw = run_shot(&compiled, b, rng)?;
    Ok(!undo_pad(&frame, &raw).expect("widths agree").is_all_zeros())
}

/// Outcome of one accreditation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_index: usize,
    pub behaviour_label: usize,
    /// Position of the target among the `M + 1` circuits.
    pub nu: usize,
    pub n_inc: usize,
    pub tvd_bound: f64,
    pub accepted: bool,
    pub target_bits: BitString,
    /// Eigenvalue of the observable on `target_bits`.
    pub lambda: i8,
    /// Readout pad of the target circuit.
    pub target_frame: PauliString,
}

/// Runs `target` hidden among `params.traps` fresh traps under behaviour `b`
/// and decides acceptance. The returned record has `run_index` 0.
pub fn run_accreditation<R: Rng + ?Sized>(
    target: &LayeredCircuit,
    o: &PauliObservable,
    params: &RunParams,
    b: &NoiseBehaviour,
    rng: &mut R,
) -> Result<RunRecord, AccreditationError> {
    if params.traps == 0 {
        return Err(AccreditationError::NoTraps);
    }
    check_theta(params.theta)?;
    params.mode.validate()?;
    let rotated = target.with_measurement_basis(o)?;
    b.check_bound(&rotated)?;

    let nu = rng.gen_range(0..=params.traps);
    let mut n_inc = 0;
    let mut target_out = None;
    for i in 0..=params.traps {
        let circuit = if i == nu { rotated.clone() } else { generate_trap(&rotated, rng).circuit };
        let (compiled, frame) = randomized_compile(&circuit, rng);
        let bits = undo_pad(&frame, &run_shot(&compiled, b, rng)?).expect("widths agree");
        if i == nu {
            target_out = Some((bits, frame.frame));
        } else if !bits.is_all_zeros() {
            n_inc += 1;
        }
    }
    let (target_bits, target_frame) = target_out.expect("target position drawn in range");
    let bound = params.bound_for(n_inc)?;
    Ok(RunRecord {
        run_index: 0,
        behaviour_label: b.label,
        nu,
        n_inc,
        tvd_bound: bound,
        accepted: params.mode.accepts(n_inc, params.traps, bound),
        lambda: o.eigenvalue_of_bits(target_bits.bits()),
        target_bits,
        target_frame,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::brickwork_ansatz;
    use crate::noise::{FaultSpec, LayerFaults};
    use crate::sim::ideal_probabilities;
    use crate::testutil::random_circuit;
    use proptest::prelude::{prop_assert, prop_assert_eq, proptest};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn min_traps_values() {
        assert_eq!(min_traps(0.95, 0.25).unwrap(), 119);
        assert_eq!(min_traps(0.95, 1.0).unwrap(), 8);
        assert!(min_traps(0.95, 0.2).unwrap() > 119);
        assert!(min_traps(1.0, 0.5).is_err());
        assert!(min_traps(0.9, 0.0).is_err());
        assert!(min_traps(0.9, 1.5).is_err());
    }

    #[test]
    fn theta_inverts_min_traps() {
        let theta = theta_for_traps(0.95, 119).unwrap();
        assert!(theta <= 0.25 && theta > 0.248);
        assert_eq!(min_traps(0.95, theta).unwrap(), 119);
    }

    #[test]
    fn tvd_bound_examples() {
        assert!((tvd_bound(0, 10, 0.2).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(tvd_bound(119, 119, 0.25).unwrap(), 1.0);
        assert!((tvd_bound(12, 119, 0.25).unwrap() - 0.451_680_672_268_907_5).abs() < 1e-12);
        assert!(tvd_bound(5, 4, 0.25).is_err());
        assert!(tvd_bound(0, 0, 0.25).is_err());
        assert_eq!(point_tvd_bound(3, 10).unwrap(), 0.6);
    }

    proptest! {
        #[test]
        fn tvd_bound_is_monotone(traps in 1usize..300, a in 0usize..300, b in 0usize..300, t1 in 0.001f64..=1.0, t2 in 0.001f64..=1.0) {
            let (lo, hi) = (a.min(b).min(traps), a.max(b).min(traps));
            let (tl, th) = (t1.min(t2), t1.max(t2));
            prop_assert!(tvd_bound(lo, traps, tl).unwrap() <= tvd_bound(hi, traps, tl).unwrap());
            prop_assert!(tvd_bound(lo, traps, tl).unwrap() <= tvd_bound(lo, traps, th).unwrap());
            prop_assert!(tvd_bound(hi, traps, th).unwrap() <= 1.0);
        }

        #[test]
        fn cutoff_rule_counts_successes(traps in 1usize..200, fails in 0usize..200, cutoff in 0usize..200) {
            let fails = fails.min(traps);
            let mode = AcceptanceMode::TrapCutoff { cutoff };
            prop_assert_eq!(mode.accepts(fails, traps, 1.0), traps - fails > cutoff);
        }
    }

    #[test]
    fn traps_of_the_ansatz_return_zeros() {
        let target = brickwork_ansatz(4, 9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let trap = generate_trap(&target, &mut rng);
            assert!(audit_trap(&trap, &target));
            assert!((ideal_probabilities(&trap.circuit).unwrap()[0] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn traps_of_random_targets_return_zeros() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let n = rng.gen_range(1..=5);
            let depth = 2 * rng.gen_range(0..6) + 1;
            let target = random_circuit(&mut rng, n, depth, false);
            let trap = generate_trap(&target, &mut rng);
            assert!(audit_trap(&trap, &target));
            assert!((ideal_probabilities(&trap.circuit).unwrap()[0] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn single_layer_trap_is_pauli() {
        let target = LayeredCircuit::new(3, vec![Layer::Local { gates: vec![Gate::Rx(0.3); 3] }]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let trap = generate_trap(&target, &mut rng);
            assert!(trap.basis_plan.is_empty());
            assert!(trap.circuit.local_layers().flatten().all(|g| g.as_clifford().is_some_and(|c| c.is_pauli())));
        }
    }

    #[test]
    fn byproducts_only_touch_x_labeled_qubits() {
        let target = brickwork_ansatz(5, 11).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut seen = 0;
        for _ in 0..200 {
            let trap = generate_trap(&target, &mut rng);
            for (labels, by) in trap.basis_plan.iter().zip(&trap.byproduct) {
                assert_eq!(by.x_mask(), 0);
                for q in 0..5 {
                    if by.z_mask() >> q & 1 == 1 {
                        assert_eq!(labels[q], BasisLabel::X);
                        seen += 1;
                    }
                }
            }
        }
        assert!(seen > 0);
    }

    fn zero_target() -> (LayeredCircuit, PauliObservable) {
        (brickwork_ansatz(4, 9).unwrap(), "ZIII".parse().unwrap())
    }

    #[test]
    fn noiseless_run_accepts_with_half_width_bound() {
        let (target, o) = zero_target();
        let params = RunParams::from_confidence(0.95, 0.25, AcceptanceMode::TvdBound { epsilon: 0.25 }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let r = run_accreditation(&target, &o, &params, &NoiseBehaviour::noiseless(1), &mut rng).unwrap();
            assert_eq!(r.n_inc, 0);
            assert!((r.tvd_bound - 0.25).abs() < 1e-15);
            assert!(r.accepted);
            assert_eq!(r.target_bits.to_string(), "1111");
            assert_eq!(r.lambda, -1);
            assert!(r.nu <= 119);
        }
    }

    #[test]
    fn forced_readout_flip_fails_every_trap() {
        let (target, o) = zero_target();
        let mut b = NoiseBehaviour::noiseless(1);
        b.meas = FaultSpec::explicit(1.0, vec![("XIII".parse().unwrap(), 1.0)]).unwrap();
        let params = RunParams::from_traps(30, 0.95, AcceptanceMode::TrapCutoff { cutoff: 0 }).unwrap();
        let r = run_accreditation(&target, &o, &params, &b, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(r.n_inc, 30);
        assert!(!r.accepted);
        assert_eq!(r.target_bits.to_string(), "0111");
        assert_eq!(r.lambda, 1);
    }

    #[test]
    fn trap_failures_bound_error_probability() {
        let (target, o) = zero_target();
        let b = NoiseBehaviour::global_depolarizing(1, 0.2, &target).unwrap();
        let params = RunParams::from_confidence(0.95, 0.25, AcceptanceMode::TvdBound { epsilon: 1.0 }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let fractions: Vec<f64> = (0..500)
            .map(|_| run_accreditation(&target, &o, &params, &b, &mut rng).unwrap().n_inc as f64 / 119.0)
            .collect();
        let mean = fractions.iter().sum::<f64>() / 500.0;
        let var = fractions.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / 499.0;
        let se = (var / 500.0).sqrt();
        assert!(2.0 * mean >= 0.2 - 3.0 * 2.0 * se, "mean failure fraction {mean}");
    }

    #[test]
    fn per_layer_noise_reaches_traps() {
        let target = brickwork_ansatz(3, 5).unwrap();
        let mut b = NoiseBehaviour::noiseless(1);
        b.entangling = LayerFaults::PerLayer(vec![FaultSpec::none(), FaultSpec::depolarizing(1.0).unwrap()]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let fails = (0..2000).filter(|_| sample_trap_failure(&target, &b, &mut rng).unwrap()).count();
        // Fully depolarized before readout: all-zeros with probability 1/8.
        let rate = fails as f64 / 2000.0;
        assert!((rate - 0.875).abs() < 0.04, "{rate}");
    }

    #[test]
    fn bad_inputs() {
        let (target, o) = zero_target();
        let mut params = RunParams::from_traps(10, 0.95, AcceptanceMode::TvdBound { epsilon: 0.5 }).unwrap();
        params.traps = 0;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(run_accreditation(&target, &o, &params, &NoiseBehaviour::noiseless(1), &mut rng), Err(AccreditationError::NoTraps));
        assert!(RunParams::from_traps(10, 0.95, AcceptanceMode::TvdBound { epsilon: 1.5 }).is_err());
        let wide: PauliObservable = "ZZZZZ".parse().unwrap();
        params.traps = 3;
        assert!(matches!(run_accreditation(&target, &wide, &params, &NoiseBehaviour::noiseless(1), &mut rng), Err(AccreditationError::Circuit(_))));
    }
}
