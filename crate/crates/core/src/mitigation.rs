//! Campaigns of accreditation runs, post-selection, and the mitigated
//! estimator, plus the sample-complexity calculators that go with them.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::accreditation::{run_accreditation, AcceptanceMode, AccreditationError, BoundKind, RunParams, RunRecord};
use crate::circuit::LayeredCircuit;
use crate::exact::{exact_noisy_expectation, EXACT_MAX_QUBITS};
use crate::noise::{p_err_of, BehaviourSet, NoiseError};
use crate::observable::PauliObservable;

/// Default floor on the run count from [`required_runs`].
pub const K_MIN: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MitigationError {
    #[error("campaign needs at least one run")]
    NoRuns,
    #[error("{0} must be non-empty")]
    Empty(&'static str),
    #[error("{name} = {value} is outside {domain}")]
    Domain { name: &'static str, value: f64, domain: &'static str },
    #[error("behaviour {0} is not globally depolarizing")]
    NotDepolarizing(usize),
    #[error("observable acts on {observable} qubits but circuit has {circuit}")]
    WidthMismatch { observable: usize, circuit: usize },
    #[error(transparent)]
    Accreditation(#[from] AccreditationError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

fn domain(name: &'static str, value: f64, ok: bool, domain: &'static str) -> Result<(), MitigationError> {
    if ok {
        Ok(())
    } else {
        Err(MitigationError::Domain { name, value, domain })
    }
}

/// Uniform label in `1..=N`.
pub fn sample_behaviour<R: Rng + ?Sized>(set: &BehaviourSet, rng: &mut R) -> Result<usize, MitigationError> {
    if set.is_empty() {
        return Err(MitigationError::Empty("behaviour set"));
    }
    Ok(rng.gen_range(1..=set.len()))
}

/// Generator for run `run_index` of a campaign seeded with `seed`: the
/// campaign seed picks the key and the run index picks the stream.
pub fn run_rng(seed: u64, run_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run_index as u64);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub target: LayeredCircuit,
    pub observable: PauliObservable,
    pub runs: usize,
    pub params: RunParams,
    pub behaviours: BehaviourSet,
    pub seed: u64,
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<(), MitigationError> {
        if self.runs == 0 {
            return Err(MitigationError::NoRuns);
        }
        if self.observable.n() != self.target.n() {
            return Err(MitigationError::WidthMismatch { observable: self.observable.n(), circuit: self.target.n() });
        }
        if self.params.traps == 0 {
            return Err(AccreditationError::NoTraps.into());
        }
        self.params.mode.validate()?;
        self.behaviours.check_bound(&self.target)?;
        Ok(())
    }
}

/// Per-behaviour tallies and reference values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviourSummary {
    pub label: usize,
    pub runs: usize,
    pub accepted: usize,
    pub p_err: f64,
    /// Failed traps over all traps this behaviour ran; `None` if it never ran.
    pub p_inc_hat: Option<f64>,
    /// Acceptance rule evaluated at the pooled failure fraction.
    pub reference_accepted: Option<bool>,
    /// Exact expectation under this behaviour, when the register is small enough.
    pub exact_expectation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MitigationReport {
    pub runs: usize,
    pub traps: usize,
    pub accepted: usize,
    /// Mean eigenvalue over accepted runs; `None` when no run was accepted.
    pub o_mit_hat: Option<f64>,
    pub o_raw_hat: f64,
    pub accepted_lambda_sum: i64,
    pub per_behaviour: Vec<BehaviourSummary>,
    /// Spread of per-behaviour accepted means around their average.
    pub sigma_w_hat: Option<f64>,
    /// Labels accepted by the reference rule.
    pub reference_accepted: Vec<usize>,
    pub o_mit_exact: Option<f64>,
    pub o_noisy_exact: Option<f64>,
    /// Mean over accepted runs of the exact expectation of each run's behaviour (diagnostic).
    pub s_omega: Option<f64>,
    pub records: Vec<RunRecord>,
}

impl MitigationReport {
    pub fn total_circuits(&self) -> usize {
        self.runs * (self.traps + 1)
    }
}

/// Acceptance rule applied to a (possibly fractional) failure rate.
pub fn reference_accepts(params: &RunParams, failure_fraction: f64) -> bool {
    match params.mode {
        AcceptanceMode::TvdBound { epsilon } => {
            let bound = match params.bound {
                BoundKind::Conservative => 2.0 * (failure_fraction + params.theta / 2.0),
                BoundKind::PointEstimate => 2.0 * failure_fraction,
            };
            bound.min(1.0) <= epsilon
        }
        AcceptanceMode::TrapCutoff { cutoff } => params.traps as f64 * (1.0 - failure_fraction) > cutoff as f64,
    }
}

/// One run of a campaign with its own derived generator.
pub fn campaign_run(cfg: &CampaignConfig, run_index: usize) -> Result<RunRecord, MitigationError> {
    let mut rng = run_rng(cfg.seed, run_index);
    let label = sample_behaviour(&cfg.behaviours, &mut rng)?;
    let b = cfg.behaviours.get(label)?;
    let mut rec = run_accreditation(&cfg.target, &cfg.observable, &cfg.params, b, &mut rng)?;
    rec.run_index = run_index;
    Ok(rec)
}

/// Executes `cfg.runs` runs on the current rayon pool and aggregates them.
/// Results depend only on the configuration, never on scheduling.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<MitigationReport, MitigationError> {
    cfg.validate()?;
    let records = (0..cfg.runs).into_par_iter().map(|j| campaign_run(cfg, j)).collect::<Result<Vec<_>, _>>()?;
    summarize(cfg, records)
}

/// Aggregates run records, in run-index order, into a report.
pub fn summarize(cfg: &CampaignConfig, records: Vec<RunRecord>) -> Result<MitigationReport, MitigationError> {
    let n_beh = cfg.behaviours.len();
    let rotated = cfg.target.with_measurement_basis(&cfg.observable).map_err(AccreditationError::from)?;
    let exact: Option<Vec<f64>> = if cfg.target.n() <= EXACT_MAX_QUBITS {
        Some(cfg.behaviours.iter().map(|b| exact_noisy_expectation(&cfg.target, b, &cfg.observable)).collect::<Result<_, _>>()?)
    } else {
        None
    };

    let mut runs = vec![0usize; n_beh];
    let mut accepted = vec![0usize; n_beh];
    let mut failures = vec![0usize; n_beh];
    let mut accepted_lambda = vec![0i64; n_beh];
    let (mut m, mut acc_sum, mut all_sum) = (0usize, 0i64, 0i64);
    let mut s_omega_sum = 0.0;
    for r in &records {
        let i = r.behaviour_label - 1;
        runs[i] += 1;
        failures[i] += r.n_inc;
        all_sum += i64::from(r.lambda);
        if r.accepted {
            m += 1;
            accepted[i] += 1;
            acc_sum += i64::from(r.lambda);
            accepted_lambda[i] += i64::from(r.lambda);
            if let Some(e) = &exact {
                s_omega_sum += e[i];
            }
        }
    }

    let mut per_behaviour = Vec::with_capacity(n_beh);
    for (i, b) in cfg.behaviours.iter().enumerate() {
        let p_inc_hat = (runs[i] > 0).then(|| failures[i] as f64 / (runs[i] * cfg.params.traps) as f64);
        per_behaviour.push(BehaviourSummary {
            label: b.label,
            runs: runs[i],
            accepted: accepted[i],
            p_err: p_err_of(&rotated, b)?,
            p_inc_hat,
            reference_accepted: p_inc_hat.map(|f| reference_accepts(&cfg.params, f)),
            exact_expectation: exact.as_ref().map(|e| e[i]),
        });
    }
    let reference_accepted: Vec<usize> = per_behaviour.iter().filter(|s| s.reference_accepted == Some(true)).map(|s| s.label).collect();

    let o_mit_hat = (m > 0).then(|| acc_sum as f64 / m as f64);
    let means: Vec<f64> = (0..n_beh).filter(|&i| accepted[i] > 0).map(|i| accepted_lambda[i] as f64 / accepted[i] as f64).collect();
    let sigma_w_hat = if means.is_empty() {
        None
    } else {
        let centre = means.iter().sum::<f64>() / means.len() as f64;
        Some(sigma_w(&means, centre)?)
    };
    let (o_mit_exact, o_noisy_exact) = match &exact {
        Some(e) => {
            let mit = (!reference_accepted.is_empty()).then(|| reference_accepted.iter().map(|&l| e[l - 1]).sum::<f64>() / reference_accepted.len() as f64);
            (mit, Some(e.iter().sum::<f64>() / n_beh as f64))
        }
        None => (None, None),
    };

    Ok(MitigationReport {
        runs: records.len(),
        traps: cfg.params.traps,
        accepted: m,
        o_mit_hat,
        o_raw_hat: all_sum as f64 / records.len() as f64,
        accepted_lambda_sum: acc_sum,
        per_behaviour,
        sigma_w_hat,
        reference_accepted,
        o_mit_exact,
        o_noisy_exact,
        s_omega: exact.as_ref().filter(|_| m > 0).map(|_| s_omega_sum / m as f64),
        records,
    })
}

/// Uniform average of exact expectations over the `accepted` labels.
pub fn o_mit_exact(set: &BehaviourSet, accepted: &[usize], c: &LayeredCircuit, o: &PauliObservable) -> Result<f64, MitigationError> {
    if accepted.is_empty() {
        return Err(MitigationError::Empty("accepted label set"));
    }
    let mut total = 0.0;
    for &l in accepted {
        total += exact_noisy_expectation(c, set.get(l)?, o)?;
    }
    Ok(total / accepted.len() as f64)
}

/// Uniform average of exact expectations over every behaviour.
pub fn o_noisy_exact(set: &BehaviourSet, c: &LayeredCircuit, o: &PauliObservable) -> Result<f64, MitigationError> {
    let labels: Vec<usize> = set.iter().map(|b| b.label).collect();
    o_mit_exact(set, &labels, c, o)
}

/// Mean squared deviation of `values` from `o_mit`.
pub fn sigma_w(values: &[f64], o_mit: f64) -> Result<f64, MitigationError> {
    if values.is_empty() {
        return Err(MitigationError::Empty("accepted expectation set"));
    }
    Ok(values.iter().map(|v| (v - o_mit).powi(2)).sum::<f64>() / values.len() as f64)
}

/// Runs needed so the accepted-run mean lands within `epsilon1` of the
/// mitigated value with probability at least `gamma` (Chebyshev), floored at [`K_MIN`].
pub fn required_runs(n: usize, w: usize, variance_w: f64, gamma: f64, epsilon1: f64) -> Result<usize, MitigationError> {
    required_runs_with_floor(n, w, variance_w, gamma, epsilon1, K_MIN)
}

pub fn required_runs_with_floor(n: usize, w: usize, variance_w: f64, gamma: f64, epsilon1: f64, k_min: usize) -> Result<usize, MitigationError> {
    domain("gamma", gamma, gamma > 0.0 && gamma < 1.0, "(0, 1)")?;
    domain("epsilon1", epsilon1, epsilon1 > 0.0 && epsilon1.is_finite(), "(0, inf)")?;
    domain("variance_w", variance_w, variance_w >= 0.0 && variance_w.is_finite(), "[0, inf)")?;
    domain("w", w as f64, w >= 1 && w <= n, "[1, N]")?;
    let k = ceil_tolerant(n as f64 * variance_w / (w as f64 * (1.0 - gamma) * epsilon1 * epsilon1));
    Ok(k.max(k_min))
}

/// Ceiling that treats values within rounding noise of an integer as that integer.
pub(crate) fn ceil_tolerant(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

/// Which side of zero the accepted-run mean falls on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SignBranch {
    NonNegative,
    /// Negative mean bounded below by `2·lambda − 1`.
    Negative { lambda: f64 },
}

/// Relative deviation `δ` of the second convergence step for `ell` runs.
/// On the negative branch `valid` is false once `ell` exceeds the admissible cap.
pub fn deviation_bound(ell: usize, beta: f64, gamma: f64, epsilon1: f64, variance_w: f64, branch: SignBranch) -> Result<(f64, bool), MitigationError> {
    domain("ell", ell as f64, ell >= 1, "[1, inf)")?;
    domain("gamma", gamma, gamma > 0.0 && gamma < 1.0, "(0, 1)")?;
    domain("epsilon1", epsilon1, epsilon1 > 0.0 && epsilon1.is_finite(), "(0, inf)")?;
    domain("variance_w", variance_w, variance_w > 0.0 && variance_w.is_finite(), "(0, inf)")?;
    let ratio = epsilon1 * epsilon1 * (1.0 - gamma) / variance_w;
    let valid = match branch {
        SignBranch::NonNegative => {
            domain("beta", beta, (0.5..1.0).contains(&beta), "[1/2, 1)")?;
            true
        }
        SignBranch::Negative { lambda } => {
            domain("lambda", lambda, lambda > 0.0 && lambda < 0.5, "(0, 1/2)")?;
            domain("beta", beta, beta > 1.0 && beta <= 1.0 / (2.0 * lambda), "(1, 1/(2 lambda)]")?;
            let cap = (2.0 * lambda / (1.0 - 2.0 * lambda)).powi(2) / ratio;
            ell as f64 <= cap
        }
    };
    let delta = (beta / 2.0).sqrt() / (1.0 - beta).abs() * (ell as f64 * ratio).sqrt();
    Ok((delta, valid))
}

/// Circuit executions in a campaign of `k` runs with `m` traps each.
pub fn total_circuits(k: usize, m: usize) -> Result<usize, MitigationError> {
    if k == 0 {
        return Err(MitigationError::NoRuns);
    }
    if m == 0 {
        return Err(AccreditationError::NoTraps.into());
    }
    Ok(k * (m + 1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepolarizingCheck {
    pub accepted: Vec<usize>,
    pub rejected: Vec<usize>,
    /// `|⟨O⟩_mit − ⟨O⟩_id|`.
    pub mitigated_error: f64,
    /// `|⟨O⟩_noisy − ⟨O⟩_id|`.
    pub noisy_error: f64,
    /// Mitigated error strictly below the unmitigated one.
    pub holds: bool,
    /// Nothing was rejected, so the two errors coincide.
    pub vacuous: bool,
}

/// Compares mitigated and unmitigated error for globally depolarizing
/// behaviours, where each behaviour scales the ideal value by `1 − p_err`.
/// A behaviour is accepted when its error probability is at most `epsilon`.
pub fn depolarizing_check(set: &BehaviourSet, c: &LayeredCircuit, epsilon: f64, o_id: f64) -> Result<DepolarizingCheck, MitigationError> {
    domain("epsilon", epsilon, (0.0..=1.0).contains(&epsilon), "[0, 1]")?;
    domain("o_id", o_id, (-1.0..=1.0).contains(&o_id), "[-1, 1]")?;
    let mut accepted = Vec::new();
    let mut rejected = Vec::new();
    let (mut mit, mut noisy) = (0.0, 0.0);
    for b in set.iter() {
        if !b.is_depolarizing() {
            return Err(MitigationError::NotDepolarizing(b.label));
        }
        let p = p_err_of(c, b)?;
        let value = (1.0 - p) * o_id;
        noisy += value;
        if p <= epsilon {
            accepted.push(b.label);
            mit += value;
        } else {
            rejected.push(b.label);
        }
    }
    if accepted.is_empty() {
        return Err(MitigationError::Empty("accepted behaviour set"));
    }
    let mitigated_error = (mit / accepted.len() as f64 - o_id).abs();
    let noisy_error = (noisy / set.len() as f64 - o_id).abs();
    Ok(DepolarizingCheck {
        vacuous: rejected.is_empty(),
        holds: mitigated_error < noisy_error,
        accepted,
        rejected,
        mitigated_error,
        noisy_error,
    })
}
