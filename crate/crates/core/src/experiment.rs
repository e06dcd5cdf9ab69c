//! Campaign configuration documents, output artifacts, and the
//! error-versus-depth study.
//!
//! Documents are JSON with `"schema": "accredo/1"`. Floats in CSV and text
//! output are rendered with 12 significant digits so reruns are byte-identical.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::accreditation::{AcceptanceMode, AccreditationError, BoundKind, RunParams};
use crate::circuit::{brickwork_ansatz, CircuitError, LayeredCircuit};
use crate::mitigation::{run_campaign, CampaignConfig, MitigationError, MitigationReport};
use crate::noise::{BehaviourSet, FaultSpec, LayerFaults, NoiseBehaviour, NoiseError};
use crate::observable::PauliObservable;
use crate::sim::{ideal_probabilities, SimError};

pub const SCHEMA: &str = "accredo/1";
const DEFAULT_ALPHA: f64 = 0.95;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {message} (line {line}, column {column})")]
    Syntax { path: String, line: usize, column: usize, message: String },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

fn invalid(path: impl Into<String>, message: impl ToString) -> ConfigError {
    ConfigError::Invalid { path: path.into(), message: message.to_string() }
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Mitigation(#[from] MitigationError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

/// How a campaign ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// At least one campaign accepted no run, so its mitigated estimate is undefined.
    NoAcceptedRuns,
}

/// Decimal rendering with 12 significant digits.
pub fn fmt12(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0.00000000000".to_string();
    }
    let sci = format!("{:.11e}", x);
    let exp: i32 = sci[sci.find('e').expect("exponent present") + 1..].parse().expect("integer exponent");
    let decimals = (11 - exp).max(0) as usize;
    format!("{:.*}", decimals, x)
}

fn round12(x: f64) -> f64 {
    fmt12(x).parse().unwrap_or(x)
}

// ---------------------------------------------------------------------------
// Documents

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetDoc {
    /// Alternating RX(π) and brickwork CZ layers.
    Ansatz { n: usize, layers: usize },
    Circuit(LayeredCircuit),
}

/// A behaviour entry. Either `global_p_err` alone, which spreads depolarizing
/// noise evenly over every location so the whole target fails with that
/// probability, or explicit fault specs; omitted locations are noiseless.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BehaviourDoc {
    pub label: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global_p_err: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prep: Option<FaultSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entangling: Option<LayerFaults>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local: Option<LayerFaults>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meas: Option<FaultSpec>,
}

impl BehaviourDoc {
    fn resolve(&self, path: &str, c: &LayeredCircuit) -> Result<NoiseBehaviour, ConfigError> {
        if let Some(p) = self.global_p_err {
            if self.prep.is_some() || self.entangling.is_some() || self.local.is_some() || self.meas.is_some() {
                return Err(invalid(path, "global_p_err cannot be combined with explicit fault specs"));
            }
            return NoiseBehaviour::global_depolarizing(self.label, p, c).map_err(|e| match e {
                NoiseError::Invalid { message, .. } => invalid(format!("{path}.global_p_err"), message),
                other => invalid(path, other),
            });
        }
        Ok(NoiseBehaviour {
            label: self.label,
            prep: self.prep.clone().unwrap_or_else(FaultSpec::none),
            entangling: self.entangling.clone().unwrap_or(LayerFaults::Uniform(FaultSpec::none())),
            local: self.local.clone().unwrap_or(LayerFaults::Uniform(FaultSpec::none())),
            meas: self.meas.clone().unwrap_or_else(FaultSpec::none),
        })
    }
}

fn resolve_behaviours(docs: &[BehaviourDoc], c: &LayeredCircuit) -> Result<BehaviourSet, ConfigError> {
    if docs.is_empty() {
        return Err(invalid("behaviours", "at least one behaviour is required"));
    }
    let resolved = docs.iter().enumerate().map(|(i, d)| d.resolve(&format!("behaviours[{i}]"), c)).collect::<Result<Vec<_>, _>>()?;
    let set = BehaviourSet::new(resolved).map_err(|e| match e {
        NoiseError::Invalid { path, message } => invalid(path, message),
        other => invalid("behaviours", other),
    })?;
    for (i, d) in docs.iter().enumerate() {
        set.get(d.label).and_then(|b| b.check_bound(c)).map_err(|e| invalid(format!("behaviours[{i}]"), e))?;
    }
    Ok(set)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    pub schema: String,
    pub target: TargetDoc,
    pub observable: String,
    pub runs: usize,
    /// Trap count; the half-width follows from `alpha`. Mutually exclusive with `theta`.
    #[serde(default)]
    pub traps: Option<usize>,
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub bound: BoundKind,
    pub acceptance: AcceptanceMode,
    pub behaviours: Vec<BehaviourDoc>,
    #[serde(default)]
    pub seed: u64,
}

fn parse_doc<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        ConfigError::Syntax { path, line: inner.line(), column: inner.column(), message: inner.to_string() }
    })
}

fn check_schema(schema: &str) -> Result<(), ConfigError> {
    if schema == SCHEMA {
        Ok(())
    } else {
        Err(invalid("schema", format!("expected {SCHEMA:?}, got {schema:?}")))
    }
}

fn build_target(t: &TargetDoc) -> Result<LayeredCircuit, ConfigError> {
    match t {
        TargetDoc::Ansatz { n, layers } => brickwork_ansatz(*n, *layers).map_err(|e| invalid("target.ansatz", e)),
        TargetDoc::Circuit(c) => Ok(c.clone()),
    }
}

fn build_params(traps: Option<usize>, theta: Option<f64>, alpha: Option<f64>, bound: BoundKind, mode: AcceptanceMode) -> Result<RunParams, ConfigError> {
    let alpha = alpha.unwrap_or(DEFAULT_ALPHA);
    let params = match (traps, theta) {
        (Some(_), Some(_)) => return Err(invalid("traps", "give either traps or theta, not both")),
        (None, None) => return Err(invalid("traps", "one of traps or theta is required")),
        (Some(m), None) => RunParams::from_traps(m, alpha, mode),
        (None, Some(t)) => RunParams::from_confidence(alpha, t, mode),
    };
    params.map(|p| p.with_bound(bound)).map_err(|e| {
        let path = match e {
            AccreditationError::BadAlpha(_) => "alpha",
            AccreditationError::BadTheta(_) => "theta",
            AccreditationError::BadEpsilon(_) => "acceptance.epsilon",
            _ => "traps",
        };
        invalid(path, e)
    })
}

impl ConfigDoc {
    pub fn into_campaign(self) -> Result<CampaignConfig, ConfigError> {
        check_schema(&self.schema)?;
        let target = build_target(&self.target)?;
        let observable: PauliObservable = self.observable.parse().map_err(|e| invalid("observable", e))?;
        if observable.n() != target.n() {
            return Err(invalid("observable", CircuitError::WidthMismatch { observable: observable.n(), circuit: target.n() }));
        }
        if self.runs == 0 {
            return Err(invalid("runs", "must be at least 1"));
        }
        let params = build_params(self.traps, self.theta, self.alpha, self.bound, self.acceptance)?;
        let behaviours = resolve_behaviours(&self.behaviours, &target)?;
        Ok(CampaignConfig { target, observable, runs: self.runs, params, behaviours, seed: self.seed })
    }
}

pub fn parse_config(text: &str) -> Result<CampaignConfig, ConfigError> {
    parse_doc::<ConfigDoc>(text)?.into_campaign()
}

fn read(path: &Path) -> Result<String, ConfigError> {
    fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })
}

pub fn load_config(path: &Path) -> Result<CampaignConfig, ConfigError> {
    parse_config(&read(path)?)
}

// ---------------------------------------------------------------------------
// Artifacts

pub const RUNS_CSV: &str = "runs.csv";
pub const REPORT_JSON: &str = "report.json";
pub const SUMMARY_TXT: &str = "summary.txt";
pub const DEPTH_SWEEP_CSV: &str = "depth_sweep.csv";

pub fn runs_csv(report: &MitigationReport) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["run_index", "behaviour_label", "nu", "n_inc", "tvd_bound", "accepted", "target_bits", "lambda", "target_frame"])?;
    for r in &report.records {
        w.write_record([
            r.run_index.to_string(),
            r.behaviour_label.to_string(),
            r.nu.to_string(),
            r.n_inc.to_string(),
            fmt12(r.tvd_bound),
            r.accepted.to_string(),
            r.target_bits.to_string(),
            r.lambda.to_string(),
            r.target_frame.to_string(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv of ascii fields"))
}

fn opt12(x: Option<f64>) -> serde_json::Value {
    x.map_or(serde_json::Value::Null, |v| json!(round12(v)))
}

fn mode_name(mode: &AcceptanceMode) -> &'static str {
    match mode {
        AcceptanceMode::TvdBound { .. } => "tvd_bound",
        AcceptanceMode::TrapCutoff { .. } => "trap_cutoff",
    }
}

pub fn report_json(cfg: &CampaignConfig, report: &MitigationReport) -> String {
    let per_behaviour: Vec<_> = report
        .per_behaviour
        .iter()
        .map(|b| {
            json!({
                "label": b.label,
                "runs": b.runs,
                "accepted": b.accepted,
                "p_err": round12(b.p_err),
                "p_inc_hat": opt12(b.p_inc_hat),
                "reference_accepted": b.reference_accepted,
                "exact_expectation": opt12(b.exact_expectation),
            })
        })
        .collect();
    let doc = json!({
        "schema": SCHEMA,
        "status": if report.o_mit_hat.is_some() { "ok" } else { "no accepted runs" },
        "seed": cfg.seed,
        "observable": cfg.observable.to_string(),
        "n": cfg.target.n(),
        "m": cfg.target.m(),
        "K": report.runs,
        "M": report.traps,
        "theta": round12(cfg.params.theta),
        "bound": cfg.params.bound,
        "acceptance": cfg.params.mode,
        "accepted": report.accepted,
        "o_mit_hat": opt12(report.o_mit_hat),
        "o_raw_hat": round12(report.o_raw_hat),
        "accepted_lambda_sum": report.accepted_lambda_sum,
        "sigma_w_hat": opt12(report.sigma_w_hat),
        "reference_accepted": report.reference_accepted,
        "o_mit_exact": opt12(report.o_mit_exact),
        "o_noisy_exact": opt12(report.o_noisy_exact),
        "s_omega": opt12(report.s_omega),
        "total_circuits": report.total_circuits(),
        "per_behaviour": per_behaviour,
        "runs_csv": RUNS_CSV,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("json values serialize");
    s.push('\n');
    s
}

pub fn summary_txt(cfg: &CampaignConfig, report: &MitigationReport) -> String {
    let o_mit = report.o_mit_hat.map_or_else(|| "undefined (no accepted runs)".to_string(), fmt12);
    let mut out = String::new();
    out.push_str(&format!("observable       {}\n", cfg.observable));
    out.push_str(&format!("o_mit_hat        {o_mit}\n"));
    out.push_str(&format!("o_raw_hat        {}\n", fmt12(report.o_raw_hat)));
    out.push_str(&format!("m                {}\n", report.accepted));
    out.push_str(&format!("K                {}\n", report.runs));
    out.push_str(&format!("M                {}\n", report.traps));
    out.push_str(&format!("C_tot            {}\n", report.total_circuits()));
    out.push_str(&format!("acceptance       {} ({})\n", mode_name(&cfg.params.mode), cfg.params.mode));
    out
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), ExperimentError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| ExperimentError::Io { path, source })
}

fn ensure_dir(dir: &Path) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir).map_err(|source| ExperimentError::Io { path: dir.to_path_buf(), source })
}

/// Runs a campaign and writes `runs.csv`, `report.json` and `summary.txt` into `out`.
pub fn run_experiment(cfg: &CampaignConfig, out: &Path) -> Result<(Status, MitigationReport), ExperimentError> {
    let report = run_campaign(cfg)?;
    ensure_dir(out)?;
    write(out, RUNS_CSV, &runs_csv(&report)?)?;
    write(out, REPORT_JSON, &report_json(cfg, &report))?;
    write(out, SUMMARY_TXT, &summary_txt(cfg, &report))?;
    let status = if report.o_mit_hat.is_some() { Status::Ok } else { Status::NoAcceptedRuns };
    Ok((status, report))
}

// ---------------------------------------------------------------------------
// Error versus depth

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PresetAcceptance {
    TvdBound { epsilon: f64 },
    /// One cutoff per entry of `layer_counts`.
    TrapCutoff { cutoffs: Vec<usize> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetDoc {
    pub schema: String,
    pub name: String,
    pub n: usize,
    pub layer_counts: Vec<usize>,
    pub traps: usize,
    pub runs: usize,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub bound: BoundKind,
    pub acceptance: PresetAcceptance,
    pub behaviours: Vec<BehaviourDoc>,
    #[serde(default)]
    pub seed: u64,
}

/// A validated preset: one campaign per depth.
#[derive(Debug, Clone)]
pub struct ExperimentPreset {
    pub name: String,
    pub campaigns: Vec<(usize, CampaignConfig)>,
}

impl PresetDoc {
    pub fn into_preset(self) -> Result<ExperimentPreset, ConfigError> {
        check_schema(&self.schema)?;
        if self.layer_counts.is_empty() {
            return Err(invalid("layer_counts", "at least one depth is required"));
        }
        if let PresetAcceptance::TrapCutoff { cutoffs } = &self.acceptance {
            if cutoffs.len() != self.layer_counts.len() {
                return Err(invalid(
                    "acceptance.cutoffs",
                    format!("{} cutoffs for {} depths", cutoffs.len(), self.layer_counts.len()),
                ));
            }
        }
        if self.runs == 0 {
            return Err(invalid("runs", "must be at least 1"));
        }
        let observable = PauliObservable::z_on(self.n, 0).map_err(|e| invalid("n", e))?;
        let mut campaigns = Vec::with_capacity(self.layer_counts.len());
        for (i, &depth) in self.layer_counts.iter().enumerate() {
            let target = brickwork_ansatz(self.n, depth).map_err(|e| invalid(format!("layer_counts[{i}]"), e))?;
            let mode = match &self.acceptance {
                PresetAcceptance::TvdBound { epsilon } => AcceptanceMode::TvdBound { epsilon: *epsilon },
                PresetAcceptance::TrapCutoff { cutoffs } => AcceptanceMode::TrapCutoff { cutoff: cutoffs[i] },
            };
            let params = build_params(Some(self.traps), None, self.alpha, self.bound, mode)?;
            let behaviours = resolve_behaviours(&self.behaviours, &target)?;
            campaigns.push((depth, CampaignConfig { target, observable: observable.clone(), runs: self.runs, params, behaviours, seed: self.seed }));
        }
        Ok(ExperimentPreset { name: self.name, campaigns })
    }
}

pub fn parse_preset(text: &str) -> Result<ExperimentPreset, ConfigError> {
    parse_doc::<PresetDoc>(text)?.into_preset()
}

/// Built-in presets by name.
pub fn builtin_preset(name: &str) -> Option<&'static str> {
    match name {
        "depth-sweep" => Some(include_str!("../presets/depth-sweep.json")),
        "depth-sweep-small" => Some(include_str!("../presets/depth-sweep-small.json")),
        _ => None,
    }
}

/// A file path, or the name of a built-in preset.
pub fn load_preset(source: &str) -> Result<ExperimentPreset, ConfigError> {
    let path = Path::new(source);
    if path.exists() {
        return parse_preset(&read(path)?);
    }
    match builtin_preset(source) {
        Some(text) => parse_preset(text),
        None => Err(ConfigError::Io { path: path.to_path_buf(), source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or built-in preset") }),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepthSweepRow {
    pub depth: usize,
    pub ideal_z_avg: f64,
    pub e_abs_raw: f64,
    /// `None` when no run was accepted.
    pub e_abs_postselected: Option<f64>,
    pub m: usize,
    pub k: usize,
    /// Behaviours accepted by the reference rule, and the total.
    pub reference_w: usize,
    pub behaviours: usize,
}

/// Mean over qubits of `⟨σ_Z⟩` on each qubit.
pub fn z_average<'a>(n: usize, outcomes: impl Iterator<Item = &'a crate::bits::BitString>) -> Option<f64> {
    let mut ones = vec![0usize; n];
    let mut count = 0usize;
    for s in outcomes {
        count += 1;
        for (q, o) in ones.iter_mut().enumerate() {
            *o += s.get(q) as usize;
        }
    }
    (count > 0).then(|| ones.iter().map(|&k| 1.0 - 2.0 * k as f64 / count as f64).sum::<f64>() / n as f64)
}

fn ideal_z_average(c: &LayeredCircuit) -> Result<f64, SimError> {
    let p = ideal_probabilities(c)?;
    let n = c.n();
    Ok((0..n).map(|q| p.iter().enumerate().map(|(b, v)| if b >> q & 1 == 1 { -v } else { *v }).sum::<f64>()).sum::<f64>() / n as f64)
}

pub fn depth_sweep_rows(preset: &ExperimentPreset) -> Result<Vec<DepthSweepRow>, ExperimentError> {
    preset
        .campaigns
        .iter()
        .map(|(depth, cfg)| {
            let report = run_campaign(cfg)?;
            let ideal = ideal_z_average(&cfg.target)?;
            let n = cfg.target.n();
            let raw = z_average(n, report.records.iter().map(|r| &r.target_bits)).expect("at least one run");
            let post = z_average(n, report.records.iter().filter(|r| r.accepted).map(|r| &r.target_bits));
            Ok(DepthSweepRow {
                depth: *depth,
                ideal_z_avg: ideal,
                e_abs_raw: (ideal - raw).abs(),
                e_abs_postselected: post.map(|p| (ideal - p).abs()),
                m: report.accepted,
                k: report.runs,
                reference_w: report.reference_accepted.len(),
                behaviours: cfg.behaviours.len(),
            })
        })
        .collect()
}

pub fn depth_sweep_csv(rows: &[DepthSweepRow]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["depth", "e_abs_raw", "e_abs_postselected", "m", "K"])?;
    for r in rows {
        w.write_record([r.depth.to_string(), fmt12(r.e_abs_raw), r.e_abs_postselected.map_or_else(String::new, fmt12), r.m.to_string(), r.k.to_string()])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv of ascii fields"))
}

/// Runs every depth of `preset` and writes `depth_sweep.csv` into `out`.
pub fn depth_sweep_experiment(preset: &ExperimentPreset, out: &Path) -> Result<(Status, Vec<DepthSweepRow>), ExperimentError> {
    let rows = depth_sweep_rows(preset)?;
    ensure_dir(out)?;
    write(out, DEPTH_SWEEP_CSV, &depth_sweep_csv(&rows)?)?;
    let status = if rows.iter().all(|r| r.m > 0) { Status::Ok } else { Status::NoAcceptedRuns };
    Ok((status, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schema": "accredo/1",
        "target": {"ansatz": {"n": 2, "layers": 3}},
        "observable": "ZI",
        "runs": 100,
        "traps": 8,
        "acceptance": {"kind": "tvd_bound", "epsilon": 1.0},
        "behaviours": [{"label": 1}],
        "seed": 7
    }"#;

    #[test]
    fn fmt12_renders_twelve_significant_digits() {
        assert_eq!(fmt12(0.451_680_672_268_907_5), "0.451680672269");
        assert_eq!(fmt12(-0.8), "-0.800000000000");
        assert_eq!(fmt12(1.0), "1.00000000000");
        assert_eq!(fmt12(0.0), "0.00000000000");
        assert_eq!(fmt12(-0.0), "0.00000000000");
        assert_eq!(fmt12(123.456), "123.456000000");
        assert_eq!(fmt12(0.000_123), "0.000123000000000");
    }

    #[test]
    fn minimal_config_runs() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.params.traps, 8);
        let dir = tempfile::tempdir().unwrap();
        let (status, report) = run_experiment(&cfg, dir.path()).unwrap();
        assert_eq!(status, Status::Ok);
        assert_eq!(report.accepted, 100);
        let csv = fs::read_to_string(dir.path().join(RUNS_CSV)).unwrap();
        assert_eq!(csv.lines().count(), 101);
        assert!(fs::read_to_string(dir.path().join(SUMMARY_TXT)).unwrap().contains("C_tot            900"));
        let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join(REPORT_JSON)).unwrap()).unwrap();
        assert_eq!(json["schema"], SCHEMA);
        assert_eq!(json["accepted"], 100);
    }

    #[test]
    fn runs_csv_golden() {
        let mut cfg = parse_config(MINIMAL).unwrap();
        cfg.runs = 3;
        let report = run_campaign(&cfg).unwrap();
        let csv = runs_csv(&report).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "run_index,behaviour_label,nu,n_inc,tvd_bound,accepted,target_bits,lambda,target_frame");
        // Noiseless, two RX(π) layers: the target returns 00 and every trap succeeds.
        for (i, line) in lines.enumerate() {
            let f: Vec<&str> = line.split(',').collect();
            assert_eq!(f.len(), 9);
            assert_eq!(f[0], i.to_string());
            assert_eq!(&f[1..2], ["1"]);
            assert_eq!(f[3], "0");
            assert_eq!(f[4], fmt12(cfg.params.theta));
            assert_eq!(&f[5..8], ["true", "00", "1"]);
            assert!(f[8].starts_with('+') && f[8].len() == 3);
        }
    }

    #[test]
    fn validation_errors_name_the_field() {
        let bad_p = MINIMAL.replace(r#"{"label": 1}"#, r#"{"label": 1, "meas": {"p": 1.3, "dist": "depolarizing"}}"#);
        let e = parse_config(&bad_p).unwrap_err().to_string();
        assert!(e.contains("behaviours[0].meas.p"), "{e}");

        let bad_type = MINIMAL.replace(r#""runs": 100"#, r#""runs": "many""#);
        let e = parse_config(&bad_type).unwrap_err();
        assert!(matches!(&e, ConfigError::Syntax { path, line: 5, .. } if path == "runs"), "{e}");

        let unknown = MINIMAL.replace(r#""seed": 7"#, r#""seed": 7, "sede": 1"#);
        assert!(parse_config(&unknown).is_err());

        let schema = MINIMAL.replace("accredo/1", "accredo/0");
        assert!(parse_config(&schema).unwrap_err().to_string().starts_with("schema"));

        let both = MINIMAL.replace(r#""traps": 8"#, r#""traps": 8, "theta": 0.5"#);
        assert!(parse_config(&both).unwrap_err().to_string().starts_with("traps"));

        let eps = MINIMAL.replace(r#""epsilon": 1.0"#, r#""epsilon": 1.5"#);
        assert!(parse_config(&eps).unwrap_err().to_string().starts_with("acceptance.epsilon"));

        let labels = MINIMAL.replace(r#"{"label": 1}"#, r#"{"label": 2}"#);
        assert!(parse_config(&labels).unwrap_err().to_string().starts_with("behaviours[0].label"));

        let global = MINIMAL.replace(r#"{"label": 1}"#, r#"{"label": 1, "global_p_err": 2.0}"#);
        assert!(parse_config(&global).unwrap_err().to_string().starts_with("behaviours[0].global_p_err"));

        let depth = MINIMAL.replace(r#"{"label": 1}"#, r#"{"label": 1, "local": [{"p": 0.1, "dist": "depolarizing"}]}"#);
        assert!(parse_config(&depth).unwrap_err().to_string().starts_with("behaviours[0]"));

        let width = MINIMAL.replace(r#""ZI""#, r#""ZII""#);
        assert!(parse_config(&width).unwrap_err().to_string().starts_with("observable"));
    }

    #[test]
    fn theta_configuration() {
        let t = MINIMAL.replace(r#""traps": 8"#, r#""theta": 0.25"#);
        let cfg = parse_config(&t).unwrap();
        assert_eq!(cfg.params.traps, 119);
        assert_eq!(cfg.params.theta, 0.25);
    }

    #[test]
    fn no_accepted_runs_status() {
        let cfg = parse_config(&MINIMAL.replace(r#""epsilon": 1.0"#, r#""epsilon": 0.0"#)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (status, _) = run_experiment(&cfg, dir.path()).unwrap();
        assert_eq!(status, Status::NoAcceptedRuns);
        let json = fs::read_to_string(dir.path().join(REPORT_JSON)).unwrap();
        assert!(json.contains(r#""o_mit_hat": null"#) && json.contains("no accepted runs"));
        assert!(fs::read_to_string(dir.path().join(SUMMARY_TXT)).unwrap().contains("undefined"));
    }

    #[test]
    fn builtin_presets_parse() {
        let full = load_preset("depth-sweep").unwrap();
        assert_eq!(full.campaigns.iter().map(|c| c.0).collect::<Vec<_>>(), vec![5, 7, 9, 11, 13]);
        let cutoffs: Vec<_> = full.campaigns.iter().map(|c| c.1.params.mode).collect();
        assert_eq!(cutoffs[0], AcceptanceMode::TrapCutoff { cutoff: 6 });
        assert_eq!(cutoffs[4], AcceptanceMode::TrapCutoff { cutoff: 4 });
        assert!(full.campaigns.iter().all(|(_, c)| c.params.traps == 15 && c.runs == 750));
        assert!(load_preset("depth-sweep-small").is_ok());
        assert!(load_preset("nope").is_err());
    }

    #[test]
    fn preset_cutoff_count_must_match() {
        let mut doc: PresetDoc = serde_json::from_str(builtin_preset("depth-sweep-small").unwrap()).unwrap();
        doc.acceptance = PresetAcceptance::TrapCutoff { cutoffs: vec![6] };
        assert!(doc.into_preset().unwrap_err().to_string().starts_with("acceptance.cutoffs"));
    }

    #[test]
    fn noiseless_preset_has_zero_error() {
        let text = r#"{"schema": "accredo/1", "name": "clean", "n": 3, "layer_counts": [1, 3, 5], "traps": 4, "runs": 40,
            "acceptance": {"kind": "tvd_bound", "epsilon": 1.0}, "behaviours": [{"label": 1}], "seed": 2}"#;
        let rows = depth_sweep_rows(&parse_preset(text).unwrap()).unwrap();
        for r in &rows {
            assert_eq!(r.e_abs_raw, 0.0);
            assert_eq!(r.e_abs_postselected, Some(0.0));
            assert_eq!(r.m, 40);
        }
        // Odd counts of RX(π) layers flip every qubit.
        for (r, want) in rows.iter().zip([-1.0, 1.0, -1.0]) {
            assert!((r.ideal_z_avg - want).abs() < 1e-12, "{r:?}");
        }
        assert_eq!(depth_sweep_csv(&rows).unwrap().lines().next().unwrap(), "depth,e_abs_raw,e_abs_postselected,m,K");
    }

    #[test]
    fn single_behaviour_vacuous_filter_coincides() {
        let text = r#"{"schema": "accredo/1", "name": "one", "n": 2, "layer_counts": [3, 5], "traps": 6, "runs": 60,
            "acceptance": {"kind": "tvd_bound", "epsilon": 1.0}, "behaviours": [{"label": 1, "global_p_err": 0.3}], "seed": 4}"#;
        for r in depth_sweep_rows(&parse_preset(text).unwrap()).unwrap() {
            assert_eq!(Some(r.e_abs_raw), r.e_abs_postselected);
        }
    }

    #[test]
    fn z_average_of_known_strings() {
        let s: Vec<crate::bits::BitString> = ["00", "01", "11", "11"].iter().map(|t| t.parse().unwrap()).collect();
        // Qubit 0: two zeros, two ones -> 0. Qubit 1: one zero, three ones -> -0.5.
        assert!((z_average(2, s.iter()).unwrap() + 0.25).abs() < 1e-15);
        assert_eq!(z_average(2, std::iter::empty()), None);
    }
}
