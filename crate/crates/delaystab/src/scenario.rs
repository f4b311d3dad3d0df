//! Scenario files, experiment orchestration, and result persistence.
//!
//! A scenario is a single TOML file with `[system]`, `[synthesis]`,
//! `[simulation]` and `[output]` sections. Parsing is strict: unknown keys
//! are errors (a typo in a tolerance should never be absorbed silently), and
//! semantic validation reports every violation it finds, not just the first.

use crate::error::{Error, Result};
use crate::interval::IntervalSet;
use crate::modal::{
    build_interior_model, build_localized_interior_model, build_neumann_boundary_model,
    check_assumptions, ModalSystem,
};
use crate::simulate::{
    estimate_decay_rate, simulate_closed_loop, simulate_two_phase, HistoryFn, SimConfig,
    Trajectory,
};
use crate::synthesis::{synthesize, synthesize_localized, FeedbackLaw, SynthesisRequest};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub system: SystemSpec,
    pub synthesis: SynthesisSpec,
    #[serde(default)]
    pub simulation: SimulationSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub model: ModelKind,
    #[serde(default = "default_n_modes")]
    pub n_modes: usize,
    #[serde(default)]
    pub kappa: f64,
    pub tau: f64,
    /// Actuator region for the interior model.
    pub omega: Option<Vec<(f64, f64)>>,
    /// Delay region for the localized model.
    pub omega1: Option<Vec<(f64, f64)>>,
    /// Actuator region for the localized model.
    pub omega2: Option<Vec<(f64, f64)>>,
    /// Dissipative shift for the Neumann boundary model.
    pub alpha_shift: Option<f64>,
    /// Explicit eigenvalues for the custom model.
    pub mu: Option<Vec<f64>>,
    /// Explicit control matrix rows for the custom model.
    pub b: Option<Vec<Vec<f64>>>,
}

fn default_n_modes() -> usize {
    24
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Interior,
    Neumann,
    Custom,
    Localized,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SynthesisSpec {
    /// Requested decay rates, increasing.
    pub alphas: Vec<f64>,
    pub gamma: Option<f64>,
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default)]
    pub mode: SynthesisMode,
}

fn default_margin() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SynthesisMode {
    #[default]
    Instantaneous,
    TwoPhase,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct SimulationSpec {
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
    #[serde(default)]
    pub history: HistorySpec,
    /// Initial modal state; all ones when omitted.
    pub y0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HistorySpec {
    Constant { value: f64 },
    Samples { thetas: Vec<f64>, values: Vec<Vec<f64>> },
    Exp { lambda: f64 },
}

impl Default for HistorySpec {
    fn default() -> Self {
        HistorySpec::Constant { value: 1.0 }
    }
}

impl HistorySpec {
    pub fn to_history(&self, n_modes: usize) -> Result<HistoryFn> {
        Ok(match self {
            HistorySpec::Constant { value } => HistoryFn::Constant(*value),
            HistorySpec::Exp { lambda } => HistoryFn::ExpLambda(*lambda),
            HistorySpec::Samples { thetas, values } => {
                if values.len() != n_modes {
                    return Err(Error::InvalidConfig(format!(
                        "history values must have {n_modes} rows"
                    )));
                }
                let cols = thetas.len();
                if values.iter().any(|r| r.len() != cols) {
                    return Err(Error::InvalidConfig(
                        "ragged history sample rows".into(),
                    ));
                }
                HistoryFn::Samples {
                    thetas: thetas.clone(),
                    values: DMatrix::from_fn(n_modes, cols, |r, c| values[r][c]),
                }
            }
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_out_dir")]
    pub directory: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
}

fn default_out_dir() -> String {
    "out".into()
}

fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Csv, OutputFormat::Json, OutputFormat::Summary]
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            directory: default_out_dir(),
            formats: default_formats(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
    Summary,
}

/// Parse and validate a scenario file. Structural problems (unknown keys,
/// type mismatches) surface as parse errors; semantic violations are
/// collected exhaustively.
pub fn parse_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario_str(&text)
}

pub fn parse_scenario_str(text: &str) -> Result<Scenario> {
    let scenario: Scenario =
        toml::from_str(text).map_err(|e| Error::ScenarioParse(e.to_string()))?;
    let violations = validate(&scenario);
    if !violations.is_empty() {
        return Err(Error::ScenarioInvalid(violations));
    }
    Ok(scenario)
}

fn valid_intervals(raw: &[(f64, f64)], what: &str, out: &mut Vec<String>) {
    if let Err(e) = IntervalSet::new(raw.to_vec()) {
        out.push(format!("{what}: {e}"));
    }
}

fn validate(s: &Scenario) -> Vec<String> {
    let mut v = Vec::new();
    let sys = &s.system;
    if sys.tau <= 0.0 || !sys.tau.is_finite() {
        v.push("system.tau must be positive".into());
    }
    if sys.n_modes == 0 {
        v.push("system.n_modes must be at least 1".into());
    }
    if !sys.kappa.is_finite() {
        v.push("system.kappa must be finite".into());
    }
    match sys.model {
        ModelKind::Interior => {
            match &sys.omega {
                Some(raw) => valid_intervals(raw, "system.omega", &mut v),
                None => v.push("interior model requires system.omega".into()),
            }
            if sys.omega1.is_some() || sys.omega2.is_some() {
                v.push("omega1/omega2 belong to the localized model".into());
            }
        }
        ModelKind::Localized => {
            match (&sys.omega1, &sys.omega2) {
                (Some(w1), Some(w2)) => {
                    valid_intervals(w1, "system.omega1", &mut v);
                    valid_intervals(w2, "system.omega2", &mut v);
                    if let (Ok(a), Ok(b)) =
                        (IntervalSet::new(w1.clone()), IntervalSet::new(w2.clone()))
                    {
                        if !a.covers_unit_with(&b, 1e-12) {
                            v.push(
                                "system.omega1 and system.omega2 must be a disjoint cover of \
                                 (0,1): overlapping or gapped pairs are rejected"
                                    .into(),
                            );
                        }
                    }
                }
                _ => v.push("localized model requires system.omega1 and system.omega2".into()),
            }
        }
        ModelKind::Neumann => match sys.alpha_shift {
            Some(a) if a > 0.0 && a.is_finite() => {}
            Some(_) => v.push(
                "system.alpha_shift must be positive: the Neumann lift exists only for a \
                 strictly dissipative shift"
                    .into(),
            ),
            None => v.push("neumann model requires system.alpha_shift".into()),
        },
        ModelKind::Custom => {
            match (&sys.mu, &sys.b) {
                (Some(mu), Some(b)) => {
                    if mu.len() != sys.n_modes {
                        v.push("system.mu length must equal n_modes".into());
                    }
                    if b.len() != mu.len() {
                        v.push("system.b must have one row per mode".into());
                    }
                    let cols = b.first().map_or(0, |r| r.len());
                    if b.iter().any(|r| r.len() != cols) || cols == 0 {
                        v.push("system.b rows must be nonempty and equally long".into());
                    }
                    if mu.windows(2).any(|w| w[0] <= w[1]) {
                        v.push("system.mu must be strictly decreasing".into());
                    }
                    if mu.iter().any(|x| !x.is_finite())
                        || b.iter().flatten().any(|x| !x.is_finite())
                    {
                        v.push("system.mu and system.b must be finite".into());
                    }
                }
                _ => v.push("custom model requires system.mu and system.b".into()),
            }
        }
    }
    let syn = &s.synthesis;
    if syn.alphas.is_empty() {
        v.push("synthesis.alphas must be nonempty".into());
    }
    if syn.alphas.iter().any(|a| *a <= 0.0 || !a.is_finite()) {
        v.push("synthesis.alphas must be positive".into());
    }
    if syn.alphas.windows(2).any(|w| w[0] >= w[1]) {
        v.push("synthesis.alphas must be strictly increasing".into());
    }
    if syn.margin <= 0.0 || !syn.margin.is_finite() {
        v.push("synthesis.margin must be positive".into());
    }
    if let Some(g) = syn.gamma {
        if syn.alphas.iter().any(|a| g < *a) {
            v.push("synthesis.gamma must be at least every requested alpha".into());
        }
    }
    if syn.mode == SynthesisMode::TwoPhase && sys.model != ModelKind::Localized {
        v.push("two_phase synthesis requires the localized model".into());
    }
    let sim = &s.simulation;
    if let Some(dt) = sim.dt {
        if dt <= 0.0 || !dt.is_finite() {
            v.push("simulation.dt must be positive".into());
        }
    }
    if let Some(h) = sim.horizon {
        if h < 2.0 * sys.tau {
            v.push("simulation.horizon must be at least 2 tau".into());
        }
    }
    if let Some(y0) = &sim.y0 {
        if y0.len() != sys.n_modes {
            v.push("simulation.y0 length must equal n_modes".into());
        }
        if y0.iter().any(|x| !x.is_finite()) {
            v.push("simulation.y0 must be finite".into());
        }
    }
    v
}

/// Instantiate the modal system described by a validated scenario.
pub fn build_system(s: &Scenario) -> Result<ModalSystem> {
    let sys = &s.system;
    let missing = |what: &str| Error::InvalidModel(format!("scenario lacks {what}"));
    match sys.model {
        ModelKind::Interior => {
            let raw = sys.omega.clone().ok_or_else(|| missing("system.omega"))?;
            let omega = IntervalSet::new(raw)?;
            build_interior_model(sys.n_modes, &omega, sys.kappa, sys.tau)
        }
        ModelKind::Localized => {
            let w1 = IntervalSet::new(sys.omega1.clone().ok_or_else(|| missing("system.omega1"))?)?;
            let w2 = IntervalSet::new(sys.omega2.clone().ok_or_else(|| missing("system.omega2"))?)?;
            build_localized_interior_model(sys.n_modes, &w1, &w2, sys.kappa, sys.tau)
        }
        ModelKind::Neumann => build_neumann_boundary_model(
            sys.n_modes,
            sys.alpha_shift.ok_or_else(|| missing("system.alpha_shift"))?,
            sys.kappa,
            sys.tau,
        ),
        ModelKind::Custom => {
            let mu = sys.mu.clone().ok_or_else(|| missing("system.mu"))?;
            let b = sys.b.clone().ok_or_else(|| missing("system.b"))?;
            let rows = b.len();
            let cols = b.first().map_or(0, |r| r.len());
            if rows == 0 || cols == 0 || b.iter().any(|r| r.len() != cols) {
                return Err(Error::InvalidModel("system.b must be rectangular and nonempty".into()));
            }
            let bm = DMatrix::from_fn(rows, cols, |r, c| b[r][c]);
            ModalSystem::custom(mu, bm, sys.kappa, sys.tau)
        }
    }
}

/// Per-rate outcome stored in the run record.
#[derive(Debug, Clone, Serialize)]
pub struct RunEntry {
    pub alpha: f64,
    pub law: Option<FeedbackLaw>,
    pub alpha_hat: Option<f64>,
    pub c_hat: Option<f64>,
    /// Two-phase runs only: the control was identically zero on [0, tau].
    pub control_zero_before_switch: Option<bool>,
    pub error: Option<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub scenario_hash: String,
    pub tool_version: String,
    pub started_at: String,
    pub finished_at: String,
    pub mode: SynthesisMode,
    pub admissibility_surrogate: f64,
    pub open_loop_abscissa: Option<f64>,
    pub entries: Vec<RunEntry>,
    pub aggregate_pass: bool,
}

/// Canonical scenario hash: the parsed structure is re-serialized with a
/// fixed field order, so cosmetic key reordering in the file does not change
/// the hash.
pub fn scenario_hash(s: &Scenario) -> String {
    let canonical = serde_json::to_string(s).expect("scenario serialization cannot fail");
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    let digest = hasher.finalize();
    digest.iter().fold(String::new(), |mut acc, b| {
        let _ = write!(acc, "{b:02x}");
        acc
    })
}

/// Run the scenario end to end: assumption check, per-alpha synthesis,
/// simulation, decay verification. Partial failures are recorded per entry;
/// the aggregate passes only when every entry passes.
pub fn run_scenario(s: &Scenario) -> Result<(RunRecord, Vec<(f64, Trajectory)>)> {
    let started_at = chrono::Utc::now().to_rfc3339();
    let sys = build_system(s)?;
    let assumptions = check_assumptions(&sys);
    if !assumptions.pass() {
        return Err(Error::InvalidModel(format!(
            "assumption check failed: {}",
            assumptions.violations.join("; ")
        )));
    }
    let open_loop_abscissa = crate::roots::spectral_abscissa(&sys, 1e-9)
        .ok()
        .map(|r| r.value);
    let mut entries = Vec::new();
    let mut trajectories = Vec::new();
    for &alpha in &s.synthesis.alphas {
        let entry = match s.synthesis.mode {
            SynthesisMode::Instantaneous => run_instantaneous(s, &sys, alpha, &mut trajectories),
            SynthesisMode::TwoPhase => run_two_phase(s, &sys, alpha, &mut trajectories),
        };
        entries.push(entry);
    }
    let aggregate_pass = entries.iter().all(|e| e.pass);
    Ok((
        RunRecord {
            scenario_hash: scenario_hash(s),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            started_at,
            finished_at: chrono::Utc::now().to_rfc3339(),
            mode: s.synthesis.mode,
            admissibility_surrogate: assumptions.admissibility,
            open_loop_abscissa,
            entries,
            aggregate_pass,
        },
        trajectories,
    ))
}

fn sim_config(s: &Scenario, sys: &ModalSystem, alpha: f64) -> Result<SimConfig> {
    let y0 = match &s.simulation.y0 {
        Some(v) => DVector::from_vec(v.clone()),
        None => DVector::from_element(sys.n_modes(), 1.0),
    };
    let history = s.simulation.history.to_history(sys.n_modes())?;
    SimConfig::new(
        sys,
        s.simulation.dt.unwrap_or(sys.tau / 200.0),
        s.simulation
            .horizon
            .unwrap_or((10.0 / alpha).max(4.0 * sys.tau)),
        y0,
        history,
    )
}

fn make_request(s: &Scenario, alpha: f64) -> Result<SynthesisRequest> {
    let req = SynthesisRequest::with_margin(alpha, s.synthesis.margin)?;
    match s.synthesis.gamma {
        Some(g) => req.with_gamma(g),
        None => Ok(req),
    }
}

fn run_instantaneous(
    s: &Scenario,
    sys: &ModalSystem,
    alpha: f64,
    trajectories: &mut Vec<(f64, Trajectory)>,
) -> RunEntry {
    let fail = |e: Error| RunEntry {
        alpha,
        law: None,
        alpha_hat: None,
        c_hat: None,
        control_zero_before_switch: None,
        error: Some(e.to_string()),
        pass: false,
    };
    let req = match make_request(s, alpha) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let law = match synthesize(sys, &req) {
        Ok(l) => l,
        Err(e) => return fail(e),
    };
    let cfg = match sim_config(s, sys, alpha) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let traj = match simulate_closed_loop(sys, &law, &cfg) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let fit = match estimate_decay_rate(&traj, 2.0 * sys.tau) {
        Ok(f) => f,
        Err(e) => return fail(e),
    };
    let denom = (cfg.y0.norm_squared() + cfg.history_l2_sq(sys.tau)).sqrt();
    let c_hat = fit.log_intercept.exp() / denom;
    let pass = fit.rate >= 0.95 * alpha;
    let mut t = traj;
    t.fitted_rate = Some(fit.rate);
    trajectories.push((alpha, t));
    RunEntry {
        alpha,
        law: Some(law),
        alpha_hat: Some(fit.rate),
        c_hat: Some(c_hat),
        control_zero_before_switch: None,
        error: None,
        pass,
    }
}

fn run_two_phase(
    s: &Scenario,
    sys: &ModalSystem,
    gamma: f64,
    trajectories: &mut Vec<(f64, Trajectory)>,
) -> RunEntry {
    let fail = |e: Error| RunEntry {
        alpha: gamma,
        law: None,
        alpha_hat: None,
        c_hat: None,
        control_zero_before_switch: None,
        error: Some(e.to_string()),
        pass: false,
    };
    let cover = || -> Result<(IntervalSet, IntervalSet)> {
        let missing = |what: &str| Error::InvalidModel(format!("scenario lacks {what}"));
        Ok((
            IntervalSet::new(s.system.omega1.clone().ok_or_else(|| missing("system.omega1"))?)?,
            IntervalSet::new(s.system.omega2.clone().ok_or_else(|| missing("system.omega2"))?)?,
        ))
    };
    let (w1, w2) = match cover() {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let law = match synthesize_localized(sys, &w1, &w2, gamma, s.synthesis.margin) {
        Ok(l) => l,
        Err(e) => return fail(e),
    };
    let cfg = match sim_config(s, sys, gamma) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let traj = match simulate_two_phase(sys, &law, &cfg) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    // Decay is measured past the free phase.
    let fit = match estimate_decay_rate(&traj, law.switch_time + 2.0 * sys.tau) {
        Ok(f) => f,
        Err(e) => return fail(e),
    };
    let zero_before = traj
        .times
        .iter()
        .zip(&traj.control_norms)
        .filter(|(t, _)| **t <= law.switch_time)
        .all(|(_, u)| *u == 0.0);
    let denom = (cfg.y0.norm_squared() + cfg.history_l2_sq(sys.tau)).sqrt();
    let c_hat = fit.log_intercept.exp() / denom;
    let pass = fit.rate >= 0.95 * gamma && zero_before;
    let mut t = traj;
    t.fitted_rate = Some(fit.rate);
    trajectories.push((gamma, t));
    RunEntry {
        alpha: gamma,
        law: Some(law.inner),
        alpha_hat: Some(fit.rate),
        c_hat: Some(c_hat),
        control_zero_before_switch: Some(zero_before),
        error: None,
        pass,
    }
}

/// Format a float with 17 significant digits, round-trip exact for f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write the trajectory CSV, report JSON, and human-readable summary.
/// Returns the paths written.
pub fn export(
    record: &RunRecord,
    trajectories: &[(f64, Trajectory)],
    spec: &OutputSpec,
    dir_override: Option<&Path>,
) -> Result<Vec<PathBuf>> {
    let dir = dir_override
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| PathBuf::from(&spec.directory));
    std::fs::create_dir_all(&dir)?;
    let mut written = Vec::new();
    if spec.formats.contains(&OutputFormat::Csv) {
        for (alpha, traj) in trajectories {
            let mut csv = String::from("t,state_norm,control_norm\n");
            for i in 0..traj.times.len() {
                let _ = writeln!(
                    csv,
                    "{},{},{}",
                    fmt_f64(traj.times[i]),
                    fmt_f64(traj.state_norms[i]),
                    fmt_f64(traj.control_norms[i])
                );
            }
            let path = dir.join(format!("trajectory_alpha_{alpha}.csv"));
            std::fs::write(&path, csv)?;
            written.push(path);
        }
    }
    if spec.formats.contains(&OutputFormat::Json) {
        let path = dir.join("report.json");
        std::fs::write(&path, serde_json::to_string_pretty(record).unwrap())?;
        written.push(path);
    }
    if spec.formats.contains(&OutputFormat::Summary) {
        let path = dir.join("summary.txt");
        std::fs::write(&path, summarize(record))?;
        written.push(path);
    }
    Ok(written)
}

/// Human-readable run summary.
pub fn summarize(record: &RunRecord) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "delaystab {} run {}", record.tool_version, record.scenario_hash);
    if let Some(a) = record.open_loop_abscissa {
        let _ = writeln!(out, "open-loop spectral abscissa: {a:.6}");
    }
    let _ = writeln!(
        out,
        "admissibility surrogate: {:.6}",
        record.admissibility_surrogate
    );
    for e in &record.entries {
        match (&e.error, e.alpha_hat) {
            (Some(err), _) => {
                let _ = writeln!(out, "alpha {:>7.3}: FAIL ({err})", e.alpha);
            }
            (None, Some(hat)) => {
                let verdict = if e.pass { "pass" } else { "FAIL" };
                let modes = e
                    .law
                    .as_ref()
                    .map(|l| l.mode_indices.len())
                    .unwrap_or(0);
                let _ = writeln!(
                    out,
                    "alpha {:>7.3}: {verdict}  fitted {:.4}  C_hat {:.4}  placed modes {}",
                    e.alpha,
                    hat,
                    e.c_hat.unwrap_or(f64::NAN),
                    modes
                );
            }
            _ => {
                let _ = writeln!(out, "alpha {:>7.3}: FAIL (no data)", e.alpha);
            }
        }
    }
    let _ = writeln!(
        out,
        "aggregate: {}",
        if record.aggregate_pass { "PASS" } else { "FAIL" }
    );
    out
}
