//! Command line interface of the `delaystab` tool.
//!
//! Subcommands: `roots`, `spectrum`, `synthesize`, `simulate`, `verify`,
//! `report`. The output directory from the scenario file can be overridden
//! with the `DELAYSTAB_OUT_DIR` environment variable.

use crate::error::{Error, Result};
use crate::lift::{build_lifted_generator, lifted_spectrum, NodeScheme};
use crate::roots::{rightmost_roots, solve_preimage, CharRoot, PreimageQuery};
use crate::scenario::{build_system, export, fmt_f64, parse_scenario, run_scenario, summarize};
use crate::simulate::{estimate_decay_rate, simulate_closed_loop, simulate_open_loop, SimConfig};
use crate::synthesis::{synthesize, FeedbackLaw, SynthesisRequest};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "delaystab",
    version,
    about = "Instantaneous feedback synthesis and verification for delayed parabolic systems"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certified solutions of z - kappa e^{-z tau} = eta across branches.
    Roots(RootsArgs),
    /// Lifted-generator spectrum against the characteristic roots.
    Spectrum(SpectrumArgs),
    /// Synthesize the instantaneous gain for one rate.
    Synthesize(SynthesizeArgs),
    /// Simulate a scenario system, optionally under a saved law.
    Simulate(SimulateArgs),
    /// Run the full scenario pipeline; exit code 0 iff every rate passes.
    Verify(VerifyArgs),
    /// Render a human-readable summary of a saved report.
    Report(ReportArgs),
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct RootsArgs {
    /// Real part of eta (for characteristic roots of a mode, pass mu).
    #[arg(long, default_value_t = 0.0)]
    eta_re: f64,
    #[arg(long, default_value_t = 0.0)]
    eta_im: f64,
    #[arg(long)]
    kappa: f64,
    #[arg(long)]
    tau: f64,
    /// How many of the rightmost solutions to report.
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = crate::roots::DEFAULT_TOL)]
    tol: f64,
}

#[derive(Args)]
struct SpectrumArgs {
    /// Scenario file providing the system block.
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value_t = 32)]
    m_nodes: usize,
    /// Collocation scheme: chebyshev or uniform.
    #[arg(long, default_value = "chebyshev")]
    scheme: String,
    #[arg(long, default_value_t = 5)]
    count: usize,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SynthesizeArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    margin: f64,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SimulateArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    horizon: Option<f64>,
    /// Path to a law JSON produced by `synthesize`; open loop when omitted.
    #[arg(long)]
    law: Option<PathBuf>,
    /// Where to write the trajectory CSV.
    #[arg(long, default_value = "trajectory.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    scenario: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Path to a report.json written by `verify`.
    #[arg(long)]
    record: PathBuf,
}

#[derive(Serialize)]
struct RootOut {
    re: f64,
    im: f64,
    residual: f64,
    branch: i64,
}

fn roots_cmd(a: &RootsArgs) -> Result<i32> {
    let out: Vec<RootOut> = if a.count <= 1 {
        let q = PreimageQuery::new(Complex64::new(a.eta_re, a.eta_im), a.kappa, a.tau, a.tol)?;
        let z = solve_preimage(&q)?;
        let residual = (z - Complex64::new(a.kappa, 0.0) * (-z * a.tau).exp() - q.eta).norm();
        vec![RootOut {
            re: z.re,
            im: z.im,
            residual,
            branch: 0,
        }]
    } else {
        if a.eta_im != 0.0 {
            return Err(Error::InvalidConfig(
                "branch enumeration reports roots of the real-eta characteristic \
                 equation; use --count 1 for complex eta"
                    .into(),
            ));
        }
        let scan = rightmost_roots(a.eta_re, a.kappa, a.tau, a.count, a.tol)?;
        scan.roots
            .iter()
            .map(|r: &CharRoot| RootOut {
                re: r.re,
                im: r.im,
                residual: r.residual,
                branch: r.branch,
            })
            .collect()
    };
    println!("{}", serde_json::to_string_pretty(&out).unwrap());
    Ok(0)
}

#[derive(Serialize)]
struct ComplexOut {
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct SpectrumOut {
    lifted: Vec<ComplexOut>,
    characteristic: Vec<RootOut>,
    max_abs_error: f64,
}

fn spectrum_cmd(a: &SpectrumArgs) -> Result<i32> {
    let scenario = parse_scenario(&a.scenario)?;
    let sys = build_system(&scenario)?;
    let scheme = match a.scheme.as_str() {
        "chebyshev" => NodeScheme::Chebyshev,
        "uniform" => NodeScheme::Uniform,
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown scheme '{other}' (chebyshev | uniform)"
            )))
        }
    };
    let gen = build_lifted_generator(&sys, a.m_nodes, scheme)?;
    let lifted = lifted_spectrum(&gen, a.count.min(gen.dim()))?;
    if sys.delay_coupling.is_some() {
        return Err(Error::InvalidConfig(
            "characteristic cross-check is defined for scalar delay coupling only".into(),
        ));
    }
    // Characteristic roots pooled over modes, rightmost first.
    let mut chars: Vec<CharRoot> = Vec::new();
    for &mu in &sys.eigenvalues {
        let scan = rightmost_roots(mu, sys.kappa, sys.tau, a.count, 1e-10 * (1.0 + mu.abs()))?;
        chars.extend(scan.roots);
    }
    chars.sort_by(|x, y| y.re.partial_cmp(&x.re).unwrap());
    chars.truncate(a.count);
    let max_abs_error = lifted
        .iter()
        .take(chars.len())
        .map(|z| {
            chars
                .iter()
                .map(|r| (z - r.value()).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    let out = SpectrumOut {
        lifted: lifted
            .iter()
            .map(|z| ComplexOut { re: z.re, im: z.im })
            .collect(),
        characteristic: chars
            .iter()
            .map(|r| RootOut {
                re: r.re,
                im: r.im,
                residual: r.residual,
                branch: r.branch,
            })
            .collect(),
        max_abs_error,
    };
    println!("{}", serde_json::to_string_pretty(&out).unwrap());
    Ok(0)
}

fn synthesize_cmd(a: &SynthesizeArgs) -> Result<i32> {
    let scenario = parse_scenario(&a.scenario)?;
    let sys = build_system(&scenario)?;
    let req = SynthesisRequest::with_margin(a.alpha, a.margin)?;
    let req = match a.gamma {
        Some(g) => req.with_gamma(g)?,
        None => req,
    };
    let law = synthesize(&sys, &req)?;
    println!("{}", serde_json::to_string_pretty(&law).unwrap());
    Ok(0)
}

#[derive(Serialize)]
struct SimulateOut {
    alpha: f64,
    alpha_hat: f64,
    c_hat: f64,
    pass: bool,
}

fn simulate_cmd(a: &SimulateArgs) -> Result<i32> {
    let scenario = parse_scenario(&a.scenario)?;
    let sys = build_system(&scenario)?;
    let law: Option<FeedbackLaw> = match &a.law {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            Some(serde_json::from_str(&text).map_err(|e| Error::ScenarioParse(e.to_string()))?)
        }
        None => None,
    };
    let alpha = law
        .as_ref()
        .map(|l| l.meta.alpha)
        .unwrap_or_else(|| scenario.synthesis.alphas[0]);
    let y0 = match &scenario.simulation.y0 {
        Some(v) => nalgebra::DVector::from_vec(v.clone()),
        None => nalgebra::DVector::from_element(sys.n_modes(), 1.0),
    };
    let history = scenario.simulation.history.to_history(sys.n_modes())?;
    let cfg = SimConfig::new(
        &sys,
        a.dt.or(scenario.simulation.dt).unwrap_or(sys.tau / 200.0),
        a.horizon
            .or(scenario.simulation.horizon)
            .unwrap_or((10.0 / alpha).max(4.0 * sys.tau)),
        y0,
        history,
    )?;
    let traj = match &law {
        Some(l) => simulate_closed_loop(&sys, l, &cfg)?,
        None => simulate_open_loop(&sys, &cfg, None)?,
    };
    let fit = estimate_decay_rate(&traj, 2.0 * sys.tau)?;
    let denom = (cfg.y0.norm_squared() + cfg.history_l2_sq(sys.tau)).sqrt();
    let mut csv = String::from("t,state_norm,control_norm\n");
    for i in 0..traj.times.len() {
        csv.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(traj.times[i]),
            fmt_f64(traj.state_norms[i]),
            fmt_f64(traj.control_norms[i])
        ));
    }
    std::fs::write(&a.out, csv)?;
    let out = SimulateOut {
        alpha,
        alpha_hat: fit.rate,
        c_hat: fit.log_intercept.exp() / denom,
        pass: fit.rate >= 0.95 * alpha,
    };
    println!("{}", serde_json::to_string_pretty(&out).unwrap());
    Ok(if out.pass { 0 } else { 1 })
}

fn verify_cmd(a: &VerifyArgs) -> Result<i32> {
    let scenario = parse_scenario(&a.scenario)?;
    let (record, trajectories) = run_scenario(&scenario)?;
    let dir_override = std::env::var_os("DELAYSTAB_OUT_DIR").map(PathBuf::from);
    export(
        &record,
        &trajectories,
        &scenario.output,
        dir_override.as_deref(),
    )?;
    print!("{}", summarize(&record));
    Ok(if record.aggregate_pass { 0 } else { 1 })
}

fn report_cmd(a: &ReportArgs) -> Result<i32> {
    let text = std::fs::read_to_string(&a.record)?;
    let record: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::ScenarioParse(e.to_string()))?;
    // Round-trip through the typed record when possible for a clean render.
    match serde_json::from_value::<RunRecordView>(record.clone()) {
        Ok(view) => print!("{}", view.render()),
        Err(_) => println!("{}", serde_json::to_string_pretty(&record).unwrap()),
    }
    Ok(0)
}

/// Minimal deserializable view of [`RunRecord`] for re-rendering.
#[derive(serde::Deserialize)]
struct RunRecordView {
    scenario_hash: String,
    tool_version: String,
    aggregate_pass: bool,
    entries: Vec<EntryView>,
}

#[derive(serde::Deserialize)]
struct EntryView {
    alpha: f64,
    alpha_hat: Option<f64>,
    error: Option<String>,
    pass: bool,
}

impl RunRecordView {
    fn render(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(out, "delaystab {} run {}", self.tool_version, self.scenario_hash);
        for e in &self.entries {
            match (&e.error, e.alpha_hat) {
                (Some(err), _) => {
                    let _ = writeln!(out, "alpha {:>7.3}: FAIL ({err})", e.alpha);
                }
                (None, Some(hat)) => {
                    let _ = writeln!(
                        out,
                        "alpha {:>7.3}: {}  fitted {:.4}",
                        e.alpha,
                        if e.pass { "pass" } else { "FAIL" },
                        hat
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
            if self.aggregate_pass { "PASS" } else { "FAIL" }
        );
        out
    }
}

/// Parse the process arguments and dispatch; the returned code is the
/// process exit status.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Roots(a) => roots_cmd(a),
        Command::Spectrum(a) => spectrum_cmd(a),
        Command::Synthesize(a) => synthesize_cmd(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Report(a) => report_cmd(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
