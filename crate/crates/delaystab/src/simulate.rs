//! Method-of-steps time integration for delayed modal systems.
//!
//! The diagonal part is propagated by its exact exponential over each step;
//! delay and control sources are folded in with exponential-trapezoidal
//! weights, which keeps the scheme unconditionally stable on the stiff modal
//! range and second-order accurate in the step size. The step is chosen so
//! that `tau / dt` is an integer: the delayed lookup always lands on a grid
//! point and the history ring buffer needs no interpolation.

use crate::error::{Error, Result};
use crate::modal::ModalSystem;
use crate::synthesis::{synthesize, FeedbackLaw, SynthesisRequest, TwoPhaseLaw};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Initial history on `[-tau, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub enum HistoryFn {
    /// Every mode equal to the constant.
    Constant(f64),
    /// Piecewise-linear data: `thetas` strictly increasing in [-tau, 0],
    /// one column of `values` per abscissa.
    Samples {
        thetas: Vec<f64>,
        values: DMatrix<f64>,
    },
    /// `phi(theta) = e^{lambda theta} y0`.
    ExpLambda(f64),
}

impl HistoryFn {
    fn validate(&self, n_modes: usize) -> Result<()> {
        match self {
            HistoryFn::Constant(c) => {
                if !c.is_finite() {
                    return Err(Error::InvalidConfig("history constant not finite".into()));
                }
            }
            HistoryFn::Samples { thetas, values } => {
                if thetas.len() != values.ncols() {
                    return Err(Error::InvalidConfig(format!(
                        "history sample count mismatch: {} abscissas, {} columns",
                        thetas.len(),
                        values.ncols()
                    )));
                }
                if values.nrows() != n_modes {
                    return Err(Error::InvalidConfig(
                        "history rows differ from the modal dimension".into(),
                    ));
                }
                if thetas.len() < 2 || thetas.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidConfig(
                        "history abscissas must be strictly increasing".into(),
                    ));
                }
                if values.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidConfig("history values not finite".into()));
                }
            }
            HistoryFn::ExpLambda(l) => {
                if !l.is_finite() {
                    return Err(Error::InvalidConfig("history exponent not finite".into()));
                }
            }
        }
        Ok(())
    }

    /// Evaluate the history at `theta <= 0`.
    pub fn sample(&self, theta: f64, y0: &DVector<f64>) -> DVector<f64> {
        match self {
            HistoryFn::Constant(c) => DVector::from_element(y0.len(), *c),
            HistoryFn::Samples { thetas, values } => {
                let pos = thetas
                    .partition_point(|&t| t < theta)
                    .min(thetas.len() - 1)
                    .max(1);
                let (t0, t1) = (thetas[pos - 1], thetas[pos]);
                let s = ((theta - t0) / (t1 - t0)).clamp(0.0, 1.0);
                DVector::from_fn(values.nrows(), |k, _| {
                    values[(k, pos - 1)] * (1.0 - s) + values[(k, pos)] * s
                })
            }
            HistoryFn::ExpLambda(l) => y0 * (l * theta).exp(),
        }
    }
}

/// Simulation grid and data. `dt` is adjusted on construction so that
/// `tau / dt` is an integer.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub horizon: f64,
    pub y0: DVector<f64>,
    pub history: HistoryFn,
    /// Steps per delay interval, `dt * delay_steps == tau`.
    pub delay_steps: usize,
}

impl SimConfig {
    pub fn new(
        sys: &ModalSystem,
        dt: f64,
        horizon: f64,
        y0: DVector<f64>,
        history: HistoryFn,
    ) -> Result<Self> {
        if dt <= 0.0 || !dt.is_finite() {
            return Err(Error::InvalidConfig("dt must be positive".into()));
        }
        if horizon < 2.0 * sys.tau {
            return Err(Error::InvalidConfig(
                "horizon must be at least 2 tau for decay fitting".into(),
            ));
        }
        if y0.len() != sys.n_modes() {
            return Err(Error::InvalidConfig(
                "initial state length differs from the modal dimension".into(),
            ));
        }
        if y0.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig("initial state not finite".into()));
        }
        history.validate(sys.n_modes())?;
        let delay_steps = (sys.tau / dt).round().max(1.0) as usize;
        let dt = sys.tau / delay_steps as f64;
        Ok(Self {
            dt,
            horizon,
            y0,
            history,
            delay_steps,
        })
    }

    /// Config with the default step `tau / 200` and horizon
    /// `max(10 / alpha, 4 tau)`.
    pub fn defaults(sys: &ModalSystem, alpha: f64, y0: DVector<f64>, history: HistoryFn) -> Result<Self> {
        let horizon = (10.0 / alpha).max(4.0 * sys.tau);
        Self::new(sys, sys.tau / 200.0, horizon, y0, history)
    }

    /// Trapezoid estimate of the squared L^2 norm of the history.
    pub fn history_l2_sq(&self, tau: f64) -> f64 {
        let m = self.delay_steps;
        let h = self.dt;
        let mut acc = 0.0;
        for i in 0..=m {
            let theta = -tau + i as f64 * h;
            let v = self.history.sample(theta, &self.y0);
            let w = if i == 0 || i == m { 0.5 } else { 1.0 };
            acc += w * h * v.norm_squared();
        }
        acc
    }
}

/// Time series produced by the integrators.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub state_norms: Vec<f64>,
    pub control_norms: Vec<f64>,
    #[serde(skip)]
    pub heads: Vec<DVector<f64>>,
    pub fitted_rate: Option<f64>,
}

/// phi1(z) = (e^z - 1)/z and phi2(z) = (e^z - 1 - z)/z^2 with the small-z
/// series cutover.
fn phi_weights(z: f64) -> (f64, f64) {
    if z.abs() < 1e-4 {
        let phi1 = 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0;
        let phi2 = 0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0;
        (phi1, phi2)
    } else {
        let e = z.exp();
        ((e - 1.0) / z, (e - 1.0 - z) / (z * z))
    }
}

struct Stepper {
    /// exp(mu_k dt)
    exp_diag: DVector<f64>,
    /// weight of the left source endpoint, h (phi1 - phi2)
    w0: DVector<f64>,
    /// weight of the right source endpoint, h phi2
    w1: DVector<f64>,
    delay: DMatrix<f64>,
}

impl Stepper {
    fn new(sys: &ModalSystem, dt: f64) -> Self {
        let n = sys.n_modes();
        let mut exp_diag = DVector::zeros(n);
        let mut w0 = DVector::zeros(n);
        let mut w1 = DVector::zeros(n);
        for k in 0..n {
            let z = sys.eigenvalues[k] * dt;
            let (p1, p2) = phi_weights(z);
            exp_diag[k] = z.exp();
            w0[k] = dt * (p1 - p2);
            w1[k] = dt * p2;
        }
        Stepper {
            exp_diag,
            w0,
            w1,
            delay: sys.delay_matrix(),
        }
    }

    /// Explicit step: both source endpoints known.
    fn step_explicit(&self, y: &DVector<f64>, f_left: &DVector<f64>, f_right: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(y.len(), |k, _| {
            self.exp_diag[k] * y[k] + self.w0[k] * f_left[k] + self.w1[k] * f_right[k]
        })
    }
}

/// Factored implicit operator `I - W1 K_cl` for instantaneous feedback.
struct ImplicitSolve {
    lu: nalgebra::linalg::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl ImplicitSolve {
    fn new(stepper: &Stepper, k_cl: &DMatrix<f64>) -> Result<Self> {
        let n = k_cl.nrows();
        let mut m = -k_cl.clone();
        for r in 0..n {
            for c in 0..n {
                m[(r, c)] *= stepper.w1[r];
            }
        }
        for d in 0..n {
            m[(d, d)] += 1.0;
        }
        let lu = m.lu();
        Ok(Self { lu })
    }

    fn solve(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        self.lu.solve(rhs).ok_or_else(|| Error::InvalidConfig(
            "implicit feedback step is singular; the gain is incompatible with the step size"
                .into(),
        ))
    }
}

fn check_finite(y: &DVector<f64>, t: f64) -> Result<()> {
    if y.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteState { time: t });
    }
    Ok(())
}

enum Loop<'a> {
    Open(Option<&'a dyn Fn(f64) -> DVector<f64>>),
    Closed(&'a FeedbackLaw),
    TwoPhase(&'a TwoPhaseLaw),
}

/// Shared method-of-steps kernel. The ring buffer holds the last
/// `delay_steps + 1` states so the delayed lookup is an exact index.
fn run(sys: &ModalSystem, cfg: &SimConfig, mode: Loop) -> Result<Trajectory> {
    let n = sys.n_modes();
    let channels = sys.control_channels();
    let stepper = Stepper::new(sys, cfg.dt);
    let l = cfg.delay_steps;
    let steps = (cfg.horizon / cfg.dt).round() as usize;
    let mut ring: Vec<DVector<f64>> = Vec::with_capacity(l + 1);
    for i in 0..l {
        let theta = (i as f64 - l as f64) * cfg.dt;
        ring.push(cfg.history.sample(theta, &cfg.y0));
    }
    ring.push(cfg.y0.clone());
    // ring slot for step index m (m = -l .. 0 at start): slot (m + l) % (l + 1)
    let slot = |m: i64| -> usize { ((m + l as i64) % (l as i64 + 1)) as usize };

    // Instantaneous feedback needs the implicit factorization once.
    let (k_cl, implicit): (Option<DMatrix<f64>>, Option<ImplicitSolve>) = match &mode {
        Loop::Closed(law) if !law.is_zero() => {
            let k = law.state_feedback_matrix(sys);
            let f = ImplicitSolve::new(&stepper, &k)?;
            (Some(k), Some(f))
        }
        Loop::TwoPhase(law) if !law.inner.is_zero() => {
            let k = law.inner.state_feedback_matrix(sys);
            let f = ImplicitSolve::new(&stepper, &k)?;
            (Some(k), Some(f))
        }
        _ => (None, None),
    };

    let mut times = Vec::with_capacity(steps + 1);
    let mut state_norms = Vec::with_capacity(steps + 1);
    let mut control_norms = Vec::with_capacity(steps + 1);
    let mut heads = Vec::with_capacity(steps + 1);

    let control_at = |t: f64, y: &DVector<f64>, y_delayed: &DVector<f64>| -> DVector<f64> {
        match &mode {
            Loop::Open(None) => DVector::zeros(channels),
            Loop::Open(Some(u)) => u(t),
            Loop::Closed(law) => law.apply(y),
            Loop::TwoPhase(law) => law.control(t, y, y_delayed),
        }
    };

    let mut y = cfg.y0.clone();
    for step in 0..=steps {
        let t = step as f64 * cfg.dt;
        let y_delayed = ring[slot(step as i64 - l as i64)].clone();
        let u = control_at(t, &y, &y_delayed);
        times.push(t);
        state_norms.push(y.norm());
        control_norms.push(u.norm());
        heads.push(y.clone());
        if step == steps {
            break;
        }

        // Source at the left endpoint. For the two-phase law the integration
        // over (tau, tau + dt) uses the right-limit control, while the
        // logged value at exactly tau stays zero.
        let u_src = match &mode {
            Loop::TwoPhase(law) if t >= law.switch_time => {
                law.inner.apply(&y) + &y_delayed * law.delay_cancel_coeff
            }
            _ => u.clone(),
        };
        let f_left = &stepper.delay * &y_delayed + &sys.control_matrix * &u_src;

        let t_next = (step + 1) as f64 * cfg.dt;
        let y_delayed_next = ring[slot(step as i64 + 1 - l as i64)].clone();
        let next = match &mode {
            Loop::Open(opt_u) => {
                let u_next = match opt_u {
                    Some(u) => u(t_next),
                    None => DVector::zeros(channels),
                };
                let f_right = &stepper.delay * &y_delayed_next + &sys.control_matrix * &u_next;
                stepper.step_explicit(&y, &f_left, &f_right)
            }
            Loop::Closed(law) => {
                if let (Some(_k), Some(solver)) = (&k_cl, &implicit) {
                    let f_right_known = &stepper.delay * &y_delayed_next;
                    let mut rhs = DVector::zeros(n);
                    for k in 0..n {
                        rhs[k] = stepper.exp_diag[k] * y[k]
                            + stepper.w0[k] * f_left[k]
                            + stepper.w1[k] * f_right_known[k];
                    }
                    solver.solve(&rhs)?
                } else {
                    // Zero gain: identical arithmetic to the open loop.
                    let f_right = &stepper.delay * &y_delayed_next
                        + &sys.control_matrix * &law.apply(&y);
                    let _ = law;
                    stepper.step_explicit(&y, &f_left, &f_right)
                }
            }
            Loop::TwoPhase(law) => {
                if t_next <= law.switch_time {
                    // Free phase: same code path as the open loop.
                    let f_right = &stepper.delay * &y_delayed_next;
                    stepper.step_explicit(&y, &f_left, &f_right)
                } else {
                    let cancel = &y_delayed_next * law.delay_cancel_coeff;
                    let f_right_known = &stepper.delay * &y_delayed_next
                        + &sys.control_matrix * &cancel;
                    let mut rhs = DVector::zeros(n);
                    for k in 0..n {
                        rhs[k] = stepper.exp_diag[k] * y[k]
                            + stepper.w0[k] * f_left[k]
                            + stepper.w1[k] * f_right_known[k];
                    }
                    match &implicit {
                        Some(solver) => solver.solve(&rhs)?,
                        None => rhs,
                    }
                }
            }
        };
        check_finite(&next, t_next)?;
        let next_slot = slot(step as i64 + 1);
        ring[next_slot] = next.clone();
        y = next;
    }

    Ok(Trajectory {
        times,
        state_norms,
        control_norms,
        heads,
        fitted_rate: None,
    })
}

/// Integrate the uncontrolled or externally forced system.
pub fn simulate_open_loop(
    sys: &ModalSystem,
    cfg: &SimConfig,
    control: Option<&dyn Fn(f64) -> DVector<f64>>,
) -> Result<Trajectory> {
    run(sys, cfg, Loop::Open(control))
}

/// Integrate the closed loop `y' = A y + D y(t - tau) + B G P y`.
pub fn simulate_closed_loop(
    sys: &ModalSystem,
    law: &FeedbackLaw,
    cfg: &SimConfig,
) -> Result<Trajectory> {
    if law.gain.nrows() != sys.control_channels() {
        return Err(Error::InvalidConfig(
            "law output dimension differs from the control channels".into(),
        ));
    }
    if law.mode_indices.iter().any(|&k| k >= sys.n_modes()) {
        return Err(Error::InvalidConfig(
            "law references modes beyond the system truncation".into(),
        ));
    }
    run(sys, cfg, Loop::Closed(law))
}

/// Integrate the two-phase localized loop: free on `[0, tau]`, then the
/// inner gain plus the delayed cancellation term.
pub fn simulate_two_phase(
    sys: &ModalSystem,
    law: &TwoPhaseLaw,
    cfg: &SimConfig,
) -> Result<Trajectory> {
    if sys.delay_coupling.is_none() {
        return Err(Error::InvalidConfig(
            "two-phase simulation expects the localized delay coupling".into(),
        ));
    }
    run(sys, cfg, Loop::TwoPhase(law))
}

/// Least-squares decay fit.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DecayFit {
    /// Slope of `-log ||y||`; `f64::INFINITY` when the tail is identically
    /// zero.
    pub rate: f64,
    /// Intercept of `log ||y||` at t = 0, for the empirical constant.
    pub log_intercept: f64,
}

/// Fit the exponential rate of a norm sequence over `[skip, horizon]`.
/// Default skip is `2 tau` to clear the history transient.
pub fn estimate_decay_rate(traj: &Trajectory, skip: f64) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = traj
        .times
        .iter()
        .zip(&traj.state_norms)
        .filter(|(t, _)| **t >= skip)
        .map(|(t, n)| (*t, *n))
        .collect();
    if pts.len() < 10 {
        return Err(Error::InvalidConfig(
            "fewer than 10 samples beyond the fit skip".into(),
        ));
    }
    if pts.iter().any(|(_, n)| *n == 0.0) {
        return Ok(DecayFit {
            rate: f64::INFINITY,
            log_intercept: f64::NEG_INFINITY,
        });
    }
    let n = pts.len() as f64;
    let mean_t = pts.iter().map(|(t, _)| t).sum::<f64>() / n;
    let mean_l = pts.iter().map(|(_, v)| v.ln()).sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (t, v) in &pts {
        cov += (t - mean_t) * (v.ln() - mean_l);
        var += (t - mean_t) * (t - mean_t);
    }
    let slope = cov / var;
    Ok(DecayFit {
        rate: -slope,
        log_intercept: mean_l - slope * mean_t,
    })
}

/// Picard fixed-point solution on `[0, T]`, `T <= tau`.
#[derive(Debug, Clone)]
pub struct PicardSolution {
    pub times: Vec<f64>,
    pub heads: Vec<DVector<f64>>,
    pub iterations: usize,
    /// The step length actually certified by the contraction bound.
    pub certified_t: f64,
    /// The contraction factor at that length.
    pub contraction: f64,
}

/// Fixed-point iteration of the integral map on `[0, T]`: the delayed term
/// is known history data there, so the map only recurses through the
/// feedback. `T` is shrunk (halving, grid-aligned) until the discrete
/// contraction estimate `sqrt((1 + tau) T C) ||F|| < 1` holds.
pub fn picard_solve_step(
    sys: &ModalSystem,
    law: &FeedbackLaw,
    cfg: &SimConfig,
    t_max: f64,
    tol: f64,
) -> Result<PicardSolution> {
    let mu_top = sys.eigenvalues[0].max(0.0);
    // Discrete admissibility surrogate: ||int e^{A(t-s)} B u||^2 <= C ||u||^2
    // with C = ||B||^2 int_0^tau e^{2 mu_top s} ds.
    let b_norm = sys.control_matrix.clone().svd(false, false).singular_values[0];
    let growth_int = if mu_top == 0.0 {
        sys.tau
    } else {
        ((2.0 * mu_top * sys.tau).exp() - 1.0) / (2.0 * mu_top)
    };
    let c_tau = b_norm * b_norm * growth_int;
    // ||F|| as an operator from the state to the control.
    let f_norm = if law.is_zero() {
        0.0
    } else {
        law.gain.clone().svd(false, false).singular_values[0]
    };
    let factor = |t: f64| ((1.0 + sys.tau) * t * c_tau).sqrt() * f_norm;

    let mut steps = ((t_max.min(sys.tau) / cfg.dt).floor() as usize).max(1);
    while factor(steps as f64 * cfg.dt) >= 0.999 && steps > 1 {
        steps /= 2;
    }
    let t_len = steps as f64 * cfg.dt;
    let contraction = factor(t_len);
    if contraction >= 1.0 {
        return Err(Error::ContractionFailed {
            factor: contraction,
        });
    }

    let stepper = Stepper::new(sys, cfg.dt);
    let l = cfg.delay_steps as i64;
    // Delayed data is pure history on [0, T] (plus y0 at exactly tau).
    let delayed_at = |m: i64| -> DVector<f64> {
        if m - l < 0 {
            cfg.history.sample((m - l) as f64 * cfg.dt, &cfg.y0)
        } else {
            cfg.y0.clone()
        }
    };
    let delayed: Vec<DVector<f64>> = (0..=steps as i64).map(delayed_at).collect();

    // One sweep of the integral map for a given iterate.
    let apply_g = |iterate: &[DVector<f64>]| -> Vec<DVector<f64>> {
        let mut out = Vec::with_capacity(steps + 1);
        out.push(cfg.y0.clone());
        let mut y = cfg.y0.clone();
        for m in 0..steps {
            let u_l = law.apply(&iterate[m]);
            let u_r = law.apply(&iterate[m + 1]);
            let f_l = &stepper.delay * &delayed[m] + &sys.control_matrix * &u_l;
            let f_r = &stepper.delay * &delayed[m + 1] + &sys.control_matrix * &u_r;
            y = stepper.step_explicit(&y, &f_l, &f_r);
            out.push(y.clone());
        }
        out
    };

    // Seed with the open-loop integral (the image of the trivial iterate).
    let trivial: Vec<DVector<f64>> = (0..=steps).map(|_| cfg.y0.clone()).collect();
    let mut current = apply_g(&trivial);
    let mut iterations = 0;
    loop {
        iterations += 1;
        let next = apply_g(&current);
        let diff = current
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        current = next;
        if diff <= tol {
            break;
        }
        if iterations > 10_000 {
            return Err(Error::ContractionFailed {
                factor: contraction,
            });
        }
    }
    Ok(PicardSolution {
        times: (0..=steps).map(|m| m as f64 * cfg.dt).collect(),
        heads: current,
        iterations,
        certified_t: t_len,
        contraction,
    })
}

/// Verdict for one requested rate.
#[derive(Debug, Clone, Serialize)]
pub struct AlphaVerdict {
    pub alpha: f64,
    pub synthesis_error: Option<String>,
    pub alpha_hat: Option<f64>,
    /// Empirical constant of the decay envelope.
    pub c_hat: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RapidReport {
    pub entries: Vec<AlphaVerdict>,
    pub aggregate_pass: bool,
}

/// For each rate: synthesize, simulate the closed loop, fit the decay, and
/// pass when `alpha_hat >= 0.95 alpha`. Synthesis failures are recorded and
/// the sweep continues.
pub fn verify_rapid(
    sys: &ModalSystem,
    alphas: &[f64],
    margin: f64,
    dt: Option<f64>,
    horizon: Option<f64>,
    y0: DVector<f64>,
    history: HistoryFn,
) -> Result<RapidReport> {
    if alphas.is_empty() || alphas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(
            "alphas must be nonempty and increasing".into(),
        ));
    }
    let mut entries = Vec::new();
    for &alpha in alphas {
        let req = match SynthesisRequest::with_margin(alpha, margin) {
            Ok(r) => r,
            Err(e) => {
                entries.push(AlphaVerdict {
                    alpha,
                    synthesis_error: Some(e.to_string()),
                    alpha_hat: None,
                    c_hat: None,
                    pass: false,
                });
                continue;
            }
        };
        let law = match synthesize(sys, &req) {
            Ok(l) => l,
            Err(e) => {
                entries.push(AlphaVerdict {
                    alpha,
                    synthesis_error: Some(e.to_string()),
                    alpha_hat: None,
                    c_hat: None,
                    pass: false,
                });
                continue;
            }
        };
        let run = || -> Result<(f64, f64)> {
            let cfg = SimConfig::new(
                sys,
                dt.unwrap_or(sys.tau / 200.0),
                horizon.unwrap_or((10.0 / alpha).max(4.0 * sys.tau)),
                y0.clone(),
                history.clone(),
            )?;
            let traj = simulate_closed_loop(sys, &law, &cfg)?;
            let fit = estimate_decay_rate(&traj, 2.0 * sys.tau)?;
            let denom = (cfg.y0.norm_squared() + cfg.history_l2_sq(sys.tau)).sqrt();
            let c_hat = (fit.log_intercept.exp() / denom).max(0.0);
            Ok((fit.rate, c_hat))
        };
        match run() {
            Ok((alpha_hat, c_hat)) => entries.push(AlphaVerdict {
                alpha,
                synthesis_error: None,
                alpha_hat: Some(alpha_hat),
                c_hat: Some(c_hat),
                pass: alpha_hat >= 0.95 * alpha,
            }),
            Err(e) => entries.push(AlphaVerdict {
                alpha,
                synthesis_error: Some(e.to_string()),
                alpha_hat: None,
                c_hat: None,
                pass: false,
            }),
        }
    }
    let aggregate_pass = entries.iter().all(|e| e.pass);
    Ok(RapidReport {
        entries,
        aggregate_pass,
    })
}
