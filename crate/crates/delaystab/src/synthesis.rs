//! Feedback synthesis at a requested exponential decay rate.
//!
//! The pipeline follows the constructive route: shift the system by gamma,
//! split the spectrum at an explicit margin beta so the discarded modes
//! already decay fast enough despite the delay, check stabilizability of the
//! retained finite block, place that block by a shifted Riccati design at
//! margin zeta, and assemble an instantaneous law `u = G P y(t)` acting on
//! the current state only. The margins come from
//!
//! ```text
//! beta > 2 (alpha + |kappa| e^{(gamma + alpha) tau})
//! zeta > 2 (mu    + |kappa| e^{(gamma + mu)    tau})
//! ```
//!
//! realized with an explicit additive `margin`, and guarantee that every
//! characteristic root of the closed loop stays left of the target rate.

use crate::error::{Error, Result};
use crate::interval::IntervalSet;
use crate::lift::LiftedState;
use crate::modal::{check_assumptions, ModalSystem};
use crate::roots::{rightmost_roots, spectral_abscissa};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Requested decay rate with the shift and margin parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SynthesisRequest {
    pub alpha: f64,
    /// Shift applied before the spectral split; defaults to `alpha + margin`.
    pub gamma: f64,
    /// Additive slack realizing the strict margin inequalities.
    pub margin: f64,
}

impl SynthesisRequest {
    pub fn new(alpha: f64) -> Result<Self> {
        Self::with_margin(alpha, 1.0)
    }

    pub fn with_margin(alpha: f64, margin: f64) -> Result<Self> {
        if alpha <= 0.0 || !alpha.is_finite() {
            return Err(Error::InvalidConfig("alpha must be positive".into()));
        }
        if margin <= 0.0 || !margin.is_finite() {
            return Err(Error::InvalidConfig("margin must be positive".into()));
        }
        Ok(Self {
            alpha,
            gamma: alpha + margin,
            margin,
        })
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        if gamma < self.alpha {
            return Err(Error::InvalidConfig(
                "gamma must be at least alpha".into(),
            ));
        }
        self.gamma = gamma;
        Ok(self)
    }
}

/// `beta = 2 (alpha + |kappa| e^{(gamma + alpha) tau}) + margin`.
pub fn choose_beta(alpha: f64, gamma: f64, kappa: f64, tau: f64, margin: f64) -> Result<f64> {
    if alpha <= 0.0 || margin <= 0.0 || tau <= 0.0 {
        return Err(Error::InvalidConfig(
            "alpha, margin and tau must be positive".into(),
        ));
    }
    let grow = ((gamma + alpha) * tau).exp();
    let beta = 2.0 * (alpha + kappa.abs() * grow) + margin;
    if !beta.is_finite() {
        return Err(Error::Overflow(format!(
            "exp({}) overflows in the split margin; use a smaller shift",
            (gamma + alpha) * tau
        )));
    }
    Ok(beta)
}

/// Result of splitting the gamma-shifted spectrum at -beta.
#[derive(Debug, Clone)]
pub struct SpectralSplit {
    pub beta: f64,
    /// Indices (0-based) of the retained modes, `mu_k + gamma >= -beta`.
    pub unstable_modes: Vec<usize>,
    /// Selector matrix onto the retained modal coordinates.
    pub p_head: DMatrix<f64>,
    /// Set when no mode could be discarded: the truncation order was too
    /// small to exhibit a stable complement.
    pub truncation_warning: bool,
}

/// Partition modes by `mu_k + gamma >= -beta` (ties retained). For diagonal
/// systems this realizes the spectral projection exactly.
pub fn split_spectrum(sys: &ModalSystem, gamma: f64, beta: f64) -> SpectralSplit {
    let unstable_modes: Vec<usize> = sys
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &mu)| mu + gamma >= -beta)
        .map(|(k, _)| k)
        .collect();
    let n = sys.n_modes();
    let mut p_head = DMatrix::zeros(unstable_modes.len(), n);
    for (row, &k) in unstable_modes.iter().enumerate() {
        p_head[(row, k)] = 1.0;
    }
    let truncation_warning = unstable_modes.len() == n;
    SpectralSplit {
        beta,
        unstable_modes,
        p_head,
        truncation_warning,
    }
}

/// Witness of a failed stabilizability test.
#[derive(Debug, Clone)]
pub struct HautusWitness {
    pub eigenvalue: Complex64,
    /// Index of the dominant kernel component.
    pub mode: usize,
    pub kernel: Vec<Complex64>,
    pub sigma_min: f64,
}

#[derive(Debug, Clone)]
pub struct HautusReport {
    pub ok: bool,
    /// Smallest singular value seen over all eigenvalues.
    pub min_singular_value: f64,
    pub witness: Option<HautusWitness>,
}

/// Kernel test: for every eigenvalue `lambda` of `a`, the stacked matrix
/// `[lambda I - a*; b*]` must have full column rank (smallest singular value
/// above `tol`). Returns the violating eigenvalue and kernel vector
/// otherwise.
pub fn hautus_check(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> Result<HautusReport> {
    let n = a.nrows();
    if n == 0 {
        return Ok(HautusReport {
            ok: true,
            min_singular_value: f64::INFINITY,
            witness: None,
        });
    }
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), f64::EPSILON, 100_000)
        .ok_or(Error::EigenFailure { dim: n })?;
    let eigs = schur.complex_eigenvalues();
    let m = b.ncols();
    let a_star = a.transpose().map(|x| Complex64::new(x, 0.0));
    let b_star = b.transpose().map(|x| Complex64::new(x, 0.0));
    let mut min_sv = f64::INFINITY;
    let mut witness = None;
    for lam in eigs.iter() {
        let lam = Complex64::new(lam.re, lam.im);
        let mut stacked = DMatrix::<Complex64>::zeros(n + m, n);
        for r in 0..n {
            for c in 0..n {
                stacked[(r, c)] = -a_star[(r, c)];
            }
            stacked[(r, r)] += lam;
        }
        for r in 0..m {
            for c in 0..n {
                stacked[(n + r, c)] = b_star[(r, c)];
            }
        }
        let svd = stacked.svd(false, true);
        let (idx, &sv) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        if sv < min_sv {
            min_sv = sv;
            if sv <= tol {
                let vt = svd.v_t.as_ref().unwrap();
                let kernel: Vec<Complex64> = vt.row(idx).iter().map(|z| z.conj()).collect();
                let mode = kernel
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                witness = Some(HautusWitness {
                    eigenvalue: lam,
                    mode,
                    kernel,
                    sigma_min: sv,
                });
            }
        }
    }
    Ok(HautusReport {
        ok: witness.is_none(),
        min_singular_value: min_sv,
        witness,
    })
}

/// Kronecker product, used by the dense Lyapunov solver.
fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = DMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s != 0.0 {
                for k in 0..br {
                    for l in 0..bc {
                        out[(i * br + k, j * bc + l)] = s * b[(k, l)];
                    }
                }
            }
        }
    }
    out
}

/// Solve `a X + X a^T = q` by Kronecker vectorization. Fine for the small
/// retained blocks this module works with.
fn solve_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let big = kron(&eye, a) + kron(a, &eye);
    let rhs = DVector::from_column_slice(q.as_slice());
    let lu = big.lu();
    let x = lu
        .solve(&rhs)
        .ok_or_else(|| Error::RiccatiDiverged {
            residual: f64::INFINITY,
            iterations: 0,
        })?;
    Ok(DMatrix::from_column_slice(n, n, x.as_slice()))
}

/// Stabilizing initial gain by eigenvalue shifting: with `beta0` beyond the
/// spectral radius, `Z` solving `(a + beta0 I) Z + Z (a + beta0 I)^T = 2 b b^T`
/// is positive definite for a controllable pair and `K0 = b^T Z^{-1}`
/// stabilizes `a - b K0`.
fn bass_initial_gain(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let beta0 = a.norm() + 1.0;
    let m = a + DMatrix::<f64>::identity(n, n) * beta0;
    let z = solve_lyapunov(&m, &(b * b.transpose() * 2.0))?;
    let lu = z.clone().lu();
    let x = lu.solve(b).ok_or_else(|| Error::RiccatiDiverged {
        residual: f64::INFINITY,
        iterations: 0,
    })?;
    Ok(x.transpose())
}

/// Newton-Kleinman iteration for the continuous Riccati equation
/// `a^T P + P a - P b b^T P + I = 0` with identity weights.
fn solve_care(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let mut k = bass_initial_gain(a, b)?;
    let max_iter = 60;
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let ac = a - b * &k;
        let q = &eye + k.transpose() * &k;
        let mut p = solve_lyapunov(&ac.transpose(), &(-q))?;
        // Symmetrize against roundoff drift.
        p = (&p + p.transpose()) * 0.5;
        k = b.transpose() * &p;
        let r = a.transpose() * &p + &p * a - &p * b * b.transpose() * &p + &eye;
        residual = r.norm();
        if residual <= tol * (1.0 + p.norm()) {
            return Ok((p, k));
        }
    }
    Err(Error::RiccatiDiverged {
        residual,
        iterations: max_iter,
    })
}

fn matrix_abscissa(m: &DMatrix<f64>) -> Result<f64> {
    if m.nrows() == 0 {
        return Ok(f64::NEG_INFINITY);
    }
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), f64::EPSILON, 100_000)
        .ok_or(Error::EigenFailure { dim: m.nrows() })?;
    Ok(schur
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Certified gain placement result.
#[derive(Debug, Clone)]
pub struct Placement {
    /// Gain with the `a - b K` orientation.
    pub gain: DMatrix<f64>,
    /// Spectral abscissa of `a - b K` by direct eigensolve.
    pub achieved_abscissa: f64,
    /// Certified slack below `-zeta/2`.
    pub epsilon: f64,
}

/// Place the block `a` under `-zeta/2` by solving the Riccati equation for
/// the shifted pair `(a + (zeta/2) I, b)`: the shifted closed loop is
/// stable, so the unshifted one has abscissa strictly below `-zeta/2`.
/// A block that already satisfies the target is accepted with zero gain.
pub fn place_poles(a: &DMatrix<f64>, b: &DMatrix<f64>, zeta: f64, tol: f64) -> Result<Placement> {
    let n = a.nrows();
    let open = matrix_abscissa(a)?;
    if open <= -zeta / 2.0 || b.norm() == 0.0 {
        if open > -zeta / 2.0 {
            return Err(Error::InvalidModel(
                "zero control authority on a block violating the placement target".into(),
            ));
        }
        return Ok(Placement {
            gain: DMatrix::zeros(b.ncols(), n),
            achieved_abscissa: open,
            epsilon: -open - zeta / 2.0,
        });
    }
    let report = hautus_check(a, b, 1e-9)?;
    if let Some(w) = report.witness {
        return Err(Error::HautusFailed {
            mode: w.mode,
            re: w.eigenvalue.re,
            im: w.eigenvalue.im,
            sigma_min: w.sigma_min,
        });
    }
    let shifted = a + DMatrix::<f64>::identity(n, n) * (zeta / 2.0);
    let (_p, k) = solve_care(&shifted, b, tol)?;
    let achieved = matrix_abscissa(&(a - b * &k))?;
    let epsilon = -achieved - zeta / 2.0;
    if epsilon <= 0.0 {
        return Err(Error::RiccatiDiverged {
            residual: epsilon.abs(),
            iterations: 0,
        });
    }
    Ok(Placement {
        gain: k,
        achieved_abscissa: achieved,
        epsilon,
    })
}

/// Synthesis certificates reported alongside the gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificates {
    /// Abscissa of the gamma-shifted closed unstable block (<= -zeta/2),
    /// absent for zero-gain laws.
    pub placement_abscissa: Option<f64>,
    /// Max over discarded modes of the shifted rightmost characteristic
    /// root (<= -alpha), absent when every mode was retained.
    pub residual_abscissa: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LawMeta {
    pub alpha: f64,
    pub gamma: f64,
    pub beta: f64,
    pub zeta: f64,
}

/// Instantaneous feedback law `u(t) = G P y(t)`: the control depends on the
/// current modal head only, never on the history segment.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackLaw {
    /// m x |unstable| gain acting on the retained modal coordinates.
    pub gain: DMatrix<f64>,
    /// Retained (0-based) mode indices, the image of the projection.
    pub mode_indices: Vec<usize>,
    pub meta: LawMeta,
    pub certificates: Certificates,
}

impl FeedbackLaw {
    pub fn zero(channels: usize, meta: LawMeta, certificates: Certificates) -> Self {
        Self {
            gain: DMatrix::zeros(channels, 0),
            mode_indices: Vec::new(),
            meta,
            certificates,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mode_indices.is_empty() || self.gain.norm() == 0.0
    }

    /// Evaluate the control from the current state.
    pub fn apply(&self, y: &DVector<f64>) -> DVector<f64> {
        let proj = DVector::from_iterator(
            self.mode_indices.len(),
            self.mode_indices.iter().map(|&k| y[k]),
        );
        &self.gain * proj
    }

    /// Evaluate the control from a lifted state. Reads the head only, so
    /// tail perturbations can never change the output.
    pub fn apply_lifted(&self, state: &LiftedState) -> DVector<Complex64> {
        let proj = DVector::from_iterator(
            self.mode_indices.len(),
            self.mode_indices.iter().map(|&k| state.head[k]),
        );
        let gain_c = self.gain.map(|x| Complex64::new(x, 0.0));
        &gain_c * proj
    }

    /// The closed-loop feedback operator `B G P` as a dense N x N matrix.
    pub fn state_feedback_matrix(&self, sys: &ModalSystem) -> DMatrix<f64> {
        let n = sys.n_modes();
        let mut p = DMatrix::zeros(self.mode_indices.len(), n);
        for (row, &k) in self.mode_indices.iter().enumerate() {
            p[(row, k)] = 1.0;
        }
        &sys.control_matrix * &self.gain * p
    }
}

/// Serialization mirror: the wire format carries the gain row-major under
/// the names the command line documents.
#[derive(Serialize, Deserialize)]
struct FeedbackLawFile {
    alpha: f64,
    gamma: f64,
    beta: f64,
    zeta: f64,
    /// 0-based retained mode indices.
    unstable_modes: Vec<usize>,
    /// Row-major gain, one inner vector per control channel.
    gain: Vec<Vec<f64>>,
    certificates: Certificates,
}

impl Serialize for FeedbackLaw {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows = (0..self.gain.nrows())
            .map(|r| self.gain.row(r).iter().copied().collect())
            .collect();
        FeedbackLawFile {
            alpha: self.meta.alpha,
            gamma: self.meta.gamma,
            beta: self.meta.beta,
            zeta: self.meta.zeta,
            unstable_modes: self.mode_indices.clone(),
            gain: rows,
            certificates: self.certificates,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FeedbackLaw {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = FeedbackLawFile::deserialize(d)?;
        let rows = f.gain.len();
        let cols = f.gain.first().map_or(0, |r| r.len());
        if f.gain.iter().any(|r| r.len() != cols) {
            return Err(serde::de::Error::custom("ragged gain matrix"));
        }
        if cols != f.unstable_modes.len() {
            return Err(serde::de::Error::custom(
                "gain column count does not match unstable_modes",
            ));
        }
        let gain = DMatrix::from_fn(rows, cols, |i, j| f.gain[i][j]);
        Ok(FeedbackLaw {
            gain,
            mode_indices: f.unstable_modes,
            meta: LawMeta {
                alpha: f.alpha,
                gamma: f.gamma,
                beta: f.beta,
                zeta: f.zeta,
            },
            certificates: f.certificates,
        })
    }
}

/// Full synthesis: margins, split, Hautus, placement, assembly.
pub fn synthesize(sys: &ModalSystem, req: &SynthesisRequest) -> Result<FeedbackLaw> {
    let assumptions = check_assumptions(sys);
    if !assumptions.pass() {
        return Err(Error::InvalidModel(format!(
            "assumption check failed: {}",
            assumptions.violations.join("; ")
        )));
    }
    let alpha = req.alpha;
    let gamma = req.gamma;
    let margin = req.margin;
    let kappa_eff = sys.delay_bound();
    let beta = choose_beta(alpha, gamma, kappa_eff, sys.tau, margin)?;
    let mu_place = alpha + margin;
    let zeta_grow = ((gamma + mu_place) * sys.tau).exp();
    let zeta = 2.0 * (mu_place + kappa_eff * zeta_grow) + margin;
    if !zeta.is_finite() {
        return Err(Error::Overflow(
            "placement margin overflowed; use a smaller shift".into(),
        ));
    }
    let meta = LawMeta {
        alpha,
        gamma,
        beta,
        zeta,
    };
    let channels = sys.control_channels();

    // A system whose certified abscissa already beats the rate needs no
    // control at all.
    let open = spectral_abscissa(sys, 1e-9)?;
    if open.value <= -alpha {
        return Ok(FeedbackLaw::zero(
            channels,
            meta,
            Certificates {
                placement_abscissa: None,
                residual_abscissa: Some(open.value + gamma),
            },
        ));
    }

    let split = split_spectrum(sys, gamma, beta);
    let residual_abscissa = residual_block_abscissa(sys, &split, gamma)?;
    if split.unstable_modes.is_empty() {
        return Ok(FeedbackLaw::zero(
            channels,
            meta,
            Certificates {
                placement_abscissa: None,
                residual_abscissa,
            },
        ));
    }

    let nu = split.unstable_modes.len();
    let a_u = DMatrix::from_fn(nu, nu, |r, c| {
        if r == c {
            sys.eigenvalues[split.unstable_modes[r]] + gamma
        } else {
            0.0
        }
    });
    let mut b_u = DMatrix::zeros(nu, channels);
    for (row, &k) in split.unstable_modes.iter().enumerate() {
        b_u.row_mut(row).copy_from(&sys.control_matrix.row(k));
    }
    let report = hautus_check(&a_u, &b_u, 1e-9)?;
    if let Some(w) = report.witness {
        return Err(Error::HautusFailed {
            mode: split.unstable_modes[w.mode],
            re: w.eigenvalue.re,
            im: w.eigenvalue.im,
            sigma_min: w.sigma_min,
        });
    }
    let placement = place_poles(&a_u, &b_u, zeta, 1e-10)?;
    Ok(FeedbackLaw {
        gain: -placement.gain,
        mode_indices: split.unstable_modes,
        meta,
        certificates: Certificates {
            placement_abscissa: Some(placement.achieved_abscissa),
            residual_abscissa,
        },
    })
}

/// Shifted rightmost-root abscissa over the discarded modes.
fn residual_block_abscissa(
    sys: &ModalSystem,
    split: &SpectralSplit,
    gamma: f64,
) -> Result<Option<f64>> {
    let kappa_shifted = sys.delay_bound() * (gamma * sys.tau).exp();
    let mut worst: Option<f64> = None;
    for (k, &mu) in sys.eigenvalues.iter().enumerate() {
        if split.unstable_modes.contains(&k) {
            continue;
        }
        let shifted = mu + gamma;
        let scan = rightmost_roots(
            shifted,
            kappa_shifted,
            sys.tau,
            1,
            1e-9 * (1.0 + shifted.abs()),
        )?;
        let re = scan.roots[0].re;
        worst = Some(worst.map_or(re, |w: f64| w.max(re)));
    }
    Ok(worst)
}

/// The two-phase localized law: zero control on `[0, tau]`, then the inner
/// instantaneous gain plus the delayed cancellation `a y(t - tau)` routed
/// through the actuator region.
#[derive(Debug, Clone)]
pub struct TwoPhaseLaw {
    /// Instantaneous part, synthesized for the constant-coefficient system.
    pub inner: FeedbackLaw,
    /// The delay coefficient `a`, cancelled on the complement region.
    pub delay_cancel_coeff: f64,
    /// Modal multiplier of the actuator region (its Gram matrix).
    pub omega2_mask: DMatrix<f64>,
    /// The switch instant; the law is identically zero before and at it.
    pub switch_time: f64,
}

impl TwoPhaseLaw {
    /// Control value at time `t` from the current head and the delayed head.
    pub fn control(&self, t: f64, y: &DVector<f64>, y_delayed: &DVector<f64>) -> DVector<f64> {
        if t <= self.switch_time {
            return DVector::zeros(y.len());
        }
        self.inner.apply(y) + y_delayed * self.delay_cancel_coeff
    }
}

/// Build the two-phase law for a localized interior system whose delay acts
/// on `omega1` and whose control acts on `omega2`. The pair must tile (0,1):
/// the cancellation argument needs `chi_omega1 + chi_omega2 = 1`.
pub fn synthesize_localized(
    sys: &ModalSystem,
    omega1: &IntervalSet,
    omega2: &IntervalSet,
    gamma: f64,
    margin: f64,
) -> Result<TwoPhaseLaw> {
    if sys.delay_coupling.is_none() {
        return Err(Error::InvalidModel(
            "two-phase synthesis expects a localized delay coupling; build the \
             system with build_localized_interior_model"
                .into(),
        ));
    }
    if !omega1.covers_unit_with(omega2, 1e-12) {
        return Err(Error::InvalidModel(
            "omega1 and omega2 must be a disjoint cover of (0,1); overlapping or \
             non-covering pairs break the delay cancellation identity"
                .into(),
        ));
    }
    let a = sys.kappa;
    // Constant-coefficient comparison system: full-domain delay `a I`,
    // control through the same actuator Gram matrix.
    let constant = ModalSystem {
        eigenvalues: sys.eigenvalues.clone(),
        control_matrix: sys.control_matrix.clone(),
        kappa: a,
        tau: sys.tau,
        basis_tag: sys.basis_tag,
        unbounded_control: sys.unbounded_control,
        delay_coupling: None,
    };
    let req = SynthesisRequest::with_margin(gamma, margin)?;
    let inner = synthesize(&constant, &req)?;
    Ok(TwoPhaseLaw {
        inner,
        delay_cancel_coeff: a,
        omega2_mask: sys.control_matrix.clone(),
        switch_time: sys.tau,
    })
}
