//! Characteristic roots of scalar delay equations.
//!
//! Everything here revolves on the transcendental relation
//!
//! ```text
//! z - kappa e^{-z tau} = eta
//! ```
//!
//! whose solutions parameterize the spectrum of the delayed generator mode by
//! mode. Substituting `v = (z - eta) tau` turns it into `v e^v = kappa tau
//! e^{-eta tau}`, so every solution is `z = eta + W_j(kappa tau e^{-eta tau})
//! / tau` for some Lambert-W branch `j`. Each returned root carries a residual
//! certificate from direct substitution; nothing is returned uncertified.

use crate::error::{Error, Result};
use crate::modal::ModalSystem;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{E, PI};

/// A certified characteristic root.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CharRoot {
    pub re: f64,
    pub im: f64,
    /// `|z - kappa e^{-z tau} - eta|` by direct substitution.
    pub residual: f64,
    /// Lambert-W branch index the root was traced from.
    pub branch: i64,
}

impl CharRoot {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// A query for a preimage of `eta` under `z -> z - kappa e^{-z tau}`.
#[derive(Debug, Clone, Copy)]
pub struct PreimageQuery {
    pub eta: Complex64,
    pub kappa: f64,
    pub tau: f64,
    pub tol: f64,
}

impl PreimageQuery {
    pub fn new(eta: Complex64, kappa: f64, tau: f64, tol: f64) -> Result<Self> {
        if tau <= 0.0 || !tau.is_finite() {
            return Err(Error::InvalidModel("tau must be positive".into()));
        }
        if tol <= 0.0 {
            return Err(Error::InvalidModel("tol must be positive".into()));
        }
        Ok(Self {
            eta,
            kappa,
            tau,
            tol,
        })
    }
}

pub const DEFAULT_TOL: f64 = 1e-12;
const MAX_NEWTON_ITER: usize = 100;
const MAX_BRANCH_SCAN: i64 = 64;

/// Lambert W on branch `j`: returns `w` with `|w e^w - z| <= tol * max(1, |z|)`
/// and, away from the real branch cuts, `Im w` in `((2j-1) pi, (2j+1) pi]`.
/// The residual scale factor matters only for very large arguments, where an
/// absolute certificate is below floating-point representability.
///
/// Branch point `z = -1/e` is handled by the series `w = -1 + p - p^2/3` with
/// `p = +-sqrt(2(e z + 1))`; real arguments in `[-1/e, 0)` on branch -1 take
/// the standard real value in `(-inf, -1]`.
pub fn lambert_w(j: i64, z: Complex64, tol: f64) -> Result<Complex64> {
    if z.norm() == 0.0 {
        return if j == 0 {
            Ok(Complex64::new(0.0, 0.0))
        } else {
            Err(Error::InvalidModel(
                "lambert_w: z = 0 is a logarithmic singularity on branches j != 0".into(),
            ))
        };
    }
    let branch_point_gap = z + Complex64::new(1.0 / E, 0.0);
    if (j == 0 || j == -1) && branch_point_gap.norm() <= 1e-14 {
        return Ok(Complex64::new(-1.0, 0.0));
    }

    let scale = z.norm().max(1.0);
    let seed = lambert_seed(j, z);
    let mut w = seed;
    let mut best = w;
    let mut best_res = f64::INFINITY;
    for _ in 0..MAX_NEWTON_ITER {
        let ew = w.exp();
        let f = w * ew - z;
        let res = f.norm();
        if res < best_res {
            best_res = res;
            best = w;
        }
        if res <= tol * scale {
            return Ok(w);
        }
        // Halley step: robust near the branch point where Newton degenerates.
        let fp = ew * (w + 1.0);
        let denom = fp - f * (w + 2.0) / (2.0 * (w + 1.0));
        if denom.norm() == 0.0 {
            break;
        }
        w -= f / denom;
    }
    // One more certification pass on the best iterate.
    if best_res <= tol * scale {
        Ok(best)
    } else {
        Err(Error::RootNotCertified {
            branches: 1,
            best_residual: best_res,
        })
    }
}

fn lambert_seed(j: i64, z: Complex64) -> Complex64 {
    let two_pi_j = Complex64::new(0.0, 2.0 * PI * j as f64);
    // Near the branch point the log-based seed is useless; use the square
    // root expansion for the two branches that meet there.
    let p2 = 2.0 * (z * E + 1.0);
    if (j == 0 || j == -1) && p2.norm() < 0.4 {
        let sign = if j == 0 { 1.0 } else { -1.0 };
        let p = p2.sqrt() * sign;
        return Complex64::new(-1.0, 0.0) + p - p * p / 3.0;
    }
    // Real arguments on the two branches that take real values: bisect on
    // the real line so the result is exactly real.
    if z.im == 0.0 && j == 0 && z.re >= -1.0 / E {
        return Complex64::new(real_branch_bisect(z.re, false), 0.0);
    }
    if z.im == 0.0 && j == -1 && z.re >= -1.0 / E && z.re < 0.0 {
        return Complex64::new(real_branch_bisect(z.re, true), 0.0);
    }
    if j == 0 {
        if z.norm() < 0.3 {
            // Series about the origin.
            return z * (1.0 - z + 1.5 * z * z);
        }
        let l1 = z.ln();
        if l1.norm() < 1e-3 {
            return Complex64::new(0.567_143_290_409_783_8, 0.0);
        }
        return l1 - l1.ln();
    }
    // Asymptotic seed on branch j, then fixed-point sweeps of
    // w -> L1 - ln(w) to land in the right basin.
    let l1 = z.ln() + two_pi_j;
    let mut w = l1 - l1.ln();
    for _ in 0..4 {
        if w.norm() == 0.0 {
            break;
        }
        w = l1 - w.ln();
    }
    w
}

/// Bisection for the real Lambert branches: `W_0` on `[-1/e, inf)` and
/// `W_{-1}` on `[-1/e, 0)`.
fn real_branch_bisect(x: f64, lower_branch: bool) -> f64 {
    let f = |w: f64| w * w.exp() - x;
    let (mut lo, mut hi) = if lower_branch {
        // W_{-1} <= -1; f(-1) < 0 for x > -1/e, so step left until f > 0.
        let mut lo = -2.0;
        while f(lo) <= 0.0 && lo > -750.0 {
            lo *= 2.0;
        }
        (lo, -1.0)
    } else if x > E {
        // W_0(x) in (1, ln x) for x > e.
        (1.0, x.ln())
    } else {
        (-1.0, 1.0)
    };
    for _ in 0..120 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solve `w e^w = exp(ln_z)` on branch `j` when `exp(ln_z)` overflows f64,
/// working on the logarithmic form `ln w + w = ln_z + 2 pi i j`.
fn lambert_from_log_argument(j: i64, ln_z: Complex64) -> Complex64 {
    let target = ln_z + Complex64::new(0.0, 2.0 * PI * j as f64);
    let mut w = target - target.ln();
    for _ in 0..MAX_NEWTON_ITER {
        let g = w.ln() + w - target;
        let gp = 1.0 / w + 1.0;
        if gp.norm() == 0.0 || !w.re.is_finite() {
            break;
        }
        let step = g / gp;
        w -= step;
        if step.norm() <= 1e-15 * w.norm() {
            break;
        }
    }
    w
}

/// Solve `z - kappa e^{-z tau} = eta` for one certified root.
///
/// Seeds are taken from Lambert-W branches of `kappa tau e^{-eta tau}` and
/// polished by Newton on the defining equation; when every seed stalls, the
/// strip/curve construction of [`branch_seed`] is used as a fallback ladder.
/// Surjectivity guarantees a solution exists for every query.
pub fn solve_preimage(q: &PreimageQuery) -> Result<Complex64> {
    if q.kappa == 0.0 {
        return Ok(q.eta);
    }
    let arg = Complex64::new(q.kappa * q.tau, 0.0) * (-q.eta * q.tau).exp();
    let mut best_res = f64::INFINITY;
    let mut scanned = 0usize;
    for j in branch_order(MAX_BRANCH_SCAN) {
        scanned += 1;
        let seed = match lambert_w(j, arg, 1e-8) {
            Ok(w) => q.eta + w / q.tau,
            Err(_) => continue,
        };
        match newton_polish(seed, q) {
            Ok((z, _res)) => return Ok(z),
            Err(res) => best_res = best_res.min(res),
        }
    }
    // Fallback: seed from the curve-intersection construction at high strip
    // index, where an intersection is guaranteed.
    for j in 0..MAX_BRANCH_SCAN {
        scanned += 1;
        let (xi1, xi2) = match branch_seed(q.eta, q.kappa, q.tau, j) {
            Ok(seed) => seed,
            Err(_) => continue,
        };
        let z = Complex64::new(
            xi1 / q.tau + q.eta.re,
            q.eta.im - xi2 / q.tau,
        );
        match newton_polish(z, q) {
            Ok((z, _res)) => return Ok(z),
            Err(res) => best_res = best_res.min(res),
        }
    }
    Err(Error::RootNotCertified {
        branches: scanned,
        best_residual: best_res,
    })
}

fn branch_order(max: i64) -> impl Iterator<Item = i64> {
    (0..=max).flat_map(|k| {
        if k == 0 {
            vec![0]
        } else {
            vec![-k, k]
        }
    })
}

fn newton_polish(seed: Complex64, q: &PreimageQuery) -> std::result::Result<(Complex64, f64), f64> {
    let mut z = seed;
    let mut best_res = f64::INFINITY;
    let mut best = z;
    for _ in 0..MAX_NEWTON_ITER {
        let delay = Complex64::new(q.kappa, 0.0) * (-z * q.tau).exp();
        let f = z - delay - q.eta;
        let res = f.norm();
        if res < best_res {
            best_res = res;
            best = z;
        }
        if res <= q.tol {
            return Ok((best, best_res));
        }
        let fp = Complex64::new(1.0, 0.0) + delay * q.tau;
        if fp.norm() < 1e-300 || !z.re.is_finite() || !z.im.is_finite() {
            break;
        }
        z -= f / fp;
    }
    if best_res <= q.tol {
        Ok((best, best_res))
    } else {
        Err(best_res)
    }
}

/// Initial guess on the curve `xi2 = +sqrt(a^2 e^{-2 xi1} - xi1^2)` inside
/// the strip `xi2 in (j pi + eta2 tau, (j + 1/2) pi + eta2 tau)`, with
/// `a = kappa tau e^{-eta1 tau}`. The root is recovered through
/// `z = (xi1 / tau + eta1) + i (eta2 - xi2 / tau)`.
pub fn branch_seed(eta: Complex64, kappa: f64, tau: f64, j: i64) -> Result<(f64, f64)> {
    if kappa == 0.0 {
        return Err(Error::NoDelayBranch);
    }
    if j < 0 {
        return Err(Error::AdvanceBranch { strip: j });
    }
    let a = kappa * tau * (-eta.re * tau).exp();
    let lo = j as f64 * PI + eta.im * tau;
    let hi = (j as f64 + 0.5) * PI + eta.im * tau;
    if hi <= 0.0 {
        // The curve branch with xi2 > 0 cannot enter this strip.
        return Err(Error::AdvanceBranch { strip: j });
    }
    let target = 0.5 * (lo.max(0.0) + hi);
    // Solve a^2 e^{-2 xi1} - xi1^2 = target^2 for xi1 < 0 by bisection: the
    // left side exceeds the right for xi1 -> -inf and is below it at xi1 = 0
    // whenever |a| < target.
    let g = |x: f64| a * a * (-2.0 * x).exp() - x * x - target * target;
    let mut lo_x = -1.0;
    while g(lo_x) <= 0.0 {
        lo_x *= 2.0;
        if lo_x < -700.0 {
            return Err(Error::AdvanceBranch { strip: j });
        }
    }
    let mut hi_x = 0.0;
    if g(hi_x) >= 0.0 {
        // |a| >= target: the curve exits the strip before reaching xi1 = 0.
        return Err(Error::AdvanceBranch { strip: j });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo_x + hi_x);
        if g(mid) > 0.0 {
            lo_x = mid;
        } else {
            hi_x = mid;
        }
    }
    let xi1 = 0.5 * (lo_x + hi_x);
    let xi2 = target;
    // Sign conditions of the constructive proof; the strip parity must match
    // the sign of a, otherwise the intersection is spurious for this branch.
    let c = (xi2 - eta.im * tau).cos();
    let s = (xi2 - eta.im * tau).sin();
    let signs_ok = if a > 0.0 {
        xi1 * c >= 0.0 && xi2 * s <= 0.0
    } else {
        xi1 * c <= 0.0 && xi2 * s >= 0.0
    };
    if !signs_ok {
        return Err(Error::AdvanceBranch { strip: j });
    }
    Ok((xi1, xi2))
}

/// Outcome of a rightmost-roots query: certified roots sorted by descending
/// real part plus explicit flags for anything that could not be certified or
/// does not exist.
#[derive(Debug, Clone)]
pub struct RootScan {
    pub roots: Vec<CharRoot>,
    pub flags: Vec<RootFlag>,
}

#[derive(Debug, Clone)]
pub enum RootFlag {
    /// Fewer roots exist than requested (kappa = 0 has a single root).
    AbsentSlots { requested: usize, found: usize },
    /// A branch produced an uncertified candidate.
    Uncertified {
        branch: i64,
        value: Complex64,
        residual: f64,
    },
}

/// The `count` roots of `lambda = mu + kappa e^{-lambda tau}` with largest
/// real parts, via `lambda = mu + W_j(kappa tau e^{-mu tau}) / tau` over
/// branches `j = 0, -1, 1, -2, ...` with Newton polish on each.
pub fn rightmost_roots(mu: f64, kappa: f64, tau: f64, count: usize, tol: f64) -> Result<RootScan> {
    if count == 0 {
        return Err(Error::InvalidModel("count must be at least 1".into()));
    }
    if tau <= 0.0 {
        return Err(Error::InvalidModel("tau must be positive".into()));
    }
    if kappa == 0.0 {
        let root = CharRoot {
            re: mu,
            im: 0.0,
            residual: 0.0,
            branch: 0,
        };
        let flags = if count > 1 {
            vec![RootFlag::AbsentSlots {
                requested: count,
                found: 1,
            }]
        } else {
            vec![]
        };
        return Ok(RootScan {
            roots: vec![root],
            flags,
        });
    }
    let q = PreimageQuery::new(Complex64::new(mu, 0.0), kappa, tau, tol)?;
    // ln(kappa tau e^{-mu tau}) stays representable even when the argument
    // itself overflows (very stable modes).
    let ln_arg = Complex64::new(
        (kappa.abs() * tau).ln() - mu * tau,
        if kappa < 0.0 { PI } else { 0.0 },
    );
    // Switch to the logarithmic Newton form well before e^{ln_arg} loses all
    // absolute precision.
    let overflow = ln_arg.re > 30.0;
    let arg = Complex64::new(kappa * tau * (-mu * tau).exp(), 0.0);
    let mut roots: Vec<CharRoot> = Vec::new();
    let mut flags = Vec::new();
    let scan_branches = (count as i64) + 4;
    for j in branch_order(scan_branches.min(MAX_BRANCH_SCAN)) {
        let w = if overflow {
            lambert_from_log_argument(j, ln_arg)
        } else {
            match lambert_w(j, arg, 1e-8) {
                Ok(w) => w,
                Err(_) => continue,
            }
        };
        let seed = q.eta + w / tau;
        match newton_polish(seed, &q) {
            Ok((z, res)) => {
                let dup = roots
                    .iter()
                    .any(|r| (r.value() - z).norm() <= 1e-8 * (1.0 + z.norm()));
                if !dup {
                    roots.push(CharRoot {
                        re: z.re,
                        im: z.im,
                        residual: res,
                        branch: j,
                    });
                }
            }
            Err(res) => flags.push(RootFlag::Uncertified {
                branch: j,
                value: seed,
                residual: res,
            }),
        }
    }
    roots.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap()
            .then(b.im.partial_cmp(&a.im).unwrap())
    });
    if roots.len() > count {
        // Never split a conjugate pair at the truncation boundary: the
        // returned set stays closed under conjugation.
        let mut keep = count;
        let last = roots[count - 1];
        if last.im != 0.0 {
            let partner = roots[count..].iter().position(|r| {
                (r.value() - last.value().conj()).norm() <= 1e-8 * (1.0 + last.value().norm())
            });
            if let Some(off) = partner {
                roots.swap(count, count + off);
                keep += 1;
            }
        }
        roots.truncate(keep);
    } else if roots.len() < count {
        flags.push(RootFlag::AbsentSlots {
            requested: count,
            found: roots.len(),
        });
    }
    Ok(RootScan { roots, flags })
}

/// Spectral abscissa of a modal delay system.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AbscissaReport {
    pub value: f64,
    /// False when the value is a certified upper bound (matrix-valued delay
    /// coupling) rather than an exact abscissa.
    pub exact: bool,
}

/// Max over modes of the real part of the rightmost characteristic root.
/// For scalar delay coupling this is exact; for matrix coupling the delay
/// block is bounded by its spectral norm and the result is an upper bound.
pub fn spectral_abscissa(sys: &ModalSystem, tol: f64) -> Result<AbscissaReport> {
    let exact = sys.delay_coupling.is_none();
    let kappa_eff = if exact { sys.kappa } else { sys.delay_bound() };
    let mut sup = f64::NEG_INFINITY;
    for &mu in &sys.eigenvalues {
        // Residuals scale with the mode magnitude; keep the certificate
        // attainable for the stiff tail modes.
        let scan = rightmost_roots(mu, kappa_eff, sys.tau, 1, tol * (1.0 + mu.abs()))?;
        let top = scan
            .roots
            .first()
            .ok_or(Error::RootNotCertified {
                branches: 0,
                best_residual: f64::INFINITY,
            })?
            .re;
        sup = sup.max(top);
    }
    Ok(AbscissaReport { value: sup, exact })
}
