//! Collocation of the product-space lifting of the delay equation.
//!
//! The delay system is rewritten as an undelayed evolution on
//! `X x L^2(-tau, 0; X)` with head `y(t)` and tail `z(t, theta) = y(t + theta)`.
//! The generator acts as
//!
//! ```text
//! (f1, f2) -> (A f1 + D f2(-tau), d/dtheta f2)      with f2(0) = f1,
//! ```
//!
//! and its adjoint as `(xi1, xi2) -> (A* xi1 + xi2(0), -d/dtheta xi2)` with
//! `xi2(-tau) = D* xi1`. Both are discretized on M+1 collocation nodes of
//! `[-tau, 0]`; the domain condition is imposed by identifying the boundary
//! node with the head, which keeps the matrix square and the eigenproblem
//! standard. Eigenvalues of the discrete generator approximate the
//! characteristic roots computed in [`crate::roots`], which is exactly the
//! cross-validation the tests perform.

use crate::error::{Error, Result};
use crate::modal::ModalSystem;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeScheme {
    /// Chebyshev-Gauss-Lobatto nodes with the spectral differentiation
    /// matrix and Clenshaw-Curtis quadrature weights.
    Chebyshev,
    /// Equispaced nodes with first-order upwind differences and trapezoid
    /// weights. Kept for robustness comparisons.
    Uniform,
}

/// Which operator the matrix discretizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftedLayout {
    /// State `[y; z(theta_1), ..., z(theta_M)]`, `z(0)` identified with `y`.
    Primal,
    /// State `[xi; w(theta_0), ..., w(theta_{M-1})]`, `w(-tau)` identified
    /// with `D* xi`.
    Adjoint,
}

/// Dense collocation matrix of the lifted generator together with the node
/// and quadrature data needed to interpret its state vector.
#[derive(Debug, Clone)]
pub struct LiftedGeneratorMatrix {
    pub matrix: DMatrix<f64>,
    /// Collocation nodes on [-tau, 0], descending from 0 to -tau.
    pub nodes: Vec<f64>,
    /// Quadrature weights matching the nodes.
    pub weights: Vec<f64>,
    pub n_modes: usize,
    pub m_nodes: usize,
    pub scheme: NodeScheme,
    pub tau: f64,
    pub layout: LiftedLayout,
}

impl LiftedGeneratorMatrix {
    pub fn dim(&self) -> usize {
        self.n_modes * (self.m_nodes + 1)
    }
}

/// Chebyshev-Gauss-Lobatto nodes `cos(j pi / m)`, j = 0..m, on [-1, 1].
pub fn chebyshev_nodes(m: usize) -> Vec<f64> {
    (0..=m).map(|j| (j as f64 * PI / m as f64).cos()).collect()
}

/// Spectral differentiation matrix on the CGL nodes.
pub fn chebyshev_diff_matrix(m: usize) -> DMatrix<f64> {
    let x = chebyshev_nodes(m);
    let np = m + 1;
    let mut c = vec![1.0; np];
    c[0] = 2.0;
    c[m] = 2.0;
    let mut d = DMatrix::zeros(np, np);
    for i in 0..np {
        for j in 0..np {
            if i != j {
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                d[(i, j)] = (c[i] / c[j]) * sign / (x[i] - x[j]);
            }
        }
    }
    // Negative row sums on the diagonal kill the worst roundoff.
    for i in 0..np {
        let mut sum = 0.0;
        for j in 0..np {
            if j != i {
                sum += d[(i, j)];
            }
        }
        d[(i, i)] = -sum;
    }
    d
}

/// Clenshaw-Curtis quadrature weights on the CGL nodes of [-1, 1].
pub fn clenshaw_curtis_weights(m: usize) -> Vec<f64> {
    let mut w = vec![0.0; m + 1];
    let half = m / 2;
    for (j, wj) in w.iter_mut().enumerate() {
        let cj = if j == 0 || j == m { 1.0 } else { 2.0 };
        let mut sum = 0.0;
        for k in 1..=half {
            let bk = if 2 * k == m { 1.0 } else { 2.0 };
            sum += bk / ((4 * k * k - 1) as f64)
                * (2.0 * k as f64 * j as f64 * PI / m as f64).cos();
        }
        *wj = cj / m as f64 * (1.0 - sum);
    }
    w
}

fn node_data(scheme: NodeScheme, m: usize, tau: f64) -> (Vec<f64>, Vec<f64>) {
    match scheme {
        NodeScheme::Chebyshev => {
            let nodes = chebyshev_nodes(m)
                .into_iter()
                .map(|x| (x - 1.0) * tau / 2.0)
                .collect();
            let weights = clenshaw_curtis_weights(m)
                .into_iter()
                .map(|w| w * tau / 2.0)
                .collect();
            (nodes, weights)
        }
        NodeScheme::Uniform => {
            let h = tau / m as f64;
            let nodes = (0..=m).map(|i| -(i as f64) * h).collect();
            let mut weights = vec![h; m + 1];
            weights[0] = h / 2.0;
            weights[m] = h / 2.0;
            (nodes, weights)
        }
    }
}

/// d/dtheta on the nodes, rows restricted later by the assembly.
fn theta_diff_matrix(scheme: NodeScheme, m: usize, tau: f64, layout: LiftedLayout) -> DMatrix<f64> {
    match scheme {
        // theta = (x - 1) tau / 2 maps [-1,1] to [-tau, 0].
        NodeScheme::Chebyshev => chebyshev_diff_matrix(m) * (2.0 / tau),
        NodeScheme::Uniform => {
            let h = tau / m as f64;
            let mut d = DMatrix::zeros(m + 1, m + 1);
            match layout {
                // Transport flows from theta = 0 toward -tau: one-sided
                // difference against the node nearer zero.
                LiftedLayout::Primal => {
                    for i in 1..=m {
                        d[(i, i - 1)] = 1.0 / h;
                        d[(i, i)] = -1.0 / h;
                    }
                }
                // The adjoint transports the other way; difference against
                // the node nearer -tau.
                LiftedLayout::Adjoint => {
                    for i in 0..m {
                        d[(i, i)] = 1.0 / h;
                        d[(i, i + 1)] = -1.0 / h;
                    }
                }
            }
            d
        }
    }
}

/// Collocation matrix of the lifted generator. State layout
/// `[y; z(theta_1); ...; z(theta_M)]` with `z(theta_0) = z(0)` identified
/// with the head, so the theta = 0 collocation row is replaced by the head
/// dynamics `y' = A y + D z(-tau)`.
pub fn build_lifted_generator(
    sys: &ModalSystem,
    m_nodes: usize,
    scheme: NodeScheme,
) -> Result<LiftedGeneratorMatrix> {
    if m_nodes < 4 {
        return Err(Error::InvalidConfig("m_nodes must be at least 4".into()));
    }
    let n = sys.n_modes();
    let m = m_nodes;
    let dim = n * (m + 1);
    let dtheta = theta_diff_matrix(scheme, m, sys.tau, LiftedLayout::Primal);
    let delay = sys.delay_matrix();
    let mut g = DMatrix::zeros(dim, dim);
    // Head rows: A on the diagonal, delay operator against the -tau node.
    for k in 0..n {
        g[(k, k)] = sys.eigenvalues[k];
    }
    for r in 0..n {
        for c in 0..n {
            g[(r, m * n + c)] += delay[(r, c)];
        }
    }
    // Tail rows: z'(theta_i) = sum_j D[i, j] z(theta_j), z(theta_0) = head.
    for i in 1..=m {
        for j in 0..=m {
            let coeff = dtheta[(i, j)];
            if coeff != 0.0 {
                for k in 0..n {
                    g[(i * n + k, j * n + k)] += coeff;
                }
            }
        }
    }
    let (nodes, weights) = node_data(scheme, m, sys.tau);
    Ok(LiftedGeneratorMatrix {
        matrix: g,
        nodes,
        weights,
        n_modes: n,
        m_nodes: m,
        scheme,
        tau: sys.tau,
        layout: LiftedLayout::Primal,
    })
}

/// Collocation matrix of the adjoint generator. State layout
/// `[xi; w(theta_0); ...; w(theta_{M-1})]` with `w(-tau)` identified with
/// `D* xi`, so the theta = -tau collocation row is replaced by the
/// identification.
pub fn adjoint_generator(
    sys: &ModalSystem,
    m_nodes: usize,
    scheme: NodeScheme,
) -> Result<LiftedGeneratorMatrix> {
    if m_nodes < 4 {
        return Err(Error::InvalidConfig("m_nodes must be at least 4".into()));
    }
    let n = sys.n_modes();
    let m = m_nodes;
    let dim = n * (m + 1);
    let dtheta = theta_diff_matrix(scheme, m, sys.tau, LiftedLayout::Adjoint);
    let delay_t = sys.delay_matrix().transpose();
    let mut g = DMatrix::zeros(dim, dim);
    // Head rows: xi' = A* xi + w(0). The w block starts at column n, with
    // node theta_i stored at block i+1.
    for k in 0..n {
        g[(k, k)] = sys.eigenvalues[k];
        g[(k, n + k)] += 1.0;
    }
    // Tail rows at nodes 0..M-1: w'(theta_i) = -sum_j D[i, j] w(theta_j),
    // with the -tau node eliminated through w(-tau) = D* xi.
    for i in 0..m {
        for j in 0..=m {
            let coeff = -dtheta[(i, j)];
            if coeff == 0.0 {
                continue;
            }
            if j == m {
                for r in 0..n {
                    for c in 0..n {
                        g[((i + 1) * n + r, c)] += coeff * delay_t[(r, c)];
                    }
                }
            } else {
                for k in 0..n {
                    g[((i + 1) * n + k, (j + 1) * n + k)] += coeff;
                }
            }
        }
    }
    let (nodes, weights) = node_data(scheme, m, sys.tau);
    Ok(LiftedGeneratorMatrix {
        matrix: g,
        nodes,
        weights,
        n_modes: n,
        m_nodes: m,
        scheme,
        tau: sys.tau,
        layout: LiftedLayout::Adjoint,
    })
}

/// The `count` eigenvalues of largest real part, descending.
pub fn lifted_spectrum(gen: &LiftedGeneratorMatrix, count: usize) -> Result<Vec<Complex64>> {
    if count > gen.dim() {
        return Err(Error::InvalidConfig(format!(
            "count {} exceeds matrix dimension {}",
            count,
            gen.dim()
        )));
    }
    let schur = nalgebra::linalg::Schur::try_new(gen.matrix.clone(), f64::EPSILON, 100_000)
        .ok_or(Error::EigenFailure { dim: gen.dim() })?;
    let eigs = schur.complex_eigenvalues();
    let mut out: Vec<Complex64> = eigs.iter().map(|z| Complex64::new(z.re, z.im)).collect();
    out.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap()
            .then(b.im.partial_cmp(&a.im).unwrap())
    });
    out.truncate(count);
    Ok(out)
}

/// Discrete lifted state: head `y(t)` plus tail samples at the strictly
/// negative collocation nodes. The junction value `z(0)` is the head itself.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedState {
    pub head: DVector<Complex64>,
    /// N x M matrix; column i holds `z(theta_{i+1})`.
    pub tail: DMatrix<Complex64>,
    pub scheme: NodeScheme,
}

impl LiftedState {
    /// Flatten to the generator's state vector layout.
    pub fn to_vector(&self) -> DVector<Complex64> {
        let n = self.head.len();
        let m = self.tail.ncols();
        let mut v = DVector::zeros(n * (m + 1));
        v.rows_mut(0, n).copy_from(&self.head);
        for i in 0..m {
            v.rows_mut((i + 1) * n, n).copy_from(&self.tail.column(i));
        }
        v
    }
}

/// Interpolate a history function onto the collocation nodes.
pub fn embed(
    y0: &DVector<Complex64>,
    history: &dyn Fn(f64) -> DVector<Complex64>,
    gen: &LiftedGeneratorMatrix,
) -> LiftedState {
    let n = gen.n_modes;
    let m = gen.m_nodes;
    let mut tail = DMatrix::zeros(n, m);
    for i in 1..=m {
        tail.set_column(i - 1, &history(gen.nodes[i]));
    }
    LiftedState {
        head: y0.clone(),
        tail,
        scheme: gen.scheme,
    }
}

/// Embed from sampled history data with piecewise-linear interpolation.
/// `thetas` must be strictly increasing in [-tau, 0] and `values` must have
/// one column per sample.
pub fn embed_samples(
    y0: &DVector<Complex64>,
    thetas: &[f64],
    values: &DMatrix<Complex64>,
    gen: &LiftedGeneratorMatrix,
) -> Result<LiftedState> {
    if thetas.len() != values.ncols() {
        return Err(Error::InvalidConfig(format!(
            "history sample count mismatch: {} abscissas, {} columns",
            thetas.len(),
            values.ncols()
        )));
    }
    if values.nrows() != gen.n_modes {
        return Err(Error::InvalidConfig(
            "history row count differs from the modal dimension".into(),
        ));
    }
    if thetas.len() < 2 {
        return Err(Error::InvalidConfig(
            "need at least two history samples".into(),
        ));
    }
    let interp = |theta: f64| -> DVector<Complex64> {
        let pos = thetas
            .partition_point(|&t| t < theta)
            .min(thetas.len() - 1)
            .max(1);
        let (t0, t1) = (thetas[pos - 1], thetas[pos]);
        let s = ((theta - t0) / (t1 - t0)).clamp(0.0, 1.0);
        let v0 = values.column(pos - 1);
        let v1 = values.column(pos);
        DVector::from_fn(gen.n_modes, |k, _| v0[k] * (1.0 - s) + v1[k] * s)
    };
    Ok(embed(y0, &interp, gen))
}

/// Extract the current state `y(t)`. Exact inverse of the embedding on the
/// head component.
pub fn head(state: &LiftedState) -> DVector<Complex64> {
    state.head.clone()
}

/// Reconstruct the tail values at all M+1 nodes, including the identified
/// boundary node, for either layout. Used by the quadrature inner product.
pub fn node_values(
    gen: &LiftedGeneratorMatrix,
    state: &DVector<Complex64>,
    sys: &ModalSystem,
) -> (DVector<Complex64>, DMatrix<Complex64>) {
    let n = gen.n_modes;
    let m = gen.m_nodes;
    let head: DVector<Complex64> = state.rows(0, n).into();
    let mut tail = DMatrix::zeros(n, m + 1);
    match gen.layout {
        LiftedLayout::Primal => {
            tail.set_column(0, &head);
            for i in 1..=m {
                tail.set_column(i, &state.rows(i * n, n));
            }
        }
        LiftedLayout::Adjoint => {
            for i in 0..m {
                tail.set_column(i, &state.rows((i + 1) * n, n));
            }
            let dt = sys
                .delay_matrix()
                .transpose()
                .map(|x| Complex64::new(x, 0.0));
            tail.set_column(m, &(&dt * &head));
        }
    }
    (head, tail)
}

/// Quadrature inner product on the lifted space:
/// `<f, g> = f1 . conj(g1) + sum_i w_i f2(theta_i) . conj(g2(theta_i))`.
pub fn lifted_inner_product(
    gen: &LiftedGeneratorMatrix,
    sys: &ModalSystem,
    a: &DVector<Complex64>,
    gen_b: &LiftedGeneratorMatrix,
    b: &DVector<Complex64>,
) -> Complex64 {
    let (ha, ta) = node_values(gen, a, sys);
    let (hb, tb) = node_values(gen_b, b, sys);
    let mut acc: Complex64 = ha.iter().zip(hb.iter()).map(|(x, y)| x * y.conj()).sum();
    for i in 0..=gen.m_nodes {
        let ci: Complex64 = ta
            .column(i)
            .iter()
            .zip(tb.column(i).iter())
            .map(|(x, y)| x * y.conj())
            .sum();
        acc += ci * gen.weights[i];
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modal::ModalSystem;
    use crate::roots::rightmost_roots;
    use nalgebra::DMatrix;

    fn scalar_benchmark() -> ModalSystem {
        ModalSystem::custom(vec![0.0], DMatrix::identity(1, 1), 1.0, 1.0).unwrap()
    }

    #[test]
    fn cc_weights_integrate_polynomials() {
        let m = 8;
        let nodes = chebyshev_nodes(m);
        let w = clenshaw_curtis_weights(m);
        // Clenshaw-Curtis on m+1 nodes is exact through degree m.
        for p in 0..=m as i32 {
            let q: f64 = nodes.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
            let exact = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
            assert!((q - exact).abs() < 1e-13, "degree {p}: {q} vs {exact}");
        }
    }

    #[test]
    fn diff_matrix_differentiates_polynomials() {
        let m = 10;
        let d = chebyshev_diff_matrix(m);
        let nodes = chebyshev_nodes(m);
        let f = DVector::from_iterator(m + 1, nodes.iter().map(|x| x.powi(4) - 2.0 * x));
        let df = &d * &f;
        for (i, x) in nodes.iter().enumerate() {
            assert!((df[i] - (4.0 * x.powi(3) - 2.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn kappa_zero_head_block_decouples() {
        let sys =
            ModalSystem::custom(vec![-1.0, -2.5, -4.0], DMatrix::identity(3, 3), 0.0, 0.8)
                .unwrap();
        let gen = build_lifted_generator(&sys, 12, NodeScheme::Chebyshev).unwrap();
        let eigs = lifted_spectrum(&gen, 3).unwrap();
        for (e, mu) in eigs.iter().zip(&sys.eigenvalues) {
            assert!((e.re - mu).abs() < 1e-9 && e.im.abs() < 1e-9);
        }
    }

    #[test]
    fn head_to_tail_coupling_entry_is_kappa() {
        let sys = scalar_benchmark();
        let m = 8;
        let gen = build_lifted_generator(&sys, m, NodeScheme::Chebyshev).unwrap();
        assert_eq!(gen.matrix[(0, m)], 1.0);
        let sys2 = ModalSystem::custom(vec![0.0], DMatrix::identity(1, 1), -3.5, 1.0).unwrap();
        let gen2 = build_lifted_generator(&sys2, m, NodeScheme::Chebyshev).unwrap();
        assert_eq!(gen2.matrix[(0, m)], -3.5);
    }

    #[test]
    fn scalar_rightmost_matches_lambert_root() {
        let sys = scalar_benchmark();
        let gen = build_lifted_generator(&sys, 32, NodeScheme::Chebyshev).unwrap();
        let eigs = lifted_spectrum(&gen, 3).unwrap();
        assert!((eigs[0].re - 0.567_143_290_409_783_8).abs() < 1e-6);
        assert!(eigs[0].im.abs() < 1e-6);
        // Next conjugate pair, frozen from the Lambert branches +-1.
        assert!((eigs[1].re - (-1.533_913_319_793_574_5)).abs() < 1e-3);
        assert!((eigs[1].im.abs() - 4.375_185_153_061_898).abs() < 1e-3);
    }

    #[test]
    fn refinement_shrinks_error_with_order_at_least_two() {
        let sys = scalar_benchmark();
        let exact = 0.567_143_290_409_783_8;
        let err = |m: usize| -> f64 {
            let gen = build_lifted_generator(&sys, m, NodeScheme::Chebyshev).unwrap();
            let eigs = lifted_spectrum(&gen, 1).unwrap();
            (eigs[0].re - exact).abs().max(1e-15)
        };
        let (e8, e16) = (err(8), err(16));
        // log-log slope between M = 8 and M = 16.
        let slope = (e8 / e16).log2();
        assert!(slope >= 2.0, "observed order {slope}, errors {e8:e} {e16:e}");
    }

    #[test]
    fn uniform_upwind_converges_coarsely() {
        let sys = scalar_benchmark();
        let gen = build_lifted_generator(&sys, 400, NodeScheme::Uniform).unwrap();
        let eigs = lifted_spectrum(&gen, 1).unwrap();
        assert!((eigs[0].re - 0.567_143_290_409_783_8).abs() < 1e-2);
    }

    #[test]
    fn adjoint_spectrum_is_conjugate_of_primal() {
        let sys = ModalSystem::custom(
            vec![-0.5, -2.0],
            DMatrix::from_row_slice(2, 1, &[1.0, 0.5]),
            0.8,
            0.6,
        )
        .unwrap();
        let gen = build_lifted_generator(&sys, 24, NodeScheme::Chebyshev).unwrap();
        let adj = adjoint_generator(&sys, 24, NodeScheme::Chebyshev).unwrap();
        let e = lifted_spectrum(&gen, 4).unwrap();
        let ea = lifted_spectrum(&adj, 4).unwrap();
        for x in &e {
            let hit = ea.iter().any(|y| (x.conj() - y).norm() < 1e-6);
            assert!(hit, "conjugate of {x} missing from adjoint spectrum {ea:?}");
        }
    }

    #[test]
    fn adjoint_kappa_zero_head_is_diagonal() {
        let sys =
            ModalSystem::custom(vec![-1.0, -3.0], DMatrix::identity(2, 2), 0.0, 0.5).unwrap();
        let adj = adjoint_generator(&sys, 8, NodeScheme::Chebyshev).unwrap();
        assert_eq!(adj.matrix[(0, 0)], -1.0);
        assert_eq!(adj.matrix[(1, 1)], -3.0);
        assert_eq!(adj.matrix[(0, 1)], 0.0);
    }

    #[test]
    fn duality_residual_vanishes_under_refinement() {
        let sys = ModalSystem::custom(vec![-0.7], DMatrix::identity(1, 1), 1.2, 0.9).unwrap();
        let kappa = sys.kappa;
        let residual = |m: usize| -> f64 {
            let gen = build_lifted_generator(&sys, m, NodeScheme::Chebyshev).unwrap();
            let adj = adjoint_generator(&sys, m, NodeScheme::Chebyshev).unwrap();
            // Primal domain element: (v, e^{lambda theta} v); adjoint domain
            // element: (psi, kappa psi e^{s (theta + tau)}).
            let lam = 0.3;
            let s = -0.4;
            let x = {
                let y0 = DVector::from_element(1, Complex64::new(1.0, 0.0));
                let st = embed(
                    &y0,
                    &|t| DVector::from_element(1, Complex64::new((lam * t).exp(), 0.0)),
                    &gen,
                );
                st.to_vector()
            };
            let mut y = DVector::zeros(adj.dim());
            y[0] = Complex64::new(1.0, 0.0);
            for i in 0..m {
                y[1 + i] = Complex64::new(kappa * (s * (adj.nodes[i] + sys.tau)).exp(), 0.0);
            }
            let gx = {
                let mg = gen.matrix.map(|v| Complex64::new(v, 0.0));
                &mg * &x
            };
            let gy = {
                let ma = adj.matrix.map(|v| Complex64::new(v, 0.0));
                &ma * &y
            };
            let lhs = lifted_inner_product(&gen, &sys, &gx, &adj, &y);
            let rhs = lifted_inner_product(&gen, &sys, &x, &adj, &gy);
            (lhs - rhs).norm()
        };
        // The junction row replacement limits the duality defect to the
        // endpoint quadrature weight, so the decay is algebraic, not
        // spectral: second order is what must show up.
        let (r8, r16, r32) = (residual(8), residual(16), residual(32));
        assert!(r16 < r8 && r32 < r16, "residuals {r8:e}, {r16:e}, {r32:e}");
        assert!(r32 < r8 / 8.0);
        assert!(r32 < 1e-3);
    }

    #[test]
    fn embed_constant_history_and_head_roundtrip() {
        let sys =
            ModalSystem::custom(vec![-1.0, -2.0], DMatrix::identity(2, 2), 0.5, 0.7).unwrap();
        let gen = build_lifted_generator(&sys, 8, NodeScheme::Chebyshev).unwrap();
        let y0 = DVector::from_vec(vec![Complex64::new(0.3, 0.0), Complex64::new(-1.5, 0.0)]);
        let c = DVector::from_vec(vec![Complex64::new(2.0, 0.0), Complex64::new(4.0, 0.0)]);
        let st = embed(&y0, &|_t| c.clone(), &gen);
        for i in 0..gen.m_nodes {
            assert_eq!(st.tail.column(i), c.column(0));
        }
        assert_eq!(head(&st), y0);
    }

    #[test]
    fn embed_samples_rejects_mismatch() {
        let sys = scalar_benchmark();
        let gen = build_lifted_generator(&sys, 8, NodeScheme::Chebyshev).unwrap();
        let y0 = DVector::from_element(1, Complex64::new(1.0, 0.0));
        let thetas = vec![-1.0, -0.5, 0.0];
        let values = DMatrix::from_element(1, 2, Complex64::new(1.0, 0.0));
        assert!(embed_samples(&y0, &thetas, &values, &gen).is_err());
    }

    #[test]
    fn eigen_history_is_near_eigenvector() {
        let sys = scalar_benchmark();
        let gen = build_lifted_generator(&sys, 32, NodeScheme::Chebyshev).unwrap();
        let scan = rightmost_roots(0.0, 1.0, 1.0, 1, 1e-12).unwrap();
        let lam = scan.roots[0].value();
        let y0 = DVector::from_element(1, Complex64::new(1.0, 0.0));
        let st = embed(&y0, &|t| DVector::from_element(1, (lam * t).exp()), &gen);
        let x = st.to_vector();
        let mg = gen.matrix.map(|v| Complex64::new(v, 0.0));
        let r = &mg * &x - &x * lam;
        assert!(r.norm() <= 1e-4, "residual {}", r.norm());
    }
}
