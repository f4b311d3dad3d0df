//! Rapid stabilization of delayed linear parabolic systems with
//! instantaneous-valued feedback.
//!
//! The library works on finite modal truncations of
//!
//! ```text
//! y'(t) = A y(t) + kappa y(t - tau) + B u(t)
//! ```
//!
//! and provides, end to end:
//!
//! - model builders for the Dirichlet interior-control and Neumann
//!   boundary-control heat equations ([`modal`]),
//! - certified characteristic roots `lambda = mu + kappa e^{-lambda tau}`
//!   through Lambert-W branch enumeration ([`roots`]),
//! - a Chebyshev collocation of the product-space lifting of the delay
//!   equation and its adjoint, cross-validated against the characteristic
//!   roots ([`lift`]),
//! - feedback synthesis at any requested exponential decay rate: spectral
//!   split with explicit margins, Hautus check, Riccati placement of the
//!   unstable block, and the two-phase localized law ([`synthesis`]),
//! - method-of-steps simulation with exact modal exponentials, a Picard
//!   fixed-point oracle, and decay-rate estimation ([`simulate`]),
//! - a scenario harness and the `delaystab` command line tool
//!   ([`scenario`], [`cli`]).
//!
//! Run `cargo run --example rapid_interior` for the flagship demonstration:
//! an unstable delayed heat equation driven to decay rates 1 through 8 by
//! feedback that reads only the current state, never the history.

pub mod cli;
pub mod error;
pub mod interval;
pub mod lift;
pub mod modal;
pub mod roots;
pub mod scenario;
pub mod simulate;
pub mod synthesis;

pub use error::{Error, Result};
pub use interval::IntervalSet;
pub use modal::{
    build_interior_model, build_localized_interior_model, build_neumann_boundary_model,
    check_assumptions, AssumptionReport, BasisTag, ModalSystem,
};
pub use roots::{
    branch_seed, lambert_w, rightmost_roots, solve_preimage, spectral_abscissa, AbscissaReport,
    CharRoot, PreimageQuery, RootScan,
};
