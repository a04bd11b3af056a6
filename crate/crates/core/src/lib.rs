//! Existence boundary of monotone travelling waves for the generalised
//! Rosenau-KdV equation
//!
//! ```text
//! u_t + f(u)_x = eps (u_x / (1 + u_x^2)^alpha)_x + delta u_xxx
//! ```
//!
//! Waves `u(x - lambda t)` reduce to a planar system in `(v, w = v')`.
//! [`shooting`] launches the unstable manifold of the saddle `(u_-, 0)` and
//! bisects on the minimal viscosity `eps_min(alpha, delta)` admitting a
//! monotone connection; [`model`] and [`singular`] hold the closed forms
//! used to check it.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod model;
pub mod ode;
pub mod optimize;
pub mod poly;
pub mod shooting;
pub mod singular;

pub use error::{Error, Result};
pub use model::{validate_problem, BoundsReport, EigenData, FluxKind, FluxSpec, WaveProblem};
pub use ode::{integrate, Event, EventKind, IntegratorConfig, Orbit, PhaseState, Termination};
pub use shooting::{
    boundary_curve, eps_min, launch_state, shoot, BisectionResult, Classification, CurvePoint,
    ShootConfig, ShootResult,
};
pub use singular::{
    branch_solve, eps_star, hadeler_rothe, z0_profile, SingularBranches, SingularProfile,
};
