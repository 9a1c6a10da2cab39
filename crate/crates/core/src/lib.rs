//! Optimal investment in vintage capital via the Pontryagin maximum principle.
//!
//! The state `y(t, s)` is the stock of capital of age `s`, transported by
//! `y_t + y_s + mu y = u1` with boundary inflow `y(t, 0) = u0`. The solver
//! minimizes the discounted cost `J = int e^{-lambda t} (g0(y) + h0(u)) dt`
//! with `g0(y) = -R(int alpha y)` by forward-backward sweep on the extremal
//! system, and cross-checks the result with a direct optimizer, a feedback
//! simulation and the costate/value-gradient identity.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases cover the common case.

// `!(a < b)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adjoint;
pub mod config;
pub mod convex;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod feedback;
pub mod grid;
pub mod model;
pub mod oracle;
pub mod output;
pub mod paths;
pub mod pmp;
pub mod scalar;
pub mod scenario;

pub use adjoint::{adjoint_semigroup_apply, costate_discounted_norm, solve_costate};
pub use convex::{b_star, g0_grad, g0_value, h0_conj_grad, h0_conj_value, h0_value, DualControl};
pub use diagnostics::discounted_lp_norm;
pub use dynamics::{cost_functional, evolve_state, output_path, semigroup_apply};
pub use error::{Error, Result};
pub use feedback::{closed_loop_simulate, stationary_gradient_map};
pub use grid::{make_grid, AgeProfile, Grid};
pub use model::{truncation_horizon, validate_model, AgeFunction, CostSpec, ModelSpec, RevenueSpec};
pub use oracle::{
    cost_gradient_fd, direct_optimize, direct_optimize_with, value_at, value_at_with,
    value_gradient_check, DirectOptions, DirectSolution, GradientMode, ValueGradientCheck,
};
pub use paths::{ControlPath, CostatePath, StatePath, SweepReport};
pub use pmp::{extremality_certificate, fb_sweep, mp_control, mp_residual, ExtremalityCertificate, Sweep};
pub use scalar::Scalar;

pub type ModelSpec64 = ModelSpec<f64>;
pub type Grid64 = Grid<f64>;
pub type AgeProfile64 = AgeProfile<f64>;
pub type ControlPath64 = ControlPath<f64>;
pub type StatePath64 = StatePath<f64>;
pub type CostatePath64 = CostatePath<f64>;

pub type ModelSpec32 = ModelSpec<f32>;
pub type Grid32 = Grid<f32>;
