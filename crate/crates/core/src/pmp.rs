//! Maximum-principle residual, relaxed forward-backward sweep, and the
//! extremality certificate.

use ndarray::{ArrayView1, Zip};

use crate::adjoint::solve_costate;
use crate::convex::conj_grad_into;
use crate::dynamics::{cost_of_path, evolve_state};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::model::{CostSpec, ModelSpec};
use crate::paths::{ControlPath, CostatePath, StatePath, SweepReport};
use crate::scalar::Scalar;

/// Control given by the maximum principle, `u_k = (h0*)'(-B* pi_k)`.
pub fn mp_control<T: Scalar>(pi: &CostatePath<T>, cost: &CostSpec<T>, grid: &Grid<T>) -> ControlPath<T> {
    let mut u = ControlPath::zeros(grid);
    for k in 0..grid.n_t {
        let row = pi.pi.row(k);
        u.u0[k] = conj_grad_into(row[0], row, cost, -T::one(), u.u1.row_mut(k));
    }
    u
}

/// Discounted L2 distance between `u` and the maximum-principle control of `pi`.
pub fn mp_residual<T: Scalar>(
    u: &ControlPath<T>,
    pi: &CostatePath<T>,
    cost: &CostSpec<T>,
    lambda: T,
    grid: &Grid<T>,
) -> T {
    let target = mp_control(pi, cost, grid);
    discounted_distance(u, &target, lambda, grid)
}

pub(crate) fn discounted_distance<T: Scalar>(
    u: &ControlPath<T>,
    v: &ControlPath<T>,
    lambda: T,
    grid: &Grid<T>,
) -> T {
    let w = grid.weights();
    let mut acc = T::zero();
    for k in 0..grid.n_t {
        let d0 = u.u0[k] - v.u0[k];
        let mut d1 = T::zero();
        Zip::from(u.u1.row(k))
            .and(v.u1.row(k))
            .and(&w)
            .for_each(|&a, &b, &wj| d1 += wj * (a - b) * (a - b));
        acc += grid.discount(k, lambda) * (d0 * d0 + d1) * grid.dt;
    }
    acc.sqrt()
}

/// Output of [`fb_sweep`]: a control with its own state and costate.
#[derive(Debug, Clone)]
pub struct Sweep<T> {
    pub u: ControlPath<T>,
    pub y: StatePath<T>,
    pub pi: CostatePath<T>,
    pub report: SweepReport<T>,
}

/// Relaxed fixed-point iteration `u <- (1 - theta) u + theta (h0*)'(-B* pi(u))`.
///
/// Each entry of the residual history is the maximum-principle residual of
/// the updated control against its own costate, so a converged sweep returns
/// a triple that satisfies the extremal system to `tol`.
pub fn fb_sweep<T: Scalar>(
    x: ArrayView1<T>,
    u_init: &ControlPath<T>,
    spec: &ModelSpec<T>,
    grid: &Grid<T>,
    theta: T,
    tol: T,
    max_iter: usize,
) -> Result<Sweep<T>> {
    if !(theta > T::zero() && theta <= T::one()) {
        return Err(Error::InvalidArgument(format!("relaxation {theta} not in (0, 1]")));
    }
    if !(tol > T::zero()) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    u_init.check(grid)?;
    if let Some(step) = crate::dynamics::first_infeasible(u_init, spec) {
        return Err(Error::Infeasible { step });
    }

    let mut u = u_init.clone();
    let mut y = evolve_state(x, &u, spec, grid)?;
    let mut pi = solve_costate(&y, spec, grid)?;
    let mut history = Vec::new();
    let mut converged = false;
    while history.len() < max_iter {
        let target = mp_control(&pi, &spec.cost, grid);
        u = u.blend(theta, &target);
        y = evolve_state(x, &u, spec, grid)?;
        pi = solve_costate(&y, spec, grid)?;
        let r = mp_residual(&u, &pi, &spec.cost, spec.lambda, grid);
        history.push(r);
        if r <= tol {
            converged = true;
            break;
        }
        if !r.is_finite() {
            break;
        }
    }
    let final_cost = cost_of_path(&y, &u, spec, grid);
    Ok(Sweep {
        u,
        y,
        pi,
        report: SweepReport {
            iterations: history.len(),
            residual_history: history,
            converged,
            final_cost,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremalityCertificate<T> {
    /// Max deviation of `y` from the state generated by `u` from `y(t0)`.
    pub state_residual: T,
    /// Max deviation of `pi` from the costate of `y`.
    pub costate_residual: T,
    pub mp_residual: T,
    /// `|pi(T)|` in L2.
    pub transversality_norm: T,
    pub is_extremal: bool,
}

/// Check the state, costate, transversality and maximum-principle
/// conditions of a candidate triple.
pub fn extremality_certificate<T: Scalar>(
    u: &ControlPath<T>,
    y: &StatePath<T>,
    pi: &CostatePath<T>,
    spec: &ModelSpec<T>,
    grid: &Grid<T>,
    tol: T,
) -> Result<ExtremalityCertificate<T>> {
    u.check(grid)?;
    y.check(grid)?;
    pi.check(grid)?;
    let fresh_y = evolve_state(y.y.row(0), u, spec, grid)?;
    let state_residual = max_abs_diff(y.y.iter(), fresh_y.y.iter())
        .max(max_abs_diff(y.averaged.iter(), fresh_y.averaged.iter()));
    let fresh_pi = solve_costate(y, spec, grid)?;
    let costate_residual = max_abs_diff(pi.pi.iter(), fresh_pi.pi.iter());
    let mp = mp_residual(u, pi, &spec.cost, spec.lambda, grid);
    let transversality_norm = grid.l2_norm(pi.pi.row(grid.n_t));
    let is_extremal = [state_residual, costate_residual, mp, transversality_norm]
        .iter()
        .all(|&r| r <= tol);
    Ok(ExtremalityCertificate {
        state_residual,
        costate_residual,
        mp_residual: mp,
        transversality_norm,
        is_extremal,
    })
}

fn max_abs_diff<'a, T: Scalar>(a: impl Iterator<Item = &'a T>, b: impl Iterator<Item = &'a T>) -> T {
    a.zip(b).fold(T::zero(), |m, (x, y)| {
        let d = (*x - *y).abs();
        // NaN must not pass as zero
        if d > m || d.is_nan() {
            d
        } else {
            m
        }
    })
}
