//! Forward state evolution along characteristics.
//!
//! With `dt == ds` each step shifts the profile by one age node and decays it
//! by `a = exp(-mu dt)`. Controls enter through the source
//! `f = u1 + u0 * delta_0`, where the discrete delta carries the trapezoid
//! weight of node 0; the source is integrated along each characteristic over
//! the step. Nodes hold the state at time levels, and the running cost reads
//! the step average of the state along each characteristic.

use ndarray::{Array1, Array2, ArrayView1, ArrayViewMut1, Axis};

use crate::convex::StageCost;
use crate::error::{Error, Result};
use crate::grid::{AgeProfile, Grid};
use crate::model::ModelSpec;
use crate::paths::{ControlPath, StatePath};
use crate::scalar::Scalar;

/// `exp(k dt A0) f`: shift by `k` nodes with decay, zero inflow at `s = 0`.
///
/// The one-step factor is applied `k` times, as in [`evolve_state`], so
/// composition is exact in floating point.
pub fn semigroup_apply<T: Scalar>(f: ArrayView1<T>, k: usize, mu: T, grid: &Grid<T>) -> AgeProfile<T> {
    let a = (-mu * grid.dt).exp();
    Array1::from_shape_fn(f.len(), |j| {
        if j < k {
            return T::zero();
        }
        (0..k).fold(f[j - k], |v, _| a * v)
    })
    .into()
}

/// One time step. Writes the step average into `avg` and the next node
/// values into `next`.
#[inline]
pub(crate) fn step<T: Scalar>(
    z: ArrayView1<T>,
    u0: T,
    u1: ArrayView1<T>,
    a: T,
    dt: T,
    mut avg: ArrayViewMut1<T>,
    mut next: ArrayViewMut1<T>,
) {
    let n = z.len() - 1;
    let half = T::lit(0.5) * dt;
    avg[0] = u0 + half * u1[0];
    for j in 1..n {
        avg[j] = z[j] + half * u1[j];
    }
    avg[n] = z[n];
    next[0] = u0;
    next[1] = a * avg[0];
    for j in 2..=n {
        next[j] = a * (z[j - 1] + dt * u1[j - 1]);
    }
}

/// State path from the initial profile `x` under the controls `u`.
pub fn evolve_state<T: Scalar>(
    x: ArrayView1<T>,
    u: &ControlPath<T>,
    spec: &ModelSpec<T>,
    grid: &Grid<T>,
) -> Result<StatePath<T>> {
    grid.check_profile("initial state", x)?;
    u.check(grid)?;
    let nodes = grid.nodes();
    let mut y = Array2::zeros((grid.n_t + 1, nodes));
    let mut averaged = Array2::zeros((grid.n_t, nodes));
    y.row_mut(0).assign(&x);
    let a = (-spec.mu * grid.dt).exp();
    for k in 0..grid.n_t {
        let (done, mut rest) = y.view_mut().split_at(Axis(0), k + 1);
        step(
            done.row(k),
            u.u0[k],
            u.u1.row(k),
            a,
            grid.dt,
            averaged.row_mut(k),
            rest.row_mut(0),
        );
    }
    Ok(StatePath { y, averaged })
}

/// Output rate `Q(t_k) = int alpha y(t_k)` at every time level.
pub fn output_path<T: Scalar>(y: &StatePath<T>, spec: &ModelSpec<T>, grid: &Grid<T>) -> Vec<T> {
    let sc = StageCost::new(spec, grid);
    y.y.rows().into_iter().map(|row| sc.output(row)).collect()
}

/// Step index of the first control outside the box, if any.
pub(crate) fn first_infeasible<T: Scalar>(u: &ControlPath<T>, spec: &ModelSpec<T>) -> Option<usize> {
    let (lo0, hi0) = spec.cost.u0_bounds();
    let (lo1, hi1) = spec.cost.u1_bounds();
    (0..u.n_t()).find(|&k| {
        let v0 = u.u0[k];
        !(lo0 <= v0 && v0 <= hi0) || u.u1.row(k).iter().any(|&v| !(lo1 <= v && v <= hi1))
    })
}

/// Discounted cost of the trajectory, given its already computed state.
pub(crate) fn cost_of_path<T: Scalar>(
    y: &StatePath<T>,
    u: &ControlPath<T>,
    spec: &ModelSpec<T>,
    grid: &Grid<T>,
) -> T {
    let sc = StageCost::new(spec, grid);
    let mut total = T::zero();
    for k in 0..grid.n_t {
        let h = sc.h0(u.u0[k], u.u1.row(k));
        if h == T::infinity() {
            return h;
        }
        total += grid.discount(k, spec.lambda) * grid.dt * (sc.g0(y.averaged.row(k)) + h);
    }
    total
}

/// Discounted cost `J(x; u)` over the truncated horizon; `+inf` if any
/// control leaves the box.
pub fn cost_functional<T: Scalar>(
    x: ArrayView1<T>,
    u: &ControlPath<T>,
    spec: &ModelSpec<T>,
    grid: &Grid<T>,
) -> Result<T> {
    if first_infeasible(u, spec).is_some() {
        return Ok(T::infinity());
    }
    let y = evolve_state(x, u, spec, grid)?;
    Ok(cost_of_path(&y, u, spec, grid))
}

/// Like [`cost_functional`] but infeasibility is an error.
pub(crate) fn feasible_cost<T: Scalar>(
    x: ArrayView1<T>,
    u: &ControlPath<T>,
    spec: &ModelSpec<T>,
    grid: &Grid<T>,
) -> Result<T> {
    if let Some(step) = first_infeasible(u, spec) {
        return Err(Error::Infeasible { step });
    }
    cost_functional(x, u, spec, grid)
}
