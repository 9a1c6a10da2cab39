//! Closed-loop simulation driven by a value-gradient map.

use ndarray::{Array2, ArrayView1, Axis};

use crate::convex::conj_grad_into;
use crate::dynamics::step;
use crate::error::{Error, Result};
use crate::grid::{AgeProfile, Grid};
use crate::model::{AgeFunction, ModelSpec, RevenueSpec};
use crate::paths::{ControlPath, StatePath};
use crate::scalar::Scalar;

/// Simulate `u_k = (h0*)'(-B* gradient_map(y_k))` step by step.
pub fn closed_loop_simulate<T, F>(
    x: ArrayView1<T>,
    gradient_map: F,
    spec: &ModelSpec<T>,
    grid: &Grid<T>,
) -> Result<(StatePath<T>, ControlPath<T>)>
where
    T: Scalar,
    F: Fn(ArrayView1<T>) -> AgeProfile<T>,
{
    grid.check_profile("initial state", x)?;
    let nodes = grid.nodes();
    let a = (-spec.mu * grid.dt).exp();
    let mut u = ControlPath::zeros(grid);
    let mut y = Array2::zeros((grid.n_t + 1, nodes));
    let mut averaged = Array2::zeros((grid.n_t, nodes));
    y.row_mut(0).assign(&x);
    for k in 0..grid.n_t {
        let (done, mut rest) = y.view_mut().split_at(Axis(0), k + 1);
        let state = done.row(k);
        let grad = gradient_map(state);
        grid.check_profile("gradient map output", grad.view())?;
        u.u0[k] = conj_grad_into(grad[0], grad.view(), &spec.cost, -T::one(), u.u1.row_mut(k));
        step(
            state,
            u.u0[k],
            u.u1.row(k),
            a,
            grid.dt,
            averaged.row_mut(k),
            rest.row_mut(0),
        );
    }
    Ok((StatePath { y, averaged }, u))
}

/// Closed-form value gradient for linear revenue, which does not depend on
/// the state: `pi(s) = -rho int_s^sbar alpha(r) exp(-(lambda+mu)(r-s)) dr`.
pub fn stationary_gradient_map<T: Scalar>(spec: &ModelSpec<T>, grid: &Grid<T>) -> Result<AgeProfile<T>> {
    let rho = match spec.revenue {
        RevenueSpec::Linear { rho } => rho,
        _ => return Err(Error::NoClosedForm("revenue is not linear")),
    };
    let r = spec.costate_rate();
    let (c0, c1) = match spec.alpha {
        AgeFunction::Constant { value } => (value, T::zero()),
        AgeFunction::Affine { intercept, slope } => (intercept, slope),
        AgeFunction::Table { .. } => return Err(Error::NoClosedForm("tabulated alpha")),
    };
    Ok(AgeProfile::from_fn(grid, |s| {
        let len = spec.sbar - s;
        let e = (-r * len).exp();
        let flat = (c0 + c1 * s) * (T::one() - e) / r;
        let ramp = c1 * (T::one() - e * (T::one() + r * len)) / (r * r);
        -rho * (flat + ramp)
    }))
}
