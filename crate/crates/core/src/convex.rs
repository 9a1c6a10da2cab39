//! Running costs `h0` and `g0`, the conjugate `h0*` with its gradient, and
//! the adjoint `B*` of the control operator `B(u0, u1) = u1 + u0 * delta_0`.

use ndarray::{Array1, ArrayView1, ArrayViewMut1, Zip};

use crate::grid::{AgeProfile, Grid};
use crate::model::{CostSpec, ModelSpec, RevenueSpec};
use crate::scalar::{clamp, Scalar};

/// Dual of a control: `z0` pairs with `u0`, `z1` with `u1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualControl<T> {
    pub z0: T,
    pub z1: AgeProfile<T>,
}

/// `h0(u0, u1)`; `+inf` outside the control box.
pub fn h0_value<T: Scalar>(u0: T, u1: ArrayView1<T>, cost: &CostSpec<T>, grid: &Grid<T>) -> T {
    let (lo0, hi0) = cost.u0_bounds();
    let (lo1, hi1) = cost.u1_bounds();
    if !(lo0 <= u0 && u0 <= hi0) || u1.iter().any(|&v| !(lo1 <= v && v <= hi1)) {
        return T::infinity();
    }
    let half = T::lit(0.5);
    half * cost.gamma0() * u0 * u0 + half * cost.gamma1() * grid.inner(u1, u1)
}

/// `(h0*)'(z)`: the pointwise maximizer of `<z, u> - h0(u)`.
pub fn h0_conj_grad<T: Scalar>(z: &DualControl<T>, cost: &CostSpec<T>) -> (T, AgeProfile<T>) {
    let mut u1 = Array1::zeros(z.z1.len());
    let u0 = conj_grad_into(z.z0, z.z1.view(), cost, T::one(), u1.view_mut());
    (u0, u1.into())
}

/// Writes `(h0*)'(sign * z)` into `u1` and returns its boundary part.
pub(crate) fn conj_grad_into<T: Scalar>(
    z0: T,
    z1: ArrayView1<T>,
    cost: &CostSpec<T>,
    sign: T,
    mut u1: ArrayViewMut1<T>,
) -> T {
    let (lo0, hi0) = cost.u0_bounds();
    let (lo1, hi1) = cost.u1_bounds();
    let (g0, g1) = (cost.gamma0(), cost.gamma1());
    Zip::from(&mut u1)
        .and(&z1)
        .for_each(|u, &z| *u = clamp(sign * z / g1, lo1, hi1));
    clamp(sign * z0 / g0, lo0, hi0)
}

/// `h0*(z) = sup_u <z, u> - h0(u)`, in closed form.
pub fn h0_conj_value<T: Scalar>(z: &DualControl<T>, cost: &CostSpec<T>, grid: &Grid<T>) -> T {
    let (lo0, hi0) = cost.u0_bounds();
    let (lo1, hi1) = cost.u1_bounds();
    let c0 = conj_1d(z.z0, cost.gamma0(), lo0, hi0);
    let c1 = z.z1.mapv(|v| conj_1d(v, cost.gamma1(), lo1, hi1));
    c0 + grid.integrate(c1.view())
}

fn conj_1d<T: Scalar>(z: T, gamma: T, lo: T, hi: T) -> T {
    let u = clamp(z / gamma, lo, hi);
    z * u - T::lit(0.5) * gamma * u * u
}

/// `g0(x) = -R(Q)` with the output rate `Q = int alpha x`.
pub fn g0_value<T: Scalar>(x: ArrayView1<T>, spec: &ModelSpec<T>, grid: &Grid<T>) -> T {
    StageCost::new(spec, grid).g0(x)
}

/// Riesz representative of `g0'(x)`, the profile `-R'(Q) alpha`.
pub fn g0_grad<T: Scalar>(x: ArrayView1<T>, spec: &ModelSpec<T>, grid: &Grid<T>) -> AgeProfile<T> {
    let sc = StageCost::new(spec, grid);
    let mut out = Array1::zeros(x.len());
    sc.g0_grad_into(x, out.view_mut());
    out.into()
}

/// `B* pi = (pi(0), pi)`.
pub fn b_star<T: Scalar>(pi_slice: ArrayView1<T>) -> DualControl<T> {
    DualControl {
        z0: pi_slice[0],
        z1: pi_slice.to_owned().into(),
    }
}

/// Per-step cost data with `alpha` sampled once.
#[derive(Debug, Clone)]
pub(crate) struct StageCost<'a, T> {
    pub alpha: Array1<T>,
    alpha_w: Array1<T>,
    pub revenue: &'a RevenueSpec<T>,
    pub cost: &'a CostSpec<T>,
    grid: &'a Grid<T>,
}

impl<'a, T: Scalar> StageCost<'a, T> {
    pub fn new(spec: &'a ModelSpec<T>, grid: &'a Grid<T>) -> Self {
        let alpha = spec.alpha.sample(grid).into_inner();
        let alpha_w = &alpha * &grid.weights();
        StageCost {
            alpha,
            alpha_w,
            revenue: &spec.revenue,
            cost: &spec.cost,
            grid,
        }
    }

    pub fn output(&self, x: ArrayView1<T>) -> T {
        self.alpha_w.dot(&x)
    }

    pub fn g0(&self, x: ArrayView1<T>) -> T {
        -self.revenue.value(self.output(x))
    }

    pub fn g0_grad_into(&self, x: ArrayView1<T>, mut out: ArrayViewMut1<T>) {
        let slope = -self.revenue.slope(self.output(x));
        Zip::from(&mut out)
            .and(&self.alpha)
            .for_each(|o, &a| *o = slope * a);
    }

    pub fn h0(&self, u0: T, u1: ArrayView1<T>) -> T {
        h0_value(u0, u1, self.cost, self.grid)
    }
}
