//! Direct optimization of the discretized cost, used as ground truth for
//! the sweep, plus the value function and its directional derivative.

use ndarray::{Array1, Array2, ArrayView1, Zip};
use rayon::prelude::*;

use crate::adjoint::solve_costate;
use crate::convex::StageCost;
use crate::dynamics::{cost_of_path, evolve_state, feasible_cost, step};
use crate::error::{Error, Result};
use crate::grid::{AgeProfile, Grid};
use crate::model::ModelSpec;
use crate::paths::{ControlPath, StatePath};
use crate::pmp::fb_sweep;
use crate::scalar::Scalar;

/// Central difference `(J(u + eps v) - J(u - eps v)) / (2 eps)`.
pub fn cost_gradient_fd<T: Scalar>(
    x: ArrayView1<T>,
    u: &ControlPath<T>,
    spec: &ModelSpec<T>,
    grid: &Grid<T>,
    v: &ControlPath<T>,
    eps: T,
) -> Result<T> {
    if !(eps > T::zero()) {
        return Err(Error::InvalidArgument(format!("step {eps} must be positive")));
    }
    v.check(grid)?;
    let plus = feasible_cost(x, &u.add_scaled(eps, v), spec, grid)?;
    let minus = feasible_cost(x, &u.add_scaled(-eps, v), spec, grid)?;
    Ok((plus - minus) / (eps + eps))
}

/// How [`direct_optimize`] obtains gradients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientMode {
    /// Central differences of the cost, one coordinate at a time. Shares no
    /// code with the costate solver.
    BlockFiniteDifference,
    /// Costate-based gradient. Fast, but not independent of the sweep.
    Adjoint,
}

impl GradientMode {
    pub fn is_independent(self) -> bool {
        matches!(self, GradientMode::BlockFiniteDifference)
    }

    pub fn name(self) -> &'static str {
        match self {
            GradientMode::BlockFiniteDifference => "block_fd",
            GradientMode::Adjoint => "adjoint",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectOptions<T> {
    /// Stop when the projected-gradient norm drops to this value.
    pub tol: T,
    pub max_iter: usize,
    pub gradient: GradientMode,
    /// Relative finite-difference step.
    pub fd_eps: T,
}

impl<T: Scalar> DirectOptions<T> {
    pub fn new(tol: T, max_iter: usize) -> Self {
        DirectOptions {
            tol,
            max_iter,
            gradient: GradientMode::BlockFiniteDifference,
            fd_eps: T::lit(1e-4),
        }
    }

    pub fn adjoint(self) -> Self {
        DirectOptions {
            gradient: GradientMode::Adjoint,
            ..self
        }
    }
}

#[derive(Debug, Clone)]
pub struct DirectSolution<T> {
    pub u: ControlPath<T>,
    pub cost: T,
    pub iterations: usize,
    /// Projected-gradient norm at `u`, in the discounted L2 metric.
    pub stationarity: T,
    pub converged: bool,
    pub gradient: GradientMode,
}

/// Minimize the discretized cost from `u = 0` with finite-difference gradients.
pub fn direct_optimize<T: Scalar>(
    x: ArrayView1<T>,
    spec: &ModelSpec<T>,
    grid: &Grid<T>,
    tol: T,
    max_iter: usize,
) -> Result<DirectSolution<T>> {
    direct_optimize_with(x, spec, grid, &DirectOptions::new(tol, max_iter))
}

/// Spectral projected gradient: Barzilai-Borwein step lengths with a
/// nonmonotone Armijo search along the projected direction.
///
/// Steps are scaled by the inverse of the quadratic part of the cost in the
/// discounted metric, and the first trial length is one, so for linear
/// revenue the first step lands on the minimizer.
pub fn direct_optimize_with<T: Scalar>(
    x: ArrayView1<T>,
    spec: &ModelSpec<T>,
    grid: &Grid<T>,
    opts: &DirectOptions<T>,
) -> Result<DirectSolution<T>> {
    grid.check_profile("initial state", x)?;
    if !(opts.tol > T::zero()) {
        return Err(Error::InvalidArgument(format!("tolerance {} must be positive", opts.tol)));
    }
    let armijo = T::lit(1e-4);
    let (t_min, t_max) = (T::lit(1e-10), T::lit(1e10));
    const MEMORY: usize = 10;
    let w = grid.weights();
    let (g0, g1) = (spec.cost.gamma0(), spec.cost.gamma1());
    // metric weights without the cost curvature
    let m0 = Array1::from_shape_fn(grid.n_t, |k| grid.discount(k, spec.lambda) * grid.dt);
    let m1 = Array2::from_shape_fn((grid.n_t, grid.nodes()), |(k, j)| m0[k] * w[j]);
    let (p0, p1) = (&m0 * g0, &m1 * g1);

    let mut u = ControlPath::zeros(grid);
    let mut y = evolve_state(x, &u, spec, grid)?;
    let mut cost = cost_of_path(&y, &u, spec, grid);
    let mut recent = std::collections::VecDeque::from([cost]);
    let mut prev: Option<(ControlPath<T>, ControlPath<T>)> = None;
    let mut t = T::one();
    let mut iterations = 0;
    loop {
        let grad = match opts.gradient {
            GradientMode::BlockFiniteDifference => block_fd_gradient(&y, &u, spec, grid, opts.fd_eps),
            GradientMode::Adjoint => adjoint_gradient(&y, &u, spec, grid)?,
        };
        let dir = ControlPath {
            u0: &grad.u0 / &p0,
            u1: &grad.u1 / &p1,
        };
        let stationarity = metric_distance(&u, &u.add_scaled(-T::one(), &dir).project(&spec.cost), &m0, &m1);
        if stationarity <= opts.tol || iterations >= opts.max_iter {
            return Ok(DirectSolution {
                u,
                cost,
                iterations,
                stationarity,
                converged: stationarity <= opts.tol,
                gradient: opts.gradient,
            });
        }
        iterations += 1;

        if let Some((u_old, g_old)) = prev.take() {
            let s = u.add_scaled(-T::one(), &u_old);
            let curvature = dot(&grad, &s) - dot(&g_old, &s);
            let ss = metric_norm(&s, &p0, &p1);
            t = if curvature > T::zero() {
                (ss / curvature).max(t_min).min(t_max)
            } else {
                T::one()
            };
        }
        let d = u.add_scaled(-t, &dir).project(&spec.cost).add_scaled(-T::one(), &u);
        let slope = dot(&grad, &d);
        let reference = recent.iter().copied().fold(T::neg_infinity(), T::max);

        let mut step_len = T::one();
        let mut accepted = None;
        for _ in 0..60 {
            let cand = u.add_scaled(step_len, &d).project(&spec.cost);
            let cand_y = evolve_state(x, &cand, spec, grid)?;
            let cand_cost = cost_of_path(&cand_y, &cand, spec, grid);
            if cand_cost <= reference + armijo * step_len * slope {
                accepted = Some((cand, cand_y, cand_cost));
                break;
            }
            step_len *= T::lit(0.5);
        }
        match accepted {
            Some((cand, cand_y, cand_cost)) => {
                prev = Some((std::mem::replace(&mut u, cand), grad));
                y = cand_y;
                cost = cand_cost;
                recent.push_back(cost);
                if recent.len() > MEMORY {
                    recent.pop_front();
                }
            }
            None => {
                // no decrease at any step length: round-off floor reached
                return Ok(DirectSolution {
                    u,
                    cost,
                    iterations,
                    stationarity,
                    converged: false,
                    gradient: opts.gradient,
                });
            }
        }
    }
}

/// Plain coordinate pairing.
fn dot<T: Scalar>(a: &ControlPath<T>, b: &ControlPath<T>) -> T {
    let mut acc = T::zero();
    Zip::from(&a.u0).and(&b.u0).for_each(|&p, &q| acc += p * q);
    Zip::from(&a.u1).and(&b.u1).for_each(|&p, &q| acc += p * q);
    acc
}

/// Squared norm with diagonal weights.
fn metric_norm<T: Scalar>(a: &ControlPath<T>, m0: &Array1<T>, m1: &Array2<T>) -> T {
    let mut acc = T::zero();
    Zip::from(&a.u0).and(m0).for_each(|&p, &m| acc += m * p * p);
    Zip::from(&a.u1).and(m1).for_each(|&p, &m| acc += m * p * p);
    acc
}

fn metric_distance<T: Scalar>(a: &ControlPath<T>, b: &ControlPath<T>, m0: &Array1<T>, m1: &Array2<T>) -> T {
    metric_norm(&a.add_scaled(-T::one(), b), m0, m1).sqrt()
}

/// Gradient of the cost from the costate.
pub fn adjoint_gradient<T: Scalar>(
    y: &StatePath<T>,
    u: &ControlPath<T>,
    spec: &ModelSpec<T>,
    grid: &Grid<T>,
) -> Result<ControlPath<T>> {
    let pi = solve_costate(y, spec, grid)?;
    let w = grid.weights();
    let (g0, g1) = (spec.cost.gamma0(), spec.cost.gamma1());
    let mut grad = ControlPath::zeros(grid);
    for k in 0..grid.n_t {
        let m = grid.discount(k, spec.lambda) * grid.dt;
        grad.u0[k] = m * (g0 * u.u0[k] + pi.pi[[k, 0]]);
        Zip::from(grad.u1.row_mut(k))
            .and(u.u1.row(k))
            .and(pi.pi.row(k))
            .and(&w)
            .for_each(|g, &v, &p, &wj| *g = m * wj * (g1 * v + p));
    }
    Ok(grad)
}

/// Gradient by central differences of the cost, coordinate by coordinate.
///
/// A perturbation of the control at step `k` only changes the state from
/// step `k` on, so each difference re-propagates from the stored state at
/// step `k` and stops as soon as the perturbed state coincides with the
/// stored one. Differences of `h0` use its quadratic extension beyond the
/// box, which agrees with the cost on the feasible set.
pub fn block_fd_gradient<T: Scalar>(
    y: &StatePath<T>,
    u: &ControlPath<T>,
    spec: &ModelSpec<T>,
    grid: &Grid<T>,
    rel_eps: T,
) -> ControlPath<T> {
    let sc = StageCost::new(spec, grid);
    let a = (-spec.mu * grid.dt).exp();
    let base_g: Vec<T> = (0..grid.n_t).map(|k| sc.g0(y.averaged.row(k))).collect();
    let disc: Vec<T> = (0..grid.n_t)
        .map(|k| grid.discount(k, spec.lambda) * grid.dt)
        .collect();
    let (g0, g1) = (spec.cost.gamma0(), spec.cost.gamma1());
    let half = T::lit(0.5);
    let w = grid.weights();
    let nodes = grid.nodes();

    let blocks: Vec<(T, Array1<T>)> = (0..grid.n_t)
        .into_par_iter()
        .map(|k| {
            let mut scratch = Scratch::new(nodes);
            let ctx = FdContext {
                y,
                u,
                sc: &sc,
                a,
                dt: grid.dt,
                base_g: &base_g,
                disc: &disc,
            };
            let u0k = u.u0[k];
            let eps0 = rel_eps * T::one().max(u0k.abs());
            let dg = |s: &mut Scratch<T>, d: T| {
                let row = u.u1.row(k);
                ctx.delta_g(k, u0k + d, row, s)
            };
            let plus = dg(&mut scratch, eps0);
            let minus = dg(&mut scratch, -eps0);
            // quadratic h0: difference of g0 u0^2/2 is exact in closed form
            let dh = half * g0 * ((u0k + eps0) * (u0k + eps0) - (u0k - eps0) * (u0k - eps0));
            let grad0 = (plus - minus + disc[k] * dh) / (eps0 + eps0);

            let mut row = u.u1.row(k).to_owned();
            let grad1 = Array1::from_shape_fn(nodes, |j| {
                let v = row[j];
                let eps = rel_eps * T::one().max(v.abs());
                row[j] = v + eps;
                let plus = ctx.delta_g(k, u0k, row.view(), &mut scratch);
                row[j] = v - eps;
                let minus = ctx.delta_g(k, u0k, row.view(), &mut scratch);
                row[j] = v;
                let dh = half * g1 * w[j] * ((v + eps) * (v + eps) - (v - eps) * (v - eps));
                (plus - minus + disc[k] * dh) / (eps + eps)
            });
            (grad0, grad1)
        })
        .collect();

    let mut grad = ControlPath::zeros(grid);
    for (k, (g0k, g1k)) in blocks.into_iter().enumerate() {
        grad.u0[k] = g0k;
        grad.u1.row_mut(k).assign(&g1k);
    }
    grad
}

struct Scratch<T> {
    cur: Array1<T>,
    next: Array1<T>,
    avg: Array1<T>,
}

impl<T: Scalar> Scratch<T> {
    fn new(n: usize) -> Self {
        Scratch {
            cur: Array1::zeros(n),
            next: Array1::zeros(n),
            avg: Array1::zeros(n),
        }
    }
}

struct FdContext<'a, T> {
    y: &'a StatePath<T>,
    u: &'a ControlPath<T>,
    sc: &'a StageCost<'a, T>,
    a: T,
    dt: T,
    base_g: &'a [T],
    disc: &'a [T],
}

impl<T: Scalar> FdContext<'_, T> {
    /// Change of the discounted state cost when the control at step `k` is
    /// replaced by `(u0, u1)`.
    fn delta_g(&self, k: usize, u0: T, u1: ArrayView1<T>, s: &mut Scratch<T>) -> T {
        let n_t = self.base_g.len();
        step(self.y.y.row(k), u0, u1, self.a, self.dt, s.avg.view_mut(), s.next.view_mut());
        let mut delta = self.disc[k] * (self.sc.g0(s.avg.view()) - self.base_g[k]);
        let mut m = k + 1;
        while m < n_t {
            std::mem::swap(&mut s.cur, &mut s.next);
            if s.cur == self.y.y.row(m) {
                break;
            }
            step(
                s.cur.view(),
                self.u.u0[m],
                self.u.u1.row(m),
                self.a,
                self.dt,
                s.avg.view_mut(),
                s.next.view_mut(),
            );
            delta += self.disc[m] * (self.sc.g0(s.avg.view()) - self.base_g[m]);
            m += 1;
        }
        delta
    }
}

/// Discrete value `Psi(x)` at the model's initial time.
pub fn value_at<T: Scalar>(x: ArrayView1<T>, spec: &ModelSpec<T>, grid: &Grid<T>, tol: T) -> Result<T> {
    value_at_with(x, spec, grid, &DirectOptions::new(tol, 1000))
}

pub fn value_at_with<T: Scalar>(
    x: ArrayView1<T>,
    spec: &ModelSpec<T>,
    grid: &Grid<T>,
    opts: &DirectOptions<T>,
) -> Result<T> {
    Ok(direct_optimize_with(x, spec, grid, opts)?.cost)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueGradientCheck<T> {
    pub fd_directional: T,
    pub costate_pairing: T,
    /// `|fd - pairing| / max(1, |pairing|)`.
    pub rel_err: T,
}

/// Compare the central difference of the value in direction `h` with
/// `<pi(t0), h>`, where `pi` is the costate of the optimal sweep from `x`.
pub fn value_gradient_check<T: Scalar>(
    x: ArrayView1<T>,
    h: ArrayView1<T>,
    spec: &ModelSpec<T>,
    grid: &Grid<T>,
    eps: T,
    opts: &DirectOptions<T>,
) -> Result<ValueGradientCheck<T>> {
    if !(eps > T::zero()) {
        return Err(Error::InvalidArgument(format!("step {eps} must be positive")));
    }
    grid.check_profile("direction", h)?;
    let xp: AgeProfile<T> = (&x + &(&h * eps)).into();
    let xm: AgeProfile<T> = (&x - &(&h * eps)).into();
    let fd = (value_at_with(xp.view(), spec, grid, opts)? - value_at_with(xm.view(), spec, grid, opts)?)
        / (eps + eps);
    let sweep = fb_sweep(
        x,
        &ControlPath::zeros(grid),
        spec,
        grid,
        T::lit(0.5),
        opts.tol,
        opts.max_iter,
    )?;
    let pairing = grid.inner(sweep.pi.pi.row(0), h);
    Ok(ValueGradientCheck {
        fd_directional: fd,
        costate_pairing: pairing,
        rel_err: (fd - pairing).abs() / T::one().max(pairing.abs()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::model::{AgeFunction, CostSpec, RevenueSpec};

    fn spec(revenue: RevenueSpec<f64>) -> ModelSpec<f64> {
        ModelSpec {
            mu: 0.1,
            lambda: 0.5,
            sbar: 1.0,
            p: 2.0,
            omega: 0.0,
            t0: 0.0,
            alpha: AgeFunction::constant(1.0),
            revenue,
            cost: CostSpec::Quadratic {
                gamma0: 1.0,
                gamma1: 1.0,
            },
        }
    }

    fn wavy(g: &Grid<f64>, phase: f64) -> ControlPath<f64> {
        let mut u = ControlPath::zeros(g);
        for k in 0..g.n_t {
            u.u0[k] = (0.3 * k as f64 + phase).sin();
            for j in 0..g.nodes() {
                u.u1[[k, j]] = (0.7 * j as f64 - 0.2 * k as f64 + phase).cos();
            }
        }
        u
    }

    #[test]
    fn fd_examples() {
        let s = spec(RevenueSpec::Linear { rho: 0.0 });
        let g = make_grid(&s, 6, 2.0).unwrap();
        let x = AgeProfile::constant(&g, 1.0);
        let u = ControlPath::zeros(&g);
        let v = wavy(&g, 0.1);
        assert_eq!(cost_gradient_fd(x.view(), &u, &s, &g, &ControlPath::zeros(&g), 1e-3).unwrap(), 0.0);
        assert!(cost_gradient_fd(x.view(), &u, &s, &g, &v, 1e-3).unwrap().abs() < 1e-15);
    }

    #[test]
    fn block_fd_matches_adjoint_gradient() {
        for revenue in [
            RevenueSpec::Linear { rho: 1.0 },
            RevenueSpec::CappedQuadratic { a: 1.0, qcap: 2.0 },
        ] {
            let s = spec(revenue);
            let g = make_grid(&s, 8, 3.0).unwrap();
            let x = AgeProfile::from_fn(&g, |a| 0.5 + a);
            let u = wavy(&g, 0.4).scale(0.3);
            let y = evolve_state(x.view(), &u, &s, &g).unwrap();
            let fd = block_fd_gradient(&y, &u, &s, &g, 1e-4);
            let ad = adjoint_gradient(&y, &u, &s, &g).unwrap();
            let scale = ad.u1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (a, b) in fd.u0.iter().chain(fd.u1.iter()).zip(ad.u0.iter().chain(ad.u1.iter())) {
                assert!((a - b).abs() < 1e-8 * scale, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn zero_revenue_optimum_is_origin() {
        let s = spec(RevenueSpec::Linear { rho: 0.0 });
        let g = make_grid(&s, 6, 4.0).unwrap();
        let x = AgeProfile::constant(&g, 1.0);
        let sol = direct_optimize(x.view(), &s, &g, 1e-10, 50).unwrap();
        assert!(sol.converged);
        assert_eq!(sol.iterations, 0);
        assert_eq!(sol.cost, 0.0);
        assert_eq!(value_at(x.view(), &s, &g, 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn linear_revenue_value_is_affine() {
        let s = spec(RevenueSpec::Linear { rho: 1.0 });
        let g = make_grid(&s, 8, 6.0).unwrap();
        let opts = DirectOptions::new(1e-10, 50);
        let x1 = AgeProfile::constant(&g, 0.2);
        let x2 = AgeProfile::from_fn(&g, |a| 1.0 - a);
        let h = AgeProfile::from_fn(&g, |a| (4.0 * a).sin());
        let v = |x: &AgeProfile<f64>| value_at_with(x.view(), &s, &g, &opts).unwrap();
        let d1 = v(&(&*x1 + &*h).into()) - v(&x1);
        let d2 = v(&(&*x2 + &*h).into()) - v(&x2);
        assert!((d1 - d2).abs() < 1e-9);
    }
}
