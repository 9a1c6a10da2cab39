//! Costate: the backward recursion that is the exact discrete adjoint of
//! [`crate::dynamics::evolve_state`] under the discounted cost.

use ndarray::{Array1, Array2, ArrayView1};

use crate::convex::StageCost;
use crate::error::Result;
use crate::grid::{AgeProfile, Grid};
use crate::model::ModelSpec;
use crate::paths::{CostatePath, StatePath};
use crate::scalar::Scalar;

/// `exp(k dt A0*) f`: shift toward younger ages, zero beyond `sbar`.
pub fn adjoint_semigroup_apply<T: Scalar>(
    f: ArrayView1<T>,
    k: usize,
    mu: T,
    grid: &Grid<T>,
) -> AgeProfile<T> {
    let n = f.len();
    let a = (-mu * grid.dt).exp();
    Array1::from_shape_fn(n, |j| {
        if j + k >= n {
            return T::zero();
        }
        (0..k).fold(f[j + k], |v, _| a * v)
    })
    .into()
}

/// Backward sweep from `pi(T) = 0`. Along each characteristic the driver
/// `g0'` is integrated with the trapezoid rule, which makes
/// `dG/du . v = sum_k e^{-lambda t_k} dt <B* pi_k, v_k>` hold to round-off.
pub fn solve_costate<T: Scalar>(
    y: &StatePath<T>,
    spec: &ModelSpec<T>,
    grid: &Grid<T>,
) -> Result<CostatePath<T>> {
    y.check(grid)?;
    let n = grid.n_s;
    let sc = StageCost::new(spec, grid);
    let q = (-(spec.lambda + spec.mu) * grid.dt).exp();
    let half = T::lit(0.5) * grid.dt;

    let mut pi = Array2::zeros((grid.n_t + 1, n + 1));
    // driver of the step after k; zero at the horizon
    let mut later = Array1::zeros(n + 1);
    let mut now = Array1::zeros(n + 1);
    for k in (0..grid.n_t).rev() {
        sc.g0_grad_into(y.averaged.row(k), now.view_mut());
        for j in 0..n {
            pi[[k, j]] = q * pi[[k + 1, j + 1]] + half * (now[j] + q * later[j + 1]);
        }
        pi[[k, n]] = T::zero();
        std::mem::swap(&mut now, &mut later);
    }
    Ok(CostatePath { pi })
}

/// `(sum_k e^{-lambda t_k} |pi_k|_{L2}^q dt)^{1/q}` over the steps before the horizon.
pub fn costate_discounted_norm<T: Scalar>(pi: &CostatePath<T>, q: T, lambda: T, grid: &Grid<T>) -> T {
    let mut acc = T::zero();
    for k in 0..grid.n_t {
        let norm = grid.l2_norm(pi.pi.row(k));
        acc += grid.discount(k, lambda) * norm.powf(q) * grid.dt;
    }
    acc.powf(q.recip())
}

/// Closed-form costate of the linear-revenue, constant-alpha problem on an
/// infinite horizon.
pub fn stationary_costate_profile<T: Scalar>(rho: T, alpha: T, spec: &ModelSpec<T>, grid: &Grid<T>) -> AgeProfile<T> {
    let r = spec.costate_rate();
    AgeProfile::from_fn(grid, |s| -rho * alpha * (T::one() - (-r * (spec.sbar - s)).exp()) / r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve_state, semigroup_apply};
    use crate::grid::make_grid;
    use crate::model::{AgeFunction, CostSpec, RevenueSpec};
    use crate::paths::ControlPath;

    fn spec(rho: f64) -> ModelSpec<f64> {
        ModelSpec {
            mu: 0.1,
            lambda: 0.5,
            sbar: 1.0,
            p: 2.0,
            omega: 0.0,
            t0: 0.0,
            alpha: AgeFunction::constant(1.0),
            revenue: RevenueSpec::Linear { rho },
            cost: CostSpec::Quadratic {
                gamma0: 1.0,
                gamma1: 1.0,
            },
        }
    }

    #[test]
    fn adjoint_shift_examples() {
        let s = spec(1.0);
        let g = make_grid(&s, 10, 2.0).unwrap();
        let f = AgeProfile::constant(&g, 1.0);
        assert_eq!(adjoint_semigroup_apply(f.view(), 0, 0.1, &g), f);
        let out = adjoint_semigroup_apply(f.view(), 5, 0.1, &g);
        for j in 0..=10 {
            let expected = if j <= 5 { 0.951229 } else { 0.0 };
            assert!((out[j] - expected).abs() < 1e-6);
        }
    }

    #[test]
    fn zero_revenue_zero_costate() {
        let s = spec(0.0);
        let g = make_grid(&s, 10, 3.0).unwrap();
        let y = evolve_state(AgeProfile::constant(&g, 1.0).view(), &ControlPath::zeros(&g), &s, &g).unwrap();
        let pi = solve_costate(&y, &s, &g).unwrap();
        assert!(pi.pi.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn costate_matches_stationary_profile() {
        let s = spec(1.0);
        let g = Grid::for_tail_tolerance(&s, 50, 1e-8).unwrap();
        let y = evolve_state(AgeProfile::zeros(&g).view(), &ControlPath::zeros(&g), &s, &g).unwrap();
        let pi = solve_costate(&y, &s, &g).unwrap();
        let exact = stationary_costate_profile(1.0, 1.0, &s, &g);
        let bound = 1.0 / 0.6;
        for k in 0..=g.n_t {
            assert_eq!(pi.pi[[k, 50]], 0.0);
            assert!(pi.pi.row(k).iter().all(|v| v.abs() <= bound));
        }
        for k in 0..g.n_t - 50 {
            for j in 0..50 {
                let rel = (pi.pi[[k, j]] - exact[j]).abs() / exact[j].abs();
                assert!(rel < 2e-5, "k={k} j={j} rel={rel}");
            }
        }
        assert!((exact[0] + (1.0 - (-0.6f64).exp()) / 0.6).abs() < 1e-15);
    }

    #[test]
    fn shift_transpose_up_to_end_weights() {
        let s = spec(1.0);
        let g = make_grid(&s, 20, 1.0).unwrap();
        let f = AgeProfile::from_fn(&g, |s| (3.0 * s).sin() + 0.5);
        let h = AgeProfile::from_fn(&g, |s| s * s - 0.2);
        for k in 0..5 {
            let lhs = g.inner(semigroup_apply(f.view(), k, 0.1, &g).view(), h.view());
            let rhs = g.inner(f.view(), adjoint_semigroup_apply(h.view(), k, 0.1, &g).view());
            assert!((lhs - rhs).abs() <= g.ds * 2.0);
        }
    }

    #[test]
    fn discounted_norm_of_constant() {
        let s = spec(1.0);
        let g = make_grid(&s, 100, 4.0).unwrap();
        let pi = CostatePath {
            pi: Array2::from_elem((g.n_t + 1, 101), 2.0),
        };
        let t = g.horizon;
        let exact = 2.0 * ((1.0 - (-0.5 * t).exp()) / 0.5f64).sqrt();
        let got = costate_discounted_norm(&pi, 2.0, 0.5, &g);
        assert!((got - exact).abs() < 0.01 * exact);
        assert!(costate_discounted_norm(&pi, 2.0, 0.9, &g) < got);
        assert_eq!(costate_discounted_norm(&CostatePath::zeros(&g), 2.0, 0.5, &g), 0.0);
    }
}
