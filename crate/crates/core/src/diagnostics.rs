//! Discounted norms of controls.

use crate::grid::Grid;
use crate::paths::ControlPath;
use crate::scalar::Scalar;

/// `(sum_k e^{-lambda t_k} (|u0_k|^2 + |u1_k|_{L2}^2)^{p/2} dt)^{1/p}`.
pub fn discounted_lp_norm<T: Scalar>(u: &ControlPath<T>, p: T, lambda: T, grid: &Grid<T>) -> T {
    let half_p = p * T::lit(0.5);
    let mut acc = T::zero();
    for k in 0..grid.n_t {
        let row = u.u1.row(k);
        let sq = u.u0[k] * u.u0[k] + grid.inner(row, row);
        acc += grid.discount(k, lambda) * sq.powf(half_p) * grid.dt;
    }
    acc.powf(p.recip())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::model::{AgeFunction, CostSpec, ModelSpec, RevenueSpec};

    #[test]
    fn norm_examples() {
        let s = ModelSpec {
            mu: 0.1,
            lambda: 0.5,
            sbar: 1.0,
            p: 2.0,
            omega: 0.0,
            t0: 0.0,
            alpha: AgeFunction::constant(1.0),
            revenue: RevenueSpec::Linear { rho: 1.0 },
            cost: CostSpec::Quadratic {
                gamma0: 1.0,
                gamma1: 1.0,
            },
        };
        let g = make_grid(&s, 100, 5.0).unwrap();
        let mut u = ControlPath::zeros(&g);
        assert_eq!(discounted_lp_norm(&u, 2.0, 0.5, &g), 0.0);
        u.u0.fill(1.0);
        let exact = ((1.0 - (-0.5f64 * g.horizon).exp()) / 0.5).sqrt();
        let got = discounted_lp_norm(&u, 2.0, 0.5, &g);
        assert!((got - exact).abs() < g.dt);
        u.u1.fill(0.7);
        let n = discounted_lp_norm(&u, 3.0, 0.5, &g);
        assert!((discounted_lp_norm(&u.scale(-2.5), 3.0, 0.5, &g) - 2.5 * n).abs() < 1e-12);
    }
}
