//! Property tests for the convex toolkit, the state map and the diagnostics.

mod common;

use ndarray::Array1;
use proptest::prelude::*;

use common::{benchmark, boxed, capped};
use vintage_pmp::*;

const N_S: usize = 8;

fn grid(spec: &ModelSpec<f64>) -> Grid<f64> {
    make_grid(spec, N_S, 2.0).unwrap()
}

fn profile(range: std::ops::Range<f64>) -> impl Strategy<Value = AgeProfile<f64>> {
    prop::collection::vec(range, N_S + 1).prop_map(|v| Array1::from(v).into())
}

/// Controls on the 2.0 horizon grid (`n_t = 16`).
fn control(range: std::ops::Range<f64>) -> impl Strategy<Value = ControlPath<f64>> {
    let n_t = 2 * N_S;
    (
        prop::collection::vec(range.clone(), n_t),
        prop::collection::vec(range, n_t * (N_S + 1)),
    )
        .prop_map(move |(u0, u1)| ControlPath {
            u0: Array1::from(u0),
            u1: ndarray::Array2::from_shape_vec((n_t, N_S + 1), u1).unwrap(),
        })
}

fn costs() -> impl Strategy<Value = CostSpec<f64>> {
    prop_oneof![
        (0.1..5.0, 0.1..5.0).prop_map(|(gamma0, gamma1)| CostSpec::Quadratic { gamma0, gamma1 }),
        (0.1..5.0, 0.1..5.0, 0.1..2.0, 0.1..2.0).prop_map(|(gamma0, gamma1, u0max, u1max)| {
            CostSpec::BoxConstrainedQuadratic {
                gamma0,
                gamma1,
                u0min: -1.0,
                u0max,
                u1min: -0.5,
                u1max,
            }
        }),
    ]
}

fn dual(z0: f64, z1: AgeProfile<f64>) -> DualControl<f64> {
    DualControl { z0, z1 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fenchel_young(cost in costs(), z0 in -4.0..4.0, z1 in profile(-4.0..4.0), t0 in 0.0..1.0, t1 in profile(0.0..1.0)) {
        let g = grid(&benchmark());
        let z = dual(z0, z1);
        let (lo0, hi0) = cost.u0_bounds();
        let (lo1, hi1) = cost.u1_bounds();
        // any feasible point, built from unit-interval draws
        let pick = |t: f64, lo: f64, hi: f64| lo.max(-3.0) + t * (hi.min(3.0) - lo.max(-3.0));
        let u0 = pick(t0, lo0, hi0);
        let u1 = t1.mapv(|t| pick(t, lo1, hi1));
        let conj = h0_conj_value(&z, &cost, &g);
        let gap = h0_value(u0, u1.view(), &cost, &g) + conj - z.z0 * u0 - g.inner(z.z1.view(), u1.view());
        prop_assert!(gap >= -1e-12);
        let (b0, b1) = h0_conj_grad(&z, &cost);
        let tight = h0_value(b0, b1.view(), &cost, &g) + conj - z.z0 * b0 - g.inner(z.z1.view(), b1.view());
        prop_assert!(tight.abs() <= 1e-12);
    }

    #[test]
    fn conjugate_gradient_is_monotone(cost in costs(), a0 in -4.0..4.0, a1 in profile(-4.0..4.0), b0 in -4.0..4.0, b1 in profile(-4.0..4.0)) {
        let g = grid(&benchmark());
        let (za, zb) = (dual(a0, a1), dual(b0, b1));
        let (ua0, ua1) = h0_conj_grad(&za, &cost);
        let (ub0, ub1) = h0_conj_grad(&zb, &cost);
        let d1: Array1<f64> = &*za.z1 - &*zb.z1;
        let v1: Array1<f64> = &*ua1 - &*ub1;
        prop_assert!((a0 - b0) * (ua0 - ub0) + g.inner(d1.view(), v1.view()) >= -1e-14);
    }

    #[test]
    fn g0_gradient_matches_differences(x in profile(0.5..1.5), h in profile(-1.0..1.0), slope in -1.0..1.0) {
        let s = ModelSpec {
            alpha: AgeFunction::Affine { intercept: 1.0, slope },
            ..capped(1.0, 5.0)
        };
        let g = grid(&s);
        let eps = 1e-5;
        let xp: Array1<f64> = &*x + &(&*h * eps);
        let xm: Array1<f64> = &*x - &(&*h * eps);
        let fd = (g0_value(xp.view(), &s, &g) - g0_value(xm.view(), &s, &g)) / (2.0 * eps);
        let exact = g.inner(g0_grad(x.view(), &s, &g).view(), h.view());
        prop_assert!((fd - exact).abs() <= 1e-6, "fd {} exact {}", fd, exact);
    }

    #[test]
    fn g0_is_convex(x in profile(-3.0..6.0), y in profile(-3.0..6.0), t in 0.0..1.0, qcap in 0.5..4.0) {
        let s = capped(1.0, qcap);
        let g = grid(&s);
        let mid: Array1<f64> = &*x * t + &*y * (1.0 - t);
        let bow = g0_value(mid.view(), &s, &g) - t * g0_value(x.view(), &s, &g) - (1.0 - t) * g0_value(y.view(), &s, &g);
        prop_assert!(bow <= 1e-12);
    }

    #[test]
    fn semigroup_law(f in profile(-1.0..1.0), k1 in 0usize..12, k2 in 0usize..12, mu in 0.0..1.0) {
        let g = grid(&benchmark());
        let two = semigroup_apply(semigroup_apply(f.view(), k1, mu, &g).view(), k2, mu, &g);
        let one = semigroup_apply(f.view(), k1 + k2, mu, &g);
        prop_assert!(two.iter().zip(one.iter()).all(|(a, b)| a.to_bits() == b.to_bits()));
        let two = adjoint_semigroup_apply(adjoint_semigroup_apply(f.view(), k1, mu, &g).view(), k2, mu, &g);
        let one = adjoint_semigroup_apply(f.view(), k1 + k2, mu, &g);
        prop_assert!(two.iter().zip(one.iter()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn state_map_is_affine(x in profile(-1.0..1.0), x2 in profile(-1.0..1.0), u in control(-1.0..1.0), u2 in control(-1.0..1.0), c in -2.0..2.0) {
        let s = benchmark();
        let g = grid(&s);
        let zero = evolve_state(AgeProfile::zeros(&g).view(), &ControlPath::zeros(&g), &s, &g).unwrap();
        let a = evolve_state(x.view(), &u, &s, &g).unwrap();
        let b = evolve_state(x2.view(), &u2, &s, &g).unwrap();
        let xc: Array1<f64> = &*x + &(&*x2 * c);
        let ab = evolve_state(xc.view(), &u.add_scaled(c, &u2), &s, &g).unwrap();
        let defect = &a.y + &(&b.y * c) - &(&zero.y * c) - &ab.y;
        prop_assert!(defect.iter().all(|v| v.abs() <= 1e-12));
    }

    #[test]
    fn cost_is_convex(x in profile(0.0..1.0), a in control(-0.5..1.0), b in control(-0.5..1.0), t in 0.0..1.0, qcap in 0.5..3.0) {
        let s = capped(1.0, qcap);
        let g = grid(&s);
        let j = |u: &ControlPath<f64>| cost_functional(x.view(), u, &s, &g).unwrap();
        let bow = j(&a.blend(1.0 - t, &b)) - t * j(&a) - (1.0 - t) * j(&b);
        prop_assert!(bow <= 1e-10);
    }

    #[test]
    fn b_star_is_dual_to_the_control_operator(pi in profile(-2.0..2.0), v0 in -2.0..2.0, v1 in profile(-2.0..2.0)) {
        let g = grid(&benchmark());
        // B v = v1 + v0 delta_0, the discrete delta carrying the node-0 weight
        let mut bv = v1.clone();
        bv[0] += v0 / g.weights()[0];
        let z = b_star(pi.view());
        let lhs: f64 = g.inner(pi.view(), bv.view());
        let rhs: f64 = z.z0 * v0 + g.inner(z.z1.view(), v1.view());
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn lp_norm_is_homogeneous(u in control(-1.0..1.0), c in -5.0..5.0, p in 1.0..4.0, lambda in 0.0..2.0) {
        let g = grid(&benchmark());
        let n = discounted_lp_norm(&u, p, lambda, &g);
        let nc = discounted_lp_norm(&u.scale(c), p, lambda, &g);
        prop_assert!((nc - c.abs() * n).abs() <= 1e-12 * (1.0 + nc));
        prop_assert!(n >= 0.0);
    }

    #[test]
    fn truncation_is_monotone(tol in 1e-12..1e-2, factor in 1.5..100.0, lambda in 0.3..2.0, mu in 0.0..1.0) {
        let s = ModelSpec { lambda, mu, ..benchmark() };
        let loose = truncation_horizon(&s, tol * factor).unwrap();
        let tight = truncation_horizon(&s, tol).unwrap();
        prop_assert!(tight > loose);
        let g = Grid::for_tail_tolerance(&s, 10, tol).unwrap();
        prop_assert!(g.horizon >= tight - 1e-8);
    }

    #[test]
    fn validation_accepts_admissible_models(lambda in 0.01..3.0, mu in 0.01..1.0, rho in 0.0..5.0, gamma in 0.1..5.0) {
        let s = ModelSpec {
            lambda,
            mu,
            revenue: RevenueSpec::Linear { rho },
            cost: CostSpec::Quadratic { gamma0: gamma, gamma1: gamma },
            ..benchmark()
        };
        prop_assert!(validate_model(&s).is_empty());
        let bad = ModelSpec { lambda: -lambda, ..s.clone() };
        prop_assert!(!validate_model(&bad).is_empty());
        prop_assert_eq!(validate_model(&bad), validate_model(&bad.clone()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    // strong saturation (a / qcap up to 4) needs heavy relaxation
    #[test]
    fn converged_sweeps_are_extremal(a in 0.2..2.0, qcap in 0.5..4.0, level in 0.0..1.0, theta in 0.15..0.3) {
        let s = capped(a, qcap);
        let g = Grid::for_tail_tolerance(&s, N_S, 1e-8).unwrap();
        let x = AgeProfile::constant(&g, level);
        let sweep = fb_sweep(x.view(), &ControlPath::zeros(&g), &s, &g, theta, 1e-10, 500).unwrap();
        prop_assert!(sweep.report.converged);
        let cert = extremality_certificate(&sweep.u, &sweep.y, &sweep.pi, &s, &g, 1e-8).unwrap();
        prop_assert!(cert.is_extremal, "{:?}", cert);
    }

    #[test]
    fn constrained_sweeps_stay_in_the_box(u0max in 0.1..1.0, u1max in 0.1..1.0, level in 0.0..1.0) {
        let s = boxed(u0max, u1max);
        let g = Grid::for_tail_tolerance(&s, N_S, 1e-8).unwrap();
        let x = AgeProfile::constant(&g, level);
        let sweep = fb_sweep(x.view(), &ControlPath::zeros(&g), &s, &g, 1.0, 1e-10, 10).unwrap();
        prop_assert!(sweep.u.u0.iter().all(|&v| (-1.0..=u0max).contains(&v)));
        prop_assert!(sweep.u.u1.iter().all(|&v| (-1.0..=u1max).contains(&v)));
        prop_assert!(mp_residual(&sweep.u, &sweep.pi, &s.cost, s.lambda, &g) <= 1e-10);
    }
}
