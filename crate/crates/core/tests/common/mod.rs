#![allow(dead_code)]

use vintage_pmp::{AgeFunction, CostSpec, ModelSpec, RevenueSpec};

pub const MU: f64 = 0.1;
pub const LAMBDA: f64 = 0.5;

/// Linear revenue, constant output weight, unit quadratic costs.
pub fn benchmark() -> ModelSpec<f64> {
    ModelSpec {
        mu: MU,
        lambda: LAMBDA,
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
    }
}

pub fn capped(a: f64, qcap: f64) -> ModelSpec<f64> {
    ModelSpec {
        revenue: RevenueSpec::CappedQuadratic { a, qcap },
        ..benchmark()
    }
}

pub fn boxed(u0max: f64, u1max: f64) -> ModelSpec<f64> {
    ModelSpec {
        cost: CostSpec::BoxConstrainedQuadratic {
            gamma0: 1.0,
            gamma1: 1.0,
            u0min: -1.0,
            u0max,
            u1min: -1.0,
            u1max,
        },
        ..benchmark()
    }
}

/// Closed-form stationary costate of [`benchmark`].
pub fn analytic_pi(s: f64) -> f64 {
    -(1.0 - (-(LAMBDA + MU) * (1.0 - s)).exp()) / (LAMBDA + MU)
}
