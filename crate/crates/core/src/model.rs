//! Problem data: parameters of the vintage-capital model, revenue and
//! investment-cost specifications, and the checks of the standing
//! assumptions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{AgeProfile, Grid};
use crate::scalar::Scalar;

/// A function of capital age on `[0, sbar]`, sampled onto a grid on demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AgeFunction<T> {
    Constant { value: T },
    Affine { intercept: T, slope: T },
    /// Values at equally spaced ages covering `[0, sbar]`, linearly interpolated.
    Table { values: Vec<T> },
}

impl<T: Scalar> AgeFunction<T> {
    pub fn constant(value: T) -> Self {
        AgeFunction::Constant { value }
    }

    /// Evaluate at age `s` given the maximal age `sbar`.
    pub fn eval(&self, s: T, sbar: T) -> T {
        match self {
            AgeFunction::Constant { value } => *value,
            AgeFunction::Affine { intercept, slope } => *intercept + *slope * s,
            AgeFunction::Table { values } => match values.len() {
                0 => T::nan(),
                1 => values[0],
                n => {
                    let pos = (s / sbar) * T::lit((n - 1) as f64);
                    let pos = if pos < T::zero() { T::zero() } else { pos };
                    let i = pos.floor().to_usize().unwrap_or(0).min(n - 2);
                    let frac = pos - T::lit(i as f64);
                    values[i] + (values[i + 1] - values[i]) * frac
                }
            },
        }
    }

    pub fn sample(&self, grid: &Grid<T>) -> AgeProfile<T> {
        AgeProfile::from_fn(grid, |s| self.eval(s, grid.sbar))
    }

    /// Supremum of `|f|` on `[0, sbar]` (exact for every variant).
    pub fn sup_abs(&self, sbar: T) -> T {
        match self {
            AgeFunction::Constant { value } => value.abs(),
            AgeFunction::Affine { intercept, slope } => {
                intercept.abs().max((*intercept + *slope * sbar).abs())
            }
            AgeFunction::Table { values } => values
                .iter()
                .fold(T::zero(), |acc, v| acc.max(v.abs())),
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            AgeFunction::Constant { value } => value.is_finite(),
            AgeFunction::Affine { intercept, slope } => intercept.is_finite() && slope.is_finite(),
            AgeFunction::Table { values } => !values.is_empty() && values.iter().all(|v| v.is_finite()),
        }
    }
}

/// Revenue `R` as a function of the output rate `Q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RevenueSpec<T> {
    /// `R(Q) = rho * Q`.
    Linear { rho: T },
    /// `R(Q) = a Q - a Q^2 / (2 qcap)` on `[0, qcap]`, continued linearly with
    /// matching slope on both sides.
    CappedQuadratic { a: T, qcap: T },
    /// `R(Q) = b Q - a Q^2`. `q_bound` bounds `|Q|` along admissible
    /// trajectories and is only needed for the costate tail bound.
    Quadratic {
        a: T,
        #[serde(default)]
        b: T,
        #[serde(default)]
        q_bound: Option<T>,
    },
}

impl<T: Scalar> RevenueSpec<T> {
    pub fn value(&self, q: T) -> T {
        match *self {
            RevenueSpec::Linear { rho } => rho * q,
            RevenueSpec::CappedQuadratic { a, qcap } => {
                let half = T::lit(0.5);
                if q < T::zero() {
                    a * q
                } else if q <= qcap {
                    a * q - a * q * q / (qcap + qcap)
                } else {
                    // slope at qcap is zero
                    half * a * qcap
                }
            }
            RevenueSpec::Quadratic { a, b, .. } => b * q - a * q * q,
        }
    }

    /// Derivative `R'(Q)`.
    pub fn slope(&self, q: T) -> T {
        match *self {
            RevenueSpec::Linear { rho } => rho,
            RevenueSpec::CappedQuadratic { a, qcap } => {
                if q < T::zero() {
                    a
                } else if q <= qcap {
                    a - a * q / qcap
                } else {
                    T::zero()
                }
            }
            RevenueSpec::Quadratic { a, b, .. } => b - (a + a) * q,
        }
    }

    /// A bound on `|R'|` valid along every admissible trajectory, if one is known.
    pub fn slope_bound(&self) -> Option<T> {
        match *self {
            RevenueSpec::Linear { rho } => Some(rho.abs()),
            RevenueSpec::CappedQuadratic { a, .. } => Some(a.abs()),
            RevenueSpec::Quadratic { a, b, q_bound } => {
                q_bound.map(|qb| b.abs() + (a + a).abs() * qb.abs())
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RevenueSpec::Linear { .. } => "linear",
            RevenueSpec::CappedQuadratic { .. } => "capped_quadratic",
            RevenueSpec::Quadratic { .. } => "quadratic",
        }
    }
}

/// Investment cost `h0(u) = c0(u0) + int c1(u1(s)) ds`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostSpec<T> {
    Quadratic {
        gamma0: T,
        gamma1: T,
    },
    /// Quadratic inside a box, `+inf` outside.
    BoxConstrainedQuadratic {
        gamma0: T,
        gamma1: T,
        u0min: T,
        u0max: T,
        u1min: T,
        u1max: T,
    },
}

impl<T: Scalar> CostSpec<T> {
    pub fn gamma0(&self) -> T {
        match *self {
            CostSpec::Quadratic { gamma0, .. } | CostSpec::BoxConstrainedQuadratic { gamma0, .. } => {
                gamma0
            }
        }
    }

    pub fn gamma1(&self) -> T {
        match *self {
            CostSpec::Quadratic { gamma1, .. } | CostSpec::BoxConstrainedQuadratic { gamma1, .. } => {
                gamma1
            }
        }
    }

    /// Box for the boundary control, `(-inf, inf)` when unconstrained.
    pub fn u0_bounds(&self) -> (T, T) {
        match *self {
            CostSpec::Quadratic { .. } => (T::neg_infinity(), T::infinity()),
            CostSpec::BoxConstrainedQuadratic { u0min, u0max, .. } => (u0min, u0max),
        }
    }

    /// Box for the distributed control, `(-inf, inf)` when unconstrained.
    pub fn u1_bounds(&self) -> (T, T) {
        match *self {
            CostSpec::Quadratic { .. } => (T::neg_infinity(), T::infinity()),
            CostSpec::BoxConstrainedQuadratic { u1min, u1max, .. } => (u1min, u1max),
        }
    }

    pub fn is_constrained(&self) -> bool {
        matches!(self, CostSpec::BoxConstrainedQuadratic { .. })
    }
}

/// All parameters of one vintage-capital control problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec<T> {
    /// Depreciation rate.
    pub mu: T,
    /// Discount rate.
    pub lambda: T,
    /// Maximal capital age.
    pub sbar: T,
    /// Coercivity exponent of the investment cost.
    pub p: T,
    /// Growth bound of the transport semigroup (0 for this model).
    #[serde(default)]
    pub omega: T,
    /// Initial time.
    #[serde(default)]
    pub t0: T,
    /// Output weight per age.
    pub alpha: AgeFunction<T>,
    pub revenue: RevenueSpec<T>,
    pub cost: CostSpec<T>,
}

impl<T: Scalar> ModelSpec<T> {
    /// `lambda + mu`, the decay rate of the costate along characteristics.
    pub fn costate_rate(&self) -> T {
        self.lambda + self.mu
    }

    /// Same model started at another initial time.
    pub fn with_t0(&self, t0: T) -> Self {
        ModelSpec { t0, ..self.clone() }
    }
}

/// Every violated standing assumption, as human-readable messages.
pub fn validate_model<T: Scalar>(spec: &ModelSpec<T>) -> Vec<String> {
    let mut out = Vec::new();
    let two = T::lit(2.0);

    if !(spec.mu > T::zero() && spec.mu.is_finite()) {
        out.push("mu must be positive and finite".to_string());
    }
    if !(spec.sbar > T::zero() && spec.sbar.is_finite()) {
        out.push("sbar must be finite and positive".to_string());
    }
    if !(spec.p >= two) {
        out.push("p must be at least 2".to_string());
    }
    if !spec.omega.is_finite() || spec.omega < T::zero() {
        out.push("omega must be a finite non-negative growth bound".to_string());
    }
    if !(spec.lambda > two * spec.omega) || !spec.lambda.is_finite() {
        out.push("lambda must exceed 2*omega".to_string());
    }
    if !spec.t0.is_finite() || spec.t0 < T::zero() {
        out.push("t0 must be finite and non-negative".to_string());
    }
    if !spec.alpha.is_finite() {
        out.push("alpha values must be finite on [0, sbar]".to_string());
    }

    match spec.revenue {
        RevenueSpec::Linear { rho } => {
            if !(rho >= T::zero() && rho.is_finite()) {
                out.push("linear revenue needs a finite rho >= 0".to_string());
            }
        }
        RevenueSpec::CappedQuadratic { a, qcap } => {
            if !(a > T::zero() && a.is_finite()) {
                out.push("capped quadratic revenue needs a > 0".to_string());
            }
            if !(qcap > T::zero() && qcap.is_finite()) {
                out.push("capped quadratic revenue needs qcap > 0".to_string());
            }
        }
        RevenueSpec::Quadratic { a, b, q_bound } => {
            if !(a > T::zero() && a.is_finite()) {
                out.push("quadratic revenue needs a > 0".to_string());
            }
            if !b.is_finite() {
                out.push("quadratic revenue linear coefficient must be finite".to_string());
            }
            if let Some(qb) = q_bound {
                if !(qb >= T::zero() && qb.is_finite()) {
                    out.push("quadratic revenue q_bound must be finite and >= 0".to_string());
                }
            }
        }
    }

    let (g0, g1) = (spec.cost.gamma0(), spec.cost.gamma1());
    if !(g0 > T::zero() && g0.is_finite()) {
        out.push("gamma0 must be positive".to_string());
    }
    if !(g1 > T::zero() && g1.is_finite()) {
        out.push("gamma1 must be positive".to_string());
    }
    match spec.cost {
        CostSpec::Quadratic { .. } => {
            if spec.p != two {
                out.push("unconstrained quadratic cost is only coercive with p = 2".to_string());
            }
        }
        CostSpec::BoxConstrainedQuadratic {
            u0min,
            u0max,
            u1min,
            u1max,
            ..
        } => {
            if !(u0min <= u0max) || !(u1min <= u1max) {
                out.push("control box needs min <= max".to_string());
            }
            let zero = T::zero();
            if !(u0min <= zero && zero <= u0max && u1min <= zero && zero <= u1max) {
                out.push("h0*(0)=0 requires 0 in control box".to_string());
            }
        }
    }
    out
}

/// Horizon `T` at which the a-priori costate tail bound
/// `rho_max * |alpha|_inf * exp(-(lambda+mu)(T-t0)) / (lambda+mu)` drops below `tail_tol`.
pub fn truncation_horizon<T: Scalar>(spec: &ModelSpec<T>, tail_tol: T) -> Result<T> {
    if !(tail_tol > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "tail tolerance must be positive, got {tail_tol}"
        )));
    }
    let rho_max = spec
        .revenue
        .slope_bound()
        .ok_or(Error::NoTailBound("quadratic revenue requires a q_bound"))?;
    let rate = spec.costate_rate();
    let bound0 = rho_max * spec.alpha.sup_abs(spec.sbar) / rate;
    if bound0 <= tail_tol {
        return Ok(spec.t0);
    }
    Ok(spec.t0 + (bound0 / tail_tol).ln() / rate)
}
