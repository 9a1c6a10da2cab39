//! Aligned age/time grid and age profiles sampled on it.

use std::ops::{Deref, DerefMut};

use ndarray::{Array1, ArrayView1};

use crate::error::{shape_err, Error, Result};
use crate::model::{truncation_horizon, ModelSpec};
use crate::scalar::Scalar;

/// Uniform grid with `dt == ds`, so one time step moves every characteristic
/// exactly one age node.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    pub n_s: usize,
    pub n_t: usize,
    pub t0: T,
    /// Truncation horizon, `t0 + n_t * dt`.
    pub horizon: T,
    pub sbar: T,
    pub ds: T,
    pub dt: T,
}

/// Build a grid with `n_s` age intervals, rounding the horizon to whole steps.
pub fn make_grid<T: Scalar>(spec: &ModelSpec<T>, n_s: usize, horizon: T) -> Result<Grid<T>> {
    if !(horizon > spec.t0) {
        return Err(Error::EmptyHorizon {
            t0: spec.t0.to_f64_lossy(),
            horizon: horizon.to_f64_lossy(),
        });
    }
    let ds = step(spec, n_s)?;
    let n_t = ((horizon - spec.t0) / ds).round().to_usize().unwrap_or(0).max(1);
    Ok(Grid::new(spec, n_s, n_t, ds))
}

fn step<T: Scalar>(spec: &ModelSpec<T>, n_s: usize) -> Result<T> {
    if n_s < 2 {
        return Err(Error::TooFewAgeIntervals(n_s));
    }
    Ok(spec.sbar / T::lit(n_s as f64))
}

impl<T: Scalar> Grid<T> {
    fn new(spec: &ModelSpec<T>, n_s: usize, n_t: usize, ds: T) -> Self {
        Grid {
            n_s,
            n_t,
            t0: spec.t0,
            horizon: spec.t0 + T::lit(n_t as f64) * ds,
            sbar: spec.sbar,
            ds,
            dt: ds,
        }
    }

    /// Grid whose horizon is at least [`truncation_horizon`] for `tail_tol`,
    /// always with at least one time step.
    pub fn for_tail_tolerance(spec: &ModelSpec<T>, n_s: usize, tail_tol: T) -> Result<Self> {
        let ds = step(spec, n_s)?;
        let t_end = truncation_horizon(spec, tail_tol)?;
        // tolerate round-off so an exactly aligned horizon is not pushed one step out
        let steps = (t_end - spec.t0) / ds - T::lit(1e-9);
        let n_t = steps.ceil().to_usize().unwrap_or(0).max(1);
        Ok(Grid::new(spec, n_s, n_t, ds))
    }

    /// Same spacing, different number of time steps.
    pub fn with_steps(&self, n_t: usize) -> Self {
        Grid {
            n_t,
            horizon: self.t0 + T::lit(n_t as f64) * self.dt,
            ..self.clone()
        }
    }

    /// Number of age nodes, `n_s + 1`.
    pub fn nodes(&self) -> usize {
        self.n_s + 1
    }

    pub fn time(&self, k: usize) -> T {
        self.t0 + T::lit(k as f64) * self.dt
    }

    pub fn age(&self, j: usize) -> T {
        T::lit(j as f64) * self.ds
    }

    pub fn ages(&self) -> Array1<T> {
        Array1::from_shape_fn(self.nodes(), |j| self.age(j))
    }

    /// `exp(-lambda * t_k)` with the absolute time `t_k`.
    pub fn discount(&self, k: usize, lambda: T) -> T {
        (-lambda * self.time(k)).exp()
    }

    /// Trapezoid weights over the age nodes.
    pub fn weights(&self) -> Array1<T> {
        let mut w = Array1::from_elem(self.nodes(), self.ds);
        let half = self.ds * T::lit(0.5);
        w[0] = half;
        w[self.n_s] = half;
        w
    }

    /// Trapezoid integral over `[0, sbar]`.
    pub fn integrate(&self, f: ArrayView1<T>) -> T {
        let n = f.len() - 1;
        let mut acc = T::lit(0.5) * (f[0] + f[n]);
        for j in 1..n {
            acc += f[j];
        }
        acc * self.ds
    }

    pub fn inner(&self, f: ArrayView1<T>, g: ArrayView1<T>) -> T {
        let n = f.len() - 1;
        let mut acc = T::lit(0.5) * (f[0] * g[0] + f[n] * g[n]);
        for j in 1..n {
            acc += f[j] * g[j];
        }
        acc * self.ds
    }

    pub fn l2_norm(&self, f: ArrayView1<T>) -> T {
        self.inner(f, f).sqrt()
    }

    pub(crate) fn check_profile(&self, what: &'static str, f: ArrayView1<T>) -> Result<()> {
        if f.len() != self.nodes() {
            return Err(shape_err(what, self.nodes(), f.len()));
        }
        Ok(())
    }
}

/// Values at the `n_s + 1` age nodes `s_j = j * ds`.
#[derive(Debug, Clone, PartialEq)]
pub struct AgeProfile<T> {
    values: Array1<T>,
}

impl<T: Scalar> AgeProfile<T> {
    pub fn zeros(grid: &Grid<T>) -> Self {
        Self::constant(grid, T::zero())
    }

    pub fn constant(grid: &Grid<T>, c: T) -> Self {
        AgeProfile {
            values: Array1::from_elem(grid.nodes(), c),
        }
    }

    pub fn from_fn(grid: &Grid<T>, f: impl Fn(T) -> T) -> Self {
        AgeProfile {
            values: Array1::from_shape_fn(grid.nodes(), |j| f(grid.age(j))),
        }
    }

    /// Wrap a vector of node values, checking the length against the grid.
    pub fn from_vec(grid: &Grid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.nodes() {
            return Err(shape_err("age profile", grid.nodes(), values.len()));
        }
        Ok(AgeProfile {
            values: Array1::from(values),
        })
    }

    pub fn into_inner(self) -> Array1<T> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

impl<T> From<Array1<T>> for AgeProfile<T> {
    fn from(values: Array1<T>) -> Self {
        AgeProfile { values }
    }
}

impl<T> Deref for AgeProfile<T> {
    type Target = Array1<T>;
    fn deref(&self) -> &Array1<T> {
        &self.values
    }
}

impl<T> DerefMut for AgeProfile<T> {
    fn deref_mut(&mut self) -> &mut Array1<T> {
        &mut self.values
    }
}
