//! Time-by-age trajectories of controls, state and costate.

use ndarray::{Array1, Array2, ArrayView1, Axis};

use crate::error::{shape_err, Result};
use crate::grid::{AgeProfile, Grid};
use crate::model::CostSpec;
use crate::scalar::{clamp, Scalar};

/// Piecewise-constant controls: `u0[k]` and `u1[k, j]` act on `[t_k, t_{k+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPath<T> {
    pub u0: Array1<T>,
    pub u1: Array2<T>,
}

impl<T: Scalar> ControlPath<T> {
    pub fn zeros(grid: &Grid<T>) -> Self {
        ControlPath {
            u0: Array1::zeros(grid.n_t),
            u1: Array2::zeros((grid.n_t, grid.nodes())),
        }
    }

    /// The same control at every time step.
    pub fn stationary(grid: &Grid<T>, u0: T, u1: ArrayView1<T>) -> Self {
        let mut u = Self::zeros(grid);
        u.u0.fill(u0);
        for mut row in u.u1.rows_mut() {
            row.assign(&u1);
        }
        u
    }

    pub fn n_t(&self) -> usize {
        self.u0.len()
    }

    pub fn check(&self, grid: &Grid<T>) -> Result<()> {
        if self.u0.len() != grid.n_t {
            return Err(shape_err("u0", grid.n_t, self.u0.len()));
        }
        if self.u1.dim() != (grid.n_t, grid.nodes()) {
            return Err(shape_err(
                "u1",
                format!("{:?}", (grid.n_t, grid.nodes())),
                format!("{:?}", self.u1.dim()),
            ));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.u0.iter().chain(self.u1.iter()).all(|v| v.is_finite())
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: T, other: &Self) -> Self {
        ControlPath {
            u0: &self.u0 + &(&other.u0 * c),
            u1: &self.u1 + &(&other.u1 * c),
        }
    }

    /// `(1 - theta) * self + theta * other`.
    pub fn blend(&self, theta: T, other: &Self) -> Self {
        let keep = T::one() - theta;
        ControlPath {
            u0: &self.u0 * keep + &other.u0 * theta,
            u1: &self.u1 * keep + &other.u1 * theta,
        }
    }

    pub fn scale(&self, c: T) -> Self {
        ControlPath {
            u0: &self.u0 * c,
            u1: &self.u1 * c,
        }
    }

    /// Pointwise projection onto the control box (identity when unconstrained).
    pub fn project(&self, cost: &CostSpec<T>) -> Self {
        let (lo0, hi0) = cost.u0_bounds();
        let (lo1, hi1) = cost.u1_bounds();
        ControlPath {
            u0: self.u0.mapv(|v| clamp(v, lo0, hi0)),
            u1: self.u1.mapv(|v| clamp(v, lo1, hi1)),
        }
    }

    /// The distributed control at step `k` as an owned profile.
    pub fn u1_at(&self, k: usize) -> AgeProfile<T> {
        self.u1.index_axis(Axis(0), k).to_owned().into()
    }

    /// Controls on steps `k..`, for restarting from an intermediate time.
    pub fn tail(&self, k: usize) -> Self {
        ControlPath {
            u0: self.u0.slice(ndarray::s![k..]).to_owned(),
            u1: self.u1.slice(ndarray::s![k.., ..]).to_owned(),
        }
    }
}

/// State on the grid. `y` holds node values at every time level; `averaged`
/// holds, for each step, the state the running cost is evaluated on (the
/// mean over the step of the state along each characteristic).
#[derive(Debug, Clone, PartialEq)]
pub struct StatePath<T> {
    pub y: Array2<T>,
    pub averaged: Array2<T>,
}

impl<T: Scalar> StatePath<T> {
    pub fn at(&self, k: usize) -> AgeProfile<T> {
        self.y.index_axis(Axis(0), k).to_owned().into()
    }

    pub fn check(&self, grid: &Grid<T>) -> Result<()> {
        if self.y.dim() != (grid.n_t + 1, grid.nodes()) {
            return Err(shape_err(
                "state",
                format!("{:?}", (grid.n_t + 1, grid.nodes())),
                format!("{:?}", self.y.dim()),
            ));
        }
        if self.averaged.dim() != (grid.n_t, grid.nodes()) {
            return Err(shape_err(
                "averaged state",
                format!("{:?}", (grid.n_t, grid.nodes())),
                format!("{:?}", self.averaged.dim()),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostatePath<T> {
    pub pi: Array2<T>,
}

impl<T: Scalar> CostatePath<T> {
    pub fn zeros(grid: &Grid<T>) -> Self {
        CostatePath {
            pi: Array2::zeros((grid.n_t + 1, grid.nodes())),
        }
    }

    pub fn at(&self, k: usize) -> AgeProfile<T> {
        self.pi.index_axis(Axis(0), k).to_owned().into()
    }

    pub fn check(&self, grid: &Grid<T>) -> Result<()> {
        if self.pi.dim() != (grid.n_t + 1, grid.nodes()) {
            return Err(shape_err(
                "costate",
                format!("{:?}", (grid.n_t + 1, grid.nodes())),
                format!("{:?}", self.pi.dim()),
            ));
        }
        Ok(())
    }
}

/// Convergence record of [`crate::pmp::fb_sweep`].
#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport<T> {
    pub iterations: usize,
    pub residual_history: Vec<T>,
    pub converged: bool,
    pub final_cost: T,
}
