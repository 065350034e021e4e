//! Deterministic grid solver for `∂t ρ + u·∇ρ = κ Δρ`.
//!
//! Shear flows run on a doubly periodic Cartesian grid with Strang splitting
//! (spectral diffusion, semi-Lagrangian advection); circular flows run on an
//! annular polar grid with an exact angular shift and implicit radial
//! diffusion per angular Fourier mode.

mod cartesian;
mod energy;
mod io;
mod polar;
mod spectral;

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::flows::Vec2;
use crate::par::tree_sum;
use crate::{Error, Result};

pub use cartesian::{
    advect_semi_lagrangian, diffuse_spectral, spectral_gradient, step_strang, CartesianStepper, ShiftInterpolation,
};
pub use energy::{
    energy_ledger_update, polar_gradient_sq, windowed_gradient_sq, EnergyLedger, EnergySample, EnergyTerms, LedgerField,
};
pub use io::{read_binary, read_csv, write_binary, write_csv, Snapshot, SnapshotGrid};
pub use polar::{step_polar, PolarState, PolarStepper};
pub use spectral::Fft2;

/// Node layout shared by both grids: `rows × cols` values, row-major.
pub trait Geometry: Clone + Send + Sync {
    fn shape(&self) -> (usize, usize);
    /// Cartesian coordinates of node `(row, col)`.
    fn node(&self, row: usize, col: usize) -> Vec2;
    /// Quadrature weight (cell measure) of node `(row, col)`.
    fn weight(&self, row: usize, col: usize) -> f64;

    fn len(&self) -> usize {
        let (r, c) = self.shape();
        r * c
    }

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `[0, 2π) × [−L_y, L_y)`, periodic in both directions. Rows index `y`,
/// columns index `x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CartesianGrid {
    pub nx: usize,
    pub ny: usize,
    pub ly: f64,
}

impl CartesianGrid {
    pub fn new(nx: usize, ny: usize, ly: f64) -> Result<Self> {
        if !nx.is_power_of_two() || !ny.is_power_of_two() || nx < 4 || ny < 4 {
            return Err(Error::Geometry(format!(
                "Cartesian grid sizes must be powers of two ≥ 4, got {nx}×{ny}"
            )));
        }
        if !(ly > 0.0) || !ly.is_finite() {
            return Err(Error::Geometry(format!("L_y must be positive, got {ly}")));
        }
        Ok(Self { nx, ny, ly })
    }

    pub fn dx(&self) -> f64 {
        TAU / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        2.0 * self.ly / self.ny as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    pub fn y(&self, j: usize) -> f64 {
        -self.ly + j as f64 * self.dy()
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }
}

impl Geometry for CartesianGrid {
    fn shape(&self) -> (usize, usize) {
        (self.ny, self.nx)
    }

    fn node(&self, row: usize, col: usize) -> Vec2 {
        Vec2::new(self.x(col), self.y(row))
    }

    fn weight(&self, _row: usize, _col: usize) -> f64 {
        self.cell_area()
    }
}

/// Annulus `[r_min, r_max] × [0, 2π)` with cell-centred radii. Rows index
/// `r`, columns index `θ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarGrid {
    pub nr: usize,
    pub ntheta: usize,
    pub r_min: f64,
    pub r_max: f64,
}

impl PolarGrid {
    pub fn new(nr: usize, ntheta: usize, r_min: f64, r_max: f64) -> Result<Self> {
        if nr < 3 || ntheta < 4 {
            return Err(Error::Geometry(format!(
                "polar grid needs nr ≥ 3 and ntheta ≥ 4, got {nr}×{ntheta}"
            )));
        }
        if !(r_min > 0.0) || !(r_max > r_min) || !r_max.is_finite() {
            return Err(Error::Geometry(format!(
                "annulus needs 0 < r_min < r_max, got [{r_min}, {r_max}]"
            )));
        }
        Ok(Self {
            nr,
            ntheta,
            r_min,
            r_max,
        })
    }

    /// Annulus `[κ^β/4, 8κ^β]` around initial data supported in `[2κ^β, 4κ^β]`.
    pub fn for_scale(kappa: f64, beta: f64, nr: usize, ntheta: usize) -> Result<Self> {
        let s = kappa.powf(beta);
        Self::new(nr, ntheta, 0.25 * s, 8.0 * s)
    }

    pub fn dr(&self) -> f64 {
        (self.r_max - self.r_min) / self.nr as f64
    }

    pub fn dtheta(&self) -> f64 {
        TAU / self.ntheta as f64
    }

    pub fn r(&self, i: usize) -> f64 {
        self.r_min + (i as f64 + 0.5) * self.dr()
    }

    /// Radius of the face between cells `i − 1` and `i`.
    pub fn r_face(&self, i: usize) -> f64 {
        self.r_min + i as f64 * self.dr()
    }

    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * self.dtheta()
    }

    /// Whether `[lo, hi]` lies inside the annulus.
    pub fn contains_annulus(&self, lo: f64, hi: f64) -> bool {
        self.r_min <= lo && hi <= self.r_max
    }
}

impl Geometry for PolarGrid {
    fn shape(&self) -> (usize, usize) {
        (self.nr, self.ntheta)
    }

    fn node(&self, row: usize, col: usize) -> Vec2 {
        Vec2::from_polar(self.r(row), self.theta(col))
    }

    fn weight(&self, row: usize, _col: usize) -> f64 {
        self.r(row) * self.dr() * self.dtheta()
    }
}

/// Values of `ρ` at the nodes of a grid at time `time`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarField<G> {
    pub grid: G,
    pub values: Vec<f64>,
    pub time: f64,
}

impl<G: Geometry> ScalarField<G> {
    pub fn from_fn<F: Fn(Vec2) -> f64>(grid: G, f: F) -> Result<Self> {
        let (rows, cols) = grid.shape();
        let mut values = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                values.push(f(grid.node(r, c)));
            }
        }
        Self::from_values(grid, values, 0.0)
    }

    pub fn from_values(grid: G, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Geometry(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        let f = Self { grid, values, time };
        f.check_finite()?;
        Ok(f)
    }

    pub fn check_finite(&self) -> Result<()> {
        if let Some(k) = self.values.iter().position(|v| !v.is_finite()) {
            let cols = self.grid.shape().1;
            return Err(Error::Domain(format!(
                "non-finite value at node ({}, {}) at t = {}",
                k / cols,
                k % cols,
                self.time
            )));
        }
        Ok(())
    }

    pub fn shape(&self) -> (usize, usize) {
        self.grid.shape()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.grid.shape().1 + col]
    }

    fn weighted_sum<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let (rows, cols) = self.grid.shape();
        let per_row: Vec<f64> = (0..rows)
            .map(|r| {
                let terms: Vec<f64> = (0..cols)
                    .map(|c| self.grid.weight(r, c) * f(self.values[r * cols + c]))
                    .collect();
                tree_sum(&terms)
            })
            .collect();
        tree_sum(&per_row)
    }

    /// `‖ρ‖²_{L²}`.
    pub fn l2_sq(&self) -> f64 {
        self.weighted_sum(|v| v * v)
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_sq().sqrt()
    }

    /// `∫ ρ`.
    pub fn mass(&self) -> f64 {
        self.weighted_sum(|v| v)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}
