//! Stepper for `∂t ρ + r^q ∂θ ρ = κ r^γ (∂rr + r⁻¹∂r + r⁻²∂θθ) ρ` on an
//! annulus with no-flux radial walls.
//!
//! Each angular Fourier mode `m` evolves independently: a Strang step is a
//! backward-Euler half step of the radial operator, the exact phase
//! `e^{−i m r^q dt}` of the angular transport, and another half step. The
//! state therefore stays in θ-Fourier space across steps and is transformed
//! back only on request.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::spectral::signed_freq;
use super::{PolarGrid, ScalarField};
use crate::flows::{DiffusivityModel, VelocityField};
use crate::par::{map_indexed, tree_sum};
use crate::{Error, Result};

type Field = ScalarField<PolarGrid>;

/// Thomas factorisation of one tridiagonal radial system.
#[derive(Clone, Debug)]
struct Tridiag {
    sub: Vec<f64>,
    c_prime: Vec<f64>,
    inv_den: Vec<f64>,
}

impl Tridiag {
    fn factor(sub: Vec<f64>, diag: &[f64], sup: &[f64]) -> Self {
        let n = diag.len();
        let mut c_prime = vec![0.0; n];
        let mut inv_den = vec![0.0; n];
        inv_den[0] = 1.0 / diag[0];
        c_prime[0] = sup[0] * inv_den[0];
        for i in 1..n {
            let den = diag[i] - sub[i] * c_prime[i - 1];
            inv_den[i] = 1.0 / den;
            c_prime[i] = sup[i] * inv_den[i];
        }
        Self { sub, c_prime, inv_den }
    }

    fn solve(&self, d: &mut [Complex64]) {
        let n = d.len();
        d[0] *= self.inv_den[0];
        for i in 1..n {
            d[i] = (d[i] - d[i - 1] * self.sub[i]) * self.inv_den[i];
        }
        for i in (0..n - 1).rev() {
            d[i] -= d[i + 1] * self.c_prime[i];
        }
    }
}

/// Angular-mode state of a polar field: `modes[m * nr + i] = ρ̂_m(r_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarState {
    pub modes: Vec<Complex64>,
    pub time: f64,
    active: Vec<bool>,
}

/// Reusable polar stepper with cached factorisations and phases.
#[derive(Clone)]
pub struct PolarStepper {
    grid: PolarGrid,
    dt: f64,
    factors: Vec<Tridiag>,
    phase: Vec<Complex64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PolarStepper {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PolarStepper")
            .field("grid", &self.grid)
            .field("dt", &self.dt)
            .finish()
    }
}

impl PolarStepper {
    /// `dt · max r^q ≤ π` keeps the angular displacement per step below half
    /// a turn; every sub-step is exact or implicit, so this bounds splitting
    /// error rather than stability.
    pub fn new(grid: PolarGrid, q: f64, diff: &DiffusivityModel, dt: f64) -> Result<Self> {
        VelocityField::Circular { q }.validate()?;
        diff.validate()?;
        let max_rate = grid.r_max.powf(q);
        let limit = std::f64::consts::PI / max_rate;
        if !(dt > 0.0) || !dt.is_finite() || dt > limit {
            return Err(Error::TimeStep {
                dt,
                suggested: limit,
                reason: format!("angular displacement per step must stay below π (max r^q = {max_rate})"),
            });
        }
        let (nr, nt) = (grid.nr, grid.ntheta);
        let dr2 = grid.dr() * grid.dr();
        let h = 0.5 * dt;
        let mut factors = Vec::with_capacity(nt / 2 + 1);
        for m in 0..=nt / 2 {
            let m2 = (m * m) as f64;
            let mut sub = vec![0.0; nr];
            let mut diag = vec![0.0; nr];
            let mut sup = vec![0.0; nr];
            for i in 0..nr {
                let r = grid.r(i);
                let w = diff.at_radius(r);
                let kp = if i + 1 < nr {
                    grid.r_face(i + 1) / (r * dr2)
                } else {
                    0.0
                };
                let km = if i > 0 { grid.r_face(i) / (r * dr2) } else { 0.0 };
                sub[i] = -h * w * km;
                sup[i] = -h * w * kp;
                diag[i] = 1.0 + h * w * (kp + km + m2 / (r * r));
            }
            factors.push(Tridiag::factor(sub, &diag, &sup));
        }
        let mut phase = Vec::with_capacity(nt * nr);
        for mi in 0..nt {
            let m = signed_freq(mi, nt);
            for i in 0..nr {
                let a = -m * grid.r(i).powf(q) * dt;
                phase.push(Complex64::from_polar(1.0, a));
            }
        }
        let mut p = FftPlanner::new();
        Ok(Self {
            grid,
            dt,
            factors,
            phase,
            fwd: p.plan_fft_forward(nt),
            inv: p.plan_fft_inverse(nt),
        })
    }

    pub fn grid(&self) -> &PolarGrid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn check_grid(&self, f: &Field) -> Result<()> {
        if f.grid != self.grid {
            return Err(Error::Geometry("field grid differs from stepper grid".into()));
        }
        Ok(())
    }

    pub fn to_spectral(&self, f: &Field) -> Result<PolarState> {
        self.check_grid(f)?;
        let (nr, nt) = (self.grid.nr, self.grid.ntheta);
        let mut rows: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fwd.process(&mut rows);
        let mut modes = vec![Complex64::default(); nr * nt];
        for i in 0..nr {
            for m in 0..nt {
                modes[m * nr + i] = rows[i * nt + m];
            }
        }
        // modes at round-off level relative to the largest are dropped
        let peak = modes.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let floor = 1e-13 * peak;
        let mut active = Vec::with_capacity(nt);
        for m in 0..nt {
            let block = &mut modes[m * nr..(m + 1) * nr];
            let keep = block.iter().any(|z| z.norm() > floor);
            if !keep {
                block.fill(Complex64::default());
            }
            active.push(keep);
        }
        Ok(PolarState {
            modes,
            time: f.time,
            active,
        })
    }

    pub fn to_field(&self, s: &PolarState) -> Result<Field> {
        let (nr, nt) = (self.grid.nr, self.grid.ntheta);
        let mut rows = vec![Complex64::default(); nr * nt];
        for m in 0..nt {
            for i in 0..nr {
                rows[i * nt + m] = s.modes[m * nr + i];
            }
        }
        self.inv.process(&mut rows);
        let scale = 1.0 / nt as f64;
        let values = rows.iter().map(|z| z.re * scale).collect();
        ScalarField::from_values(self.grid, values, s.time)
    }

    /// Advances the state by `n` Strang steps.
    pub fn advance(&self, s: &mut PolarState, n: usize) {
        let (nr, nt) = (self.grid.nr, self.grid.ntheta);
        let updated = map_indexed(nt, |mi| {
            let mut v = s.modes[mi * nr..(mi + 1) * nr].to_vec();
            if !s.active[mi] {
                return v;
            }
            let f = &self.factors[signed_freq(mi, nt).abs() as usize];
            let ph = &self.phase[mi * nr..(mi + 1) * nr];
            for _ in 0..n {
                f.solve(&mut v);
                v.iter_mut().zip(ph).for_each(|(z, p)| *z *= p);
                f.solve(&mut v);
            }
            v
        });
        for (mi, v) in updated.into_iter().enumerate() {
            s.modes[mi * nr..(mi + 1) * nr].copy_from_slice(&v);
        }
        s.time += n as f64 * self.dt;
    }

    /// `∫ ρ² r dr dθ` from the mode amplitudes (Parseval).
    pub fn l2_sq(&self, s: &PolarState) -> f64 {
        let (nr, nt) = (self.grid.nr, self.grid.ntheta);
        let w = self.grid.dr() * self.grid.dtheta() / nt as f64;
        let per_r: Vec<f64> = (0..nr)
            .map(|i| {
                let e: Vec<f64> = (0..nt).map(|m| s.modes[m * nr + i].norm_sqr()).collect();
                self.grid.r(i) * w * tree_sum(&e)
            })
            .collect();
        tree_sum(&per_r)
    }

    /// One step applied to a physical-space field.
    pub fn step(&self, f: &mut Field) -> Result<()> {
        self.run(f, 1)
    }

    pub fn run(&self, f: &mut Field, n: usize) -> Result<()> {
        let mut s = self.to_spectral(f)?;
        self.advance(&mut s, n);
        *f = self.to_field(&s)?;
        Ok(())
    }
}

/// One polar Strang step.
pub fn step_polar(fieldval: &Field, q: f64, diff: &DiffusivityModel, dt: f64) -> Result<Field> {
    let s = PolarStepper::new(fieldval.grid, q, diff, dt)?;
    let mut out = fieldval.clone();
    s.step(&mut out)?;
    Ok(out)
}
