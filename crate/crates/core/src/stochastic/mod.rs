//! Euler–Maruyama simulation of the stochastic characteristics
//! `dX = u(X) ds + √(2κ) dB`.
//!
//! The flows are autonomous, so the backward process that enters the
//! Feynman-Kac formula has the same law as a forward run of duration `t`
//! started at the evaluation point; that forward run is what we simulate.
//!
//! Shear flows live on `T × R` (x wrapped to `[0, 2π)`, y unbounded).
//! Circular flows and radially anisotropic diffusion live in the plane, in
//! Cartesian coordinates, with a reflecting barrier at `r = 1e-6` to keep
//! the coordinate singularity out of reach.

mod rng;

pub use rng::{mix_seed, NoiseStream};

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::flows::{DiffusivityModel, Vec2, VelocityField};
use crate::par::map_indexed;
use crate::stats::SampleMoments;
use crate::{Error, Result};

/// Radius of the reflecting barrier used by planar (circular) domains.
pub const INNER_REFLECTION_RADIUS: f64 = 1e-6;

/// Scaling of the Brownian increment.
///
/// Only `SqrtTwoKappa` solves the advection-diffusion equation; `TwoKappa`
/// exists so validation can check that a wrong amplitude is detected.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseAmplitude {
    #[default]
    SqrtTwoKappa,
    #[doc(hidden)]
    TwoKappa,
}

impl NoiseAmplitude {
    #[inline]
    fn amplitude(self, kappa: f64, h: f64) -> f64 {
        match self {
            NoiseAmplitude::SqrtTwoKappa => (2.0 * kappa * h).sqrt(),
            NoiseAmplitude::TwoKappa => 2.0 * kappa * h.sqrt(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdeConfig {
    pub dt: f64,
    pub t_final: f64,
    #[serde(default)]
    pub noise: NoiseAmplitude,
}

impl SdeConfig {
    pub fn new(dt: f64, t_final: f64) -> Result<Self> {
        let cfg = Self {
            dt,
            t_final,
            noise: NoiseAmplitude::SqrtTwoKappa,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_noise(mut self, noise: NoiseAmplitude) -> Self {
        self.noise = noise;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("SDE time step dt = {} must be > 0", self.dt)));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::Config(format!(
                "SDE horizon t_final = {} must be > 0",
                self.t_final
            )));
        }
        if self.dt > self.t_final {
            return Err(Error::Config(format!(
                "SDE time step {} exceeds horizon {}",
                self.dt, self.t_final
            )));
        }
        Ok(())
    }

    /// `ceil(t_final / dt)`, ignoring round-off just above an integer.
    pub fn n_steps(&self) -> usize {
        let ratio = self.t_final / self.dt;
        ((ratio - 1e-9 * ratio.max(1.0)).ceil() as usize).max(1)
    }

    /// Size of step `k`; the last step is shortened so the steps sum to `t_final`.
    #[inline]
    pub fn step_size(&self, k: usize) -> f64 {
        let n = self.n_steps();
        if k + 1 < n {
            self.dt
        } else {
            self.t_final - (n - 1) as f64 * self.dt
        }
    }

    /// Time reached after `k` steps.
    pub fn time_after(&self, k: usize) -> f64 {
        let n = self.n_steps();
        if k >= n {
            self.t_final
        } else {
            k as f64 * self.dt
        }
    }
}

/// Where a path lives and how positions are folded back into it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathDomain {
    /// `T × R`: x periodic with period 2π.
    PeriodicX,
    /// The plane with a reflecting disk of radius [`INNER_REFLECTION_RADIUS`].
    Plane,
}

impl PathDomain {
    pub fn for_problem(field: &VelocityField, diff: &DiffusivityModel) -> Result<Self> {
        match (field, diff) {
            (VelocityField::Circular { .. }, _) => Ok(PathDomain::Plane),
            (VelocityField::Zero, DiffusivityModel::AnisotropicRadial { .. }) => Ok(PathDomain::Plane),
            (_, DiffusivityModel::AnisotropicRadial { gamma, .. }) if *gamma != 0.0 => Err(Error::Config(format!(
                "radially anisotropic diffusion needs a planar flow, got {}",
                field.kind()
            ))),
            _ => Ok(PathDomain::PeriodicX),
        }
    }

    #[inline]
    fn fold(self, p: Vec2, previous: Vec2) -> Vec2 {
        match self {
            PathDomain::PeriodicX => Vec2::new(p.x.rem_euclid(TAU), p.y),
            PathDomain::Plane => {
                let r = p.norm();
                if r >= INNER_REFLECTION_RADIUS {
                    p
                } else if r > 0.0 {
                    p * ((2.0 * INNER_REFLECTION_RADIUS - r) / r)
                } else {
                    let pr = previous.norm();
                    let dir = if pr > 0.0 {
                        previous * (1.0 / pr)
                    } else {
                        Vec2::new(1.0, 0.0)
                    };
                    dir * INNER_REFLECTION_RADIUS
                }
            }
        }
    }

    /// Squared distance, using the minimum image along periodic directions.
    #[inline]
    pub fn distance_sq(self, a: Vec2, b: Vec2) -> f64 {
        match self {
            PathDomain::PeriodicX => {
                let mut dx = (a.x - b.x).rem_euclid(TAU);
                if dx > 0.5 * TAU {
                    dx -= TAU;
                }
                let dy = a.y - b.y;
                dx * dx + dy * dy
            }
            PathDomain::Plane => (a - b).norm_sq(),
        }
    }

    pub fn contains(self, p: Vec2) -> bool {
        match self {
            PathDomain::PeriodicX => p.x.is_finite() && p.y.is_finite(),
            PathDomain::Plane => p.norm() > 0.0 && p.x.is_finite() && p.y.is_finite(),
        }
    }
}

/// One Euler–Maruyama integrator bound to a flow, diffusivity and domain.
#[derive(Clone, Copy, Debug)]
pub struct EulerMaruyama<'a> {
    field: &'a VelocityField,
    diff: &'a DiffusivityModel,
    domain: PathDomain,
    noise: NoiseAmplitude,
}

impl<'a> EulerMaruyama<'a> {
    pub fn new(field: &'a VelocityField, diff: &'a DiffusivityModel, noise: NoiseAmplitude) -> Result<Self> {
        field.validate()?;
        diff.validate()?;
        Ok(Self {
            field,
            diff,
            domain: PathDomain::for_problem(field, diff)?,
            noise,
        })
    }

    pub fn domain(&self) -> PathDomain {
        self.domain
    }

    /// `X + u(X) h + amplitude(κ(X), h) ξ`, folded back into the domain.
    #[inline]
    pub fn step(&self, x: Vec2, h: f64, xi: (f64, f64)) -> Result<Vec2> {
        let u = self.field.velocity(x)?;
        let kappa = match self.diff {
            DiffusivityModel::Isotropic { kappa } => *kappa,
            other => other.at_radius(x.norm()),
        };
        let a = if kappa > 0.0 {
            self.noise.amplitude(kappa, h)
        } else {
            0.0
        };
        let next = Vec2::new(x.x + u.x * h + a * xi.0, x.y + u.y * h + a * xi.1);
        Ok(self.domain.fold(next, x))
    }

    fn check_start(&self, x0: Vec2) -> Result<Vec2> {
        if !self.domain.contains(x0) {
            return Err(Error::Domain(format!(
                "start point ({}, {}) outside the {} domain",
                x0.x,
                x0.y,
                self.field.kind()
            )));
        }
        Ok(self.domain.fold(x0, x0))
    }

    /// Runs one path and calls `observe(k, x_k)` after every step `k = 1..=n`.
    pub fn run_observed<F>(&self, x0: Vec2, cfg: &SdeConfig, seed: u64, mut observe: F) -> Result<Vec2>
    where
        F: FnMut(usize, Vec2),
    {
        cfg.validate()?;
        let mut x = self.check_start(x0)?;
        let mut noise = NoiseStream::new(seed);
        let n = cfg.n_steps();
        for k in 0..n {
            let xi = noise.normal_pair();
            x = self.step(x, cfg.step_size(k), xi)?;
            observe(k + 1, x);
        }
        Ok(x)
    }

    pub fn run(&self, x0: Vec2, cfg: &SdeConfig, seed: u64) -> Result<Vec2> {
        self.run_observed(x0, cfg, seed, |_, _| {})
    }
}

/// Terminal point of one seeded path.
pub fn simulate_trajectory(
    field: &VelocityField,
    diff: &DiffusivityModel,
    x0: Vec2,
    cfg: &SdeConfig,
    seed: u64,
) -> Result<Vec2> {
    EulerMaruyama::new(field, diff, cfg.noise)?.run(x0, cfg, seed)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryEnsemble {
    pub start_point: Vec2,
    pub terminal_points: Vec<Vec2>,
    pub base_seed: u64,
    pub n_samples: usize,
}

impl TrajectoryEnsemble {
    pub fn is_empty(&self) -> bool {
        self.terminal_points.is_empty()
    }

    /// Per-coordinate sample means and unbiased variances of the terminal points.
    pub fn coordinate_moments(&self) -> (SampleMoments, SampleMoments) {
        let xs: Vec<f64> = self.terminal_points.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = self.terminal_points.iter().map(|p| p.y).collect();
        (SampleMoments::from_slice(&xs), SampleMoments::from_slice(&ys))
    }
}

/// `n_samples` paths from `x0`; sample `i` uses seed `mix_seed(base_seed, i)`.
pub fn simulate_ensemble(
    field: &VelocityField,
    diff: &DiffusivityModel,
    x0: Vec2,
    cfg: &SdeConfig,
    base_seed: u64,
    n_samples: usize,
) -> Result<TrajectoryEnsemble> {
    if n_samples == 0 {
        return Err(Error::Config("ensemble needs at least one sample".into()));
    }
    let em = EulerMaruyama::new(field, diff, cfg.noise)?;
    cfg.validate()?;
    let terminal_points = map_indexed(n_samples, |i| em.run(x0, cfg, mix_seed(base_seed, i as u64)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(TrajectoryEnsemble {
        start_point: x0,
        terminal_points,
        base_seed,
        n_samples,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// Each particle gets its own Brownian motion.
    IndependentNoise,
    /// Both particles are driven by the same Brownian increments.
    CommonNoise,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationEstimate {
    pub value: f64,
    pub standard_error: f64,
    pub n_pairs: usize,
    pub coupling: Coupling,
}

impl SeparationEstimate {
    fn from_samples(samples: &[f64], coupling: Coupling) -> Self {
        let m = SampleMoments::from_slice(samples);
        Self {
            value: m.mean.max(0.0),
            standard_error: m.mean_se(),
            n_pairs: samples.len(),
            coupling,
        }
    }
}

/// Monte Carlo estimate of `E|X_t(x) − X_t(y)|²`.
#[allow(clippy::too_many_arguments)]
pub fn two_point_separation(
    field: &VelocityField,
    diff: &DiffusivityModel,
    x: Vec2,
    y: Vec2,
    cfg: &SdeConfig,
    coupling: Coupling,
    n_pairs: usize,
    seed: u64,
) -> Result<SeparationEstimate> {
    if n_pairs == 0 {
        return Err(Error::Config("separation estimate needs at least one pair".into()));
    }
    let em = EulerMaruyama::new(field, diff, cfg.noise)?;
    cfg.validate()?;
    let domain = em.domain();
    let samples = map_indexed(n_pairs, |i| -> Result<f64> {
        let (sa, sb) = match coupling {
            Coupling::CommonNoise => {
                let s = mix_seed(seed, i as u64);
                (s, s)
            }
            Coupling::IndependentNoise => (mix_seed(seed, 2 * i as u64), mix_seed(seed, 2 * i as u64 + 1)),
        };
        let a = em.run(x, cfg, sa)?;
        let b = em.run(y, cfg, sb)?;
        Ok(domain.distance_sq(a, b))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(SeparationEstimate::from_samples(&samples, coupling))
}

/// Monte Carlo estimate of
/// `E |∫₀ᵗ u(y + √(2κ) W¹_τ) − u(y + √(2κ) W²_τ) dτ|²`
/// for two independent scalar Brownian motions, using a left-endpoint sum
/// on the `cfg` time grid.
pub fn shear_increment_functional(
    field: &VelocityField,
    kappa: f64,
    y: f64,
    cfg: &SdeConfig,
    n_pairs: usize,
    seed: u64,
) -> Result<SeparationEstimate> {
    match field {
        VelocityField::PowerShear { .. } | VelocityField::HolderShear { .. } | VelocityField::ConstantShear { .. } => {}
        other => {
            return Err(Error::UnsupportedVariant(format!(
                "increment functional needs a shear flow, got {}",
                other.kind()
            )))
        }
    }
    field.validate()?;
    cfg.validate()?;
    if !(kappa >= 0.0) {
        return Err(Error::Config(format!("kappa = {kappa} must be >= 0")));
    }
    if n_pairs == 0 {
        return Err(Error::Config("increment functional needs at least one pair".into()));
    }
    let u = |z: f64| field.shear_profile(z).unwrap_or(0.0);
    let scale = (2.0 * kappa).sqrt();
    let n = cfg.n_steps();
    let samples = map_indexed(n_pairs, |i| {
        let mut noise = NoiseStream::new(mix_seed(seed, i as u64));
        let (mut w1, mut w2) = (0.0f64, 0.0f64);
        let mut integral = 0.0;
        for k in 0..n {
            let h = cfg.step_size(k);
            integral += h * (u(y + scale * w1) - u(y + scale * w2));
            let (a, b) = noise.normal_pair();
            let sh = h.sqrt();
            w1 += sh * a;
            w2 += sh * b;
        }
        integral * integral
    });
    Ok(SeparationEstimate::from_samples(&samples, Coupling::IndependentNoise))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero() -> VelocityField {
        VelocityField::Zero
    }

    #[test]
    fn step_schedule_sums_to_horizon() {
        let cfg = SdeConfig::new(0.3, 1.0).unwrap();
        assert_eq!(cfg.n_steps(), 4);
        let total: f64 = (0..cfg.n_steps()).map(|k| cfg.step_size(k)).sum();
        assert!((total - 1.0).abs() < 1e-15);
        assert!((cfg.step_size(3) - 0.1).abs() < 1e-15);
        let cfg = SdeConfig::new(0.01, 1.0).unwrap();
        assert_eq!(cfg.n_steps(), 100);
    }

    #[test]
    fn invalid_time_step_is_rejected() {
        assert!(matches!(SdeConfig::new(0.0, 1.0), Err(Error::Config(_))));
        assert!(matches!(SdeConfig::new(-1.0, 1.0), Err(Error::Config(_))));
        assert!(matches!(SdeConfig::new(2.0, 1.0), Err(Error::Config(_))));
    }

    #[test]
    fn frozen_without_drift_or_noise() {
        let cfg = SdeConfig::new(0.01, 1.0).unwrap();
        let x0 = Vec2::new(1.25, -0.5);
        let x = simulate_trajectory(&zero(), &DiffusivityModel::isotropic(0.0), x0, &cfg, 9).unwrap();
        assert_eq!(x, x0);
    }

    #[test]
    fn deterministic_transport_by_constant_drift() {
        // a particle held at height c by zero noise moves with speed c
        let c = 0.4;
        let field = VelocityField::ConstantShear { s: 1.0 };
        let cfg = SdeConfig::new(0.01, 2.0).unwrap();
        let x0 = Vec2::new(1.0, c);
        let x = simulate_trajectory(&field, &DiffusivityModel::isotropic(0.0), x0, &cfg, 1).unwrap();
        assert!((x.x - (1.0 + 2.0 * c)).abs() < 1e-12);
        assert_eq!(x.y, c);
    }

    #[test]
    fn singleton_ensemble_matches_trajectory() {
        let cfg = SdeConfig::new(0.01, 0.5).unwrap();
        let d = DiffusivityModel::isotropic(0.05);
        let x0 = Vec2::new(3.0, 0.0);
        let e = simulate_ensemble(&zero(), &d, x0, &cfg, 77, 1).unwrap();
        let t = simulate_trajectory(&zero(), &d, x0, &cfg, mix_seed(77, 0)).unwrap();
        assert_eq!(e.terminal_points[0], t);
    }

    #[test]
    fn ensembles_are_reproducible() {
        let cfg = SdeConfig::new(0.05, 1.0).unwrap();
        let d = DiffusivityModel::isotropic(0.05);
        let f = VelocityField::PowerShear { n: 2 };
        let a = simulate_ensemble(&f, &d, Vec2::new(1.0, 0.2), &cfg, 5, 300).unwrap();
        let b = simulate_ensemble(&f, &d, Vec2::new(1.0, 0.2), &cfg, 5, 300).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_diffusivity_collapses_ensemble() {
        let cfg = SdeConfig::new(0.05, 1.0).unwrap();
        let f = VelocityField::Circular { q: 1.5 };
        let e = simulate_ensemble(&f, &DiffusivityModel::isotropic(0.0), Vec2::new(0.5, 0.1), &cfg, 5, 64).unwrap();
        assert!(e.terminal_points.iter().all(|p| *p == e.terminal_points[0]));
    }

    #[test]
    fn circular_start_at_origin_is_a_domain_error() {
        let cfg = SdeConfig::new(0.05, 1.0).unwrap();
        let f = VelocityField::Circular { q: 1.0 };
        let r = simulate_trajectory(&f, &DiffusivityModel::isotropic(0.1), Vec2::ZERO, &cfg, 0);
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn circular_paths_stay_outside_the_barrier() {
        let cfg = SdeConfig::new(0.01, 1.0).unwrap();
        let f = VelocityField::Circular { q: 1.0 };
        let d = DiffusivityModel::isotropic(0.2);
        let em = EulerMaruyama::new(&f, &d, NoiseAmplitude::SqrtTwoKappa).unwrap();
        for s in 0..200 {
            em.run_observed(Vec2::new(1e-3, 0.0), &cfg, s, |_, x| {
                assert!(x.norm() >= INNER_REFLECTION_RADIUS * (1.0 - 1e-12));
            })
            .unwrap();
        }
    }

    #[test]
    fn rotation_without_noise_preserves_radius_to_first_order() {
        let cfg = SdeConfig::new(1e-4, 1.0).unwrap();
        let f = VelocityField::Circular { q: 0.0001 };
        let x = simulate_trajectory(&f, &DiffusivityModel::isotropic(0.0), Vec2::new(1.0, 0.0), &cfg, 0).unwrap();
        // forward Euler on a rotation grows r by (1 + h²)^{n/2}
        assert!((x.norm() - 1.0).abs() < 1e-3);
        assert!((x.angle() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn frozen_separation_without_noise() {
        let cfg = SdeConfig::new(0.1, 1.0).unwrap();
        let x = Vec2::new(1.0, 0.0);
        let y = Vec2::new(1.5, 0.3);
        let s = two_point_separation(
            &zero(),
            &DiffusivityModel::isotropic(0.0),
            x,
            y,
            &cfg,
            Coupling::IndependentNoise,
            50,
            1,
        )
        .unwrap();
        assert!((s.value - 0.34).abs() < 1e-12);
        assert!(s.standard_error < 1e-12);
    }

    #[test]
    fn common_noise_cancels_exactly() {
        let cfg = SdeConfig::new(0.01, 1.0).unwrap();
        for kappa in [0.01, 0.2] {
            let s = two_point_separation(
                &zero(),
                &DiffusivityModel::isotropic(kappa),
                Vec2::new(2.0, 0.0),
                Vec2::new(2.5, -0.2),
                &cfg,
                Coupling::CommonNoise,
                200,
                3,
            )
            .unwrap();
            assert!((s.value - 0.29).abs() < 1e-12, "kappa {kappa}: {}", s.value);
        }
    }

    #[test]
    fn increment_functional_rejects_non_shear() {
        let cfg = SdeConfig::new(0.1, 1.0).unwrap();
        for f in [VelocityField::Zero, VelocityField::Circular { q: 1.0 }] {
            let r = shear_increment_functional(&f, 0.01, 0.0, &cfg, 10, 0);
            assert!(matches!(r, Err(Error::UnsupportedVariant(_))));
        }
    }

    #[test]
    fn increment_functional_vanishes_without_noise() {
        let cfg = SdeConfig::new(0.01, 1.0).unwrap();
        let f = VelocityField::HolderShear { alpha: 0.5, c: 1.0 };
        let s = shear_increment_functional(&f, 0.0, 0.3, &cfg, 100, 0).unwrap();
        assert_eq!(s.value, 0.0);
    }
}
