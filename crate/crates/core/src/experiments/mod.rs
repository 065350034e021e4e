//! Initial data, mixing-time measurements, κ-sweeps and exponent fits.
//!
//! A mixing time is the first time on the step ladder at which the relative
//! `L²` norm drops to `θ_mix` (grid backend), or at which half the integrated
//! variance reaches `(1 − θ_mix²)·½‖ρ0‖²` (Monte Carlo backend). Sweeps fit
//! `log T` against `log κ` and compare the slope with the flow family's
//! predicted exponent.

mod bounds;
mod fit;
mod initial_data;
mod report;

use serde::{Deserialize, Serialize};

use crate::feynman_kac::{integrated_variance_ladder, QuadratureGrid};
use crate::flows::{DiffusivityModel, VelocityField};
use crate::grid::{CartesianGrid, CartesianStepper, PolarGrid, PolarStepper, ScalarField};
use crate::stochastic::SdeConfig;
use crate::{Error, Result};

pub use bounds::{
    holder_functional_scaling, variance_bound_report, FunctionalPoint, FunctionalScaling, VarianceBoundReport,
    VarianceBoundRow,
};
pub use fit::{fit_power_law, log_correction, ScalingFit, MIN_FIT_POINTS};
pub use initial_data::{beta_for_flow, build_initial_data, InitialData, InitialDataKind, Support};
pub use report::{read_sweep_csv, render_sweep_svg, write_sweep_csv, SweepRow, SWEEP_COLUMNS};

/// Flow families with a predicted rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    CriticalShear { n: u32 },
    Holder { alpha: f64 },
    Circular { q: f64 },
    Anisotropic { q: f64, gamma: f64 },
}

impl Family {
    /// Family of a flow with radial diffusivity exponent `gamma`.
    pub fn from_flow(flow: &VelocityField, gamma: f64) -> Result<Self> {
        let f = match *flow {
            VelocityField::PowerShear { n } => Family::CriticalShear { n },
            VelocityField::ConstantShear { .. } => Family::CriticalShear { n: 1 },
            VelocityField::HolderShear { alpha, .. } => Family::Holder { alpha },
            VelocityField::Circular { q } if gamma == 0.0 => Family::Circular { q },
            VelocityField::Circular { q } => Family::Anisotropic { q, gamma },
            VelocityField::Zero => return Err(Error::Spec("the zero flow has no predicted exponent".into())),
        };
        if gamma != 0.0 && !flow.is_circular() {
            return Err(Error::Spec("radial diffusivity exponent needs a circular flow".into()));
        }
        Ok(f)
    }

    /// Exponent `q/(q+2)` of the log correction for circular families.
    pub fn correction_exponent(&self) -> Option<f64> {
        match *self {
            Family::Circular { q } | Family::Anisotropic { q, .. } => Some(q / (q + 2.0)),
            _ => None,
        }
    }
}

/// `n/(n+2)`, `α/(α+2)`, `q/(q+2)` or `(q+γ)/(q+2)`.
pub fn predicted_exponent(family: &Family) -> Result<f64> {
    match *family {
        Family::CriticalShear { n } if n >= 1 => Ok(n as f64 / (n as f64 + 2.0)),
        Family::Holder { alpha } if alpha > 0.0 && alpha <= 1.0 => Ok(alpha / (alpha + 2.0)),
        Family::Circular { q } if q > 0.0 => Ok(q / (q + 2.0)),
        Family::Anisotropic { q, gamma } if q > 0.0 && (0.0..=1.0).contains(&gamma) => Ok((q + gamma) / (q + 2.0)),
        f => Err(Error::Spec(format!("parameters out of range for {f:?}"))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `γ < q`: the `κ^{q/(q+2)}` rate dominates.
    RadialDominant,
    /// `γ > q`: the `κ^{1+γ/(q+2)}` rate dominates.
    AngularDominant,
    Balanced,
}

pub fn balance_regime_classifier(q: f64, gamma: f64) -> Regime {
    if (gamma - q).abs() <= 1e-12 * q.abs().max(1.0) {
        Regime::Balanced
    } else if gamma < q {
        Regime::RadialDominant
    } else {
        Regime::AngularDominant
    }
}

/// Mixing-time slope for a regime.
pub fn regime_slope(regime: Regime, q: f64, gamma: f64) -> f64 {
    match regime {
        Regime::RadialDominant => -q / (q + 2.0),
        Regime::Balanced => -(q + gamma) / (q + 2.0),
        Regime::AngularDominant => -(1.0 + gamma / (q + 2.0)),
    }
}

/// Predicted `d log T / d log κ`; anisotropic families use the regime split.
pub fn predicted_slope(family: &Family) -> Result<f64> {
    match *family {
        Family::Anisotropic { q, gamma } => {
            predicted_exponent(family)?;
            Ok(regime_slope(balance_regime_classifier(q, gamma), q, gamma))
        }
        _ => Ok(-predicted_exponent(family)?),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[default]
    Grid,
    MonteCarlo,
}

/// How `dt` and the horizon depend on `κ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeRule {
    /// Used as given.
    #[default]
    Absolute,
    /// Multiplied by `κ^{s}` with `s` the family's predicted slope, so
    /// every sweep point takes the same number of steps in its own time scale.
    Scaled,
}

/// Half-height of the Cartesian domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum LyRule {
    Fixed {
        ly: f64,
    },
    /// `max(factor·κ^β, min)`.
    Scaled {
        factor: f64,
        min: f64,
    },
}

impl Default for LyRule {
    fn default() -> Self {
        LyRule::Scaled { factor: 8.0, min: 0.0 }
    }
}

impl LyRule {
    pub fn ly(&self, kappa: f64, beta: f64) -> f64 {
        match *self {
            LyRule::Fixed { ly } => ly,
            LyRule::Scaled { factor, min } => (factor * kappa.powf(beta)).max(min),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub nx: usize,
    pub ny: usize,
    pub ly: LyRule,
    pub nr: usize,
    pub ntheta: usize,
    /// Paths per quadrature node (Monte Carlo backend).
    pub mc_samples: usize,
    /// Quadrature nodes along x or θ.
    pub mc_nodes_a: usize,
    /// Quadrature nodes along y or r.
    pub mc_nodes_b: usize,
    /// Ladder rungs between 0 and the horizon.
    pub mc_ladder: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Self {
            nx: 256,
            ny: 256,
            ly: LyRule::default(),
            nr: 256,
            ntheta: 256,
            mc_samples: 1000,
            mc_nodes_a: 16,
            mc_nodes_b: 16,
            mc_ladder: 50,
        }
    }
}

/// Everything a κ-sweep needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub flow: VelocityField,
    /// Radial diffusivity exponent `γ` (0 for isotropic diffusion).
    pub gamma: f64,
    /// Strictly decreasing.
    pub kappas: Vec<f64>,
    pub initial_data: InitialDataKind,
    pub backend: Backend,
    pub theta_mix: f64,
    pub dt: f64,
    pub horizon: f64,
    pub time_rule: TimeRule,
    pub resolution: Resolution,
    /// `None` applies the log correction exactly for circular families.
    pub log_correction: Option<bool>,
    pub seed: u64,
}

/// `count` log-spaced values from `hi` down to `lo`.
pub fn log_spaced_kappas(hi: f64, lo: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![hi];
    }
    let (a, b) = (hi.log10(), lo.log10());
    (0..count)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64))
        .collect()
}

impl ExperimentSpec {
    /// Six κ from `10^−2.5` to `10^−5`, `θ_mix = 1/e`, desk-scale grids.
    pub fn new(flow: VelocityField, initial_data: InitialDataKind) -> Self {
        Self {
            flow,
            gamma: 0.0,
            kappas: log_spaced_kappas(10f64.powf(-2.5), 1e-5, 6),
            initial_data,
            backend: Backend::Grid,
            theta_mix: (-1.0f64).exp(),
            dt: 0.01,
            horizon: 100.0,
            time_rule: TimeRule::Absolute,
            resolution: Resolution::default(),
            log_correction: None,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.flow.validate()?;
        self.diffusivity(0.5)?;
        if self.kappas.len() < 5 {
            return Err(Error::Config(format!(
                "a sweep needs at least 5 diffusivities, got {}",
                self.kappas.len()
            )));
        }
        if self.kappas.iter().any(|k| !(*k > 0.0 && *k < 1.0)) {
            return Err(Error::Config("every κ must lie in (0, 1)".into()));
        }
        if self.kappas.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("κ values must be strictly decreasing".into()));
        }
        self.check_run_params()
    }

    fn check_run_params(&self) -> Result<()> {
        if !(self.theta_mix > 0.0 && self.theta_mix < 1.0) {
            return Err(Error::Config(format!("θ_mix = {} not in (0, 1)", self.theta_mix)));
        }
        if !(self.dt > 0.0) || !(self.horizon >= self.dt) {
            return Err(Error::Config("need 0 < dt ≤ horizon".into()));
        }
        Ok(())
    }

    pub fn family(&self) -> Result<Family> {
        Family::from_flow(&self.flow, self.gamma)
    }

    pub fn diffusivity(&self, kappa: f64) -> Result<DiffusivityModel> {
        let d = if self.gamma == 0.0 {
            DiffusivityModel::isotropic(kappa)
        } else {
            DiffusivityModel::anisotropic(kappa, self.gamma)
        };
        d.validate()?;
        Ok(d)
    }

    /// `(dt, horizon)` at diffusivity `kappa`.
    pub fn time_params(&self, kappa: f64) -> Result<(f64, f64)> {
        match self.time_rule {
            TimeRule::Absolute => Ok((self.dt, self.horizon)),
            TimeRule::Scaled => {
                let s = kappa.powf(predicted_slope(&self.family()?)?);
                Ok((self.dt * s, self.horizon * s))
            }
        }
    }

    /// Exponent of the log correction used in fits, if any.
    pub fn correction(&self) -> Result<Option<f64>> {
        let auto = match self.flow {
            VelocityField::Zero => None,
            _ => self.family()?.correction_exponent(),
        };
        Ok(match self.log_correction {
            None => auto,
            Some(false) => None,
            Some(true) => {
                Some(auto.ok_or_else(|| Error::Spec("log correction only defined for circular families".into()))?)
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingTime {
    pub kappa: f64,
    /// Crossing time, or the horizon reached when censored.
    pub t: f64,
    pub censored: bool,
}

fn steps_for(horizon: f64, dt: f64) -> usize {
    ((horizon / dt) - 1e-9).ceil().max(1.0) as usize
}

fn mixing_cartesian(spec: &ExperimentSpec, data: &InitialData, kappa: f64) -> Result<MixingTime> {
    if spec.gamma != 0.0 {
        return Err(Error::Config(
            "radial diffusivity exponent needs a circular flow".into(),
        ));
    }
    let (dt, horizon) = spec.time_params(kappa)?;
    let r = &spec.resolution;
    let grid = CartesianGrid::new(r.nx, r.ny, r.ly.ly(kappa, data.beta))?;
    let mut f = ScalarField::from_fn(grid, |p| data.eval(p))?;
    let stepper = CartesianStepper::new(grid, &spec.flow, kappa, dt)?;
    let target = spec.theta_mix * f.l2_norm();
    let n = steps_for(horizon, dt);
    for k in 1..=n {
        stepper.step(&mut f)?;
        if f.l2_norm() <= target {
            return Ok(MixingTime {
                kappa,
                t: k as f64 * dt,
                censored: false,
            });
        }
    }
    Ok(MixingTime {
        kappa,
        t: n as f64 * dt,
        censored: true,
    })
}

fn polar_grid(spec: &ExperimentSpec, data: &InitialData, kappa: f64) -> Result<PolarGrid> {
    let r = &spec.resolution;
    PolarGrid::for_scale(kappa, data.beta, r.nr, r.ntheta)
}

fn mixing_polar(spec: &ExperimentSpec, data: &InitialData, kappa: f64) -> Result<MixingTime> {
    let VelocityField::Circular { q } = spec.flow else {
        return Err(Error::Spec("polar runs need a circular flow".into()));
    };
    let (dt, horizon) = spec.time_params(kappa)?;
    let grid = polar_grid(spec, data, kappa)?;
    let f = ScalarField::from_fn(grid, |p| data.eval(p))?;
    let stepper = PolarStepper::new(grid, q, &spec.diffusivity(kappa)?, dt)?;
    let mut s = stepper.to_spectral(&f)?;
    let target = spec.theta_mix * spec.theta_mix * stepper.l2_sq(&s);
    let n = steps_for(horizon, dt);
    for k in 1..=n {
        stepper.advance(&mut s, 1);
        if stepper.l2_sq(&s) <= target {
            return Ok(MixingTime {
                kappa,
                t: k as f64 * dt,
                censored: false,
            });
        }
    }
    Ok(MixingTime {
        kappa,
        t: n as f64 * dt,
        censored: true,
    })
}

/// Quadrature covering the grid backend's domain at `kappa`.
pub fn mc_quadrature(spec: &ExperimentSpec, data: &InitialData, kappa: f64) -> Result<QuadratureGrid> {
    let r = &spec.resolution;
    if spec.flow.is_circular() {
        let g = polar_grid(spec, data, kappa)?;
        QuadratureGrid::annulus(g.r_min, g.r_max, r.mc_nodes_b, r.mc_nodes_a)
    } else {
        let ly = r.ly.ly(kappa, data.beta);
        QuadratureGrid::periodic_strip(r.mc_nodes_a, -ly, ly, r.mc_nodes_b)
    }
}

fn mixing_monte_carlo(spec: &ExperimentSpec, data: &InitialData, kappa: f64) -> Result<MixingTime> {
    let (dt, horizon) = spec.time_params(kappa)?;
    let quad = mc_quadrature(spec, data, kappa)?;
    let cfg = SdeConfig::new(dt, horizon)?;
    let m = spec.resolution.mc_ladder.max(1);
    let times: Vec<f64> = (1..=m).map(|i| horizon * i as f64 / m as f64).collect();
    let rho0 = |p| data.eval(p);
    let ladder = integrated_variance_ladder(
        rho0,
        &spec.flow,
        &spec.diffusivity(kappa)?,
        &quad,
        &cfg,
        &times,
        spec.resolution.mc_samples,
        spec.seed,
    )?;
    let half_norm = 0.5 * quad.integrate(|p| data.eval(p).powi(2));
    let target = (1.0 - spec.theta_mix * spec.theta_mix) * half_norm;
    Ok(match ladder.iter().find(|p| p.value >= target) {
        Some(p) => MixingTime {
            kappa,
            t: p.time,
            censored: false,
        },
        None => MixingTime {
            kappa,
            t: ladder.last().map_or(horizon, |p| p.time),
            censored: true,
        },
    })
}

/// Mixing time of `spec`'s problem at diffusivity `kappa`.
pub fn measure_mixing_time(spec: &ExperimentSpec, kappa: f64) -> Result<MixingTime> {
    spec.flow.validate()?;
    spec.check_run_params()?;
    let data = build_initial_data(spec.initial_data, &spec.flow, kappa)?;
    match (spec.backend, spec.flow.is_circular()) {
        (Backend::Grid, false) => mixing_cartesian(spec, &data, kappa),
        (Backend::Grid, true) => mixing_polar(spec, &data, kappa),
        (Backend::MonteCarlo, _) => mixing_monte_carlo(spec, &data, kappa),
    }
}

/// Mixing times for every κ of the spec, in κ order.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<Vec<MixingTime>> {
    spec.validate()?;
    spec.kappas.iter().map(|&k| measure_mixing_time(spec, k)).collect()
}

/// Fit over the uncensored points of a sweep.
pub fn fit_sweep(spec: &ExperimentSpec, rows: &[MixingTime]) -> Result<ScalingFit> {
    let (kept, censored): (Vec<&MixingTime>, Vec<&MixingTime>) = rows.iter().partition(|r| !r.censored);
    if kept.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData {
            usable: kept.len(),
            needed: MIN_FIT_POINTS,
            censored: censored.iter().map(|r| r.kappa).collect(),
        });
    }
    let ks: Vec<f64> = kept.iter().map(|r| r.kappa).collect();
    let ts: Vec<f64> = kept.iter().map(|r| r.t).collect();
    fit_power_law(&ks, &ts, spec.correction()?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<MixingTime>,
    pub fit: ScalingFit,
    pub predicted_slope: f64,
}

impl SweepResult {
    /// `|slope_fit − slope_pred|`.
    pub fn slope_error(&self) -> f64 {
        (self.fit.slope - self.predicted_slope).abs()
    }
}

pub fn sweep_and_fit(spec: &ExperimentSpec) -> Result<SweepResult> {
    let predicted_slope = predicted_slope(&spec.family()?)?;
    let rows = run_sweep(spec)?;
    let fit = fit_sweep(spec, &rows)?;
    Ok(SweepResult {
        rows,
        fit,
        predicted_slope,
    })
}

/// Exact `T(κ) = C κ^slope`, times the log correction when `correction` is set.
pub fn synthetic_times(kappas: &[f64], slope: f64, prefactor: f64, correction: Option<f64>) -> Vec<MixingTime> {
    kappas
        .iter()
        .map(|&k| MixingTime {
            kappa: k,
            t: prefactor * k.powf(slope) * correction.map_or(1.0, |p| log_correction(k, p)),
            censored: false,
        })
        .collect()
}
