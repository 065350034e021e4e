//! Fitted-constant checks of the variance bound for critical shears and of
//! the Hölder increment functional's scaling.

use serde::{Deserialize, Serialize};

use super::initial_data::build_initial_data;
use super::{ExperimentSpec, InitialDataKind};
use crate::feynman_kac::{integrated_variance_ladder, QuadratureGrid};
use crate::flows::VelocityField;
use crate::stochastic::{shear_increment_functional, SdeConfig};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceBoundRow {
    pub t: f64,
    /// `∫_{Ω_κ} Var ρ0(X_t(x)) dx`
    pub measured: f64,
    pub standard_error: f64,
    /// `‖ρ0‖² (κt + (κ^p t)² + (κ^p t)^{n+2})`, `p = n/(n+2)`
    pub bracket: f64,
    /// `C · bracket`
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceBoundReport {
    pub kappa: f64,
    pub rows: Vec<VarianceBoundRow>,
    /// `max_t measured / bracket`
    pub fitted_c: f64,
    /// Whether `measured / bracket` is monotone along the ladder.
    pub ratio_monotone: bool,
}

/// Measured integrated variance on `Ω_κ = T × [−κ^β, κ^β]` against the
/// three-regime bracket, for a critical shear with tent data on the Monte
/// Carlo backend.
pub fn variance_bound_report(spec: &ExperimentSpec, kappa: f64, t_ladder: &[f64]) -> Result<VarianceBoundReport> {
    let n = match spec.flow {
        VelocityField::PowerShear { n } => n,
        VelocityField::ConstantShear { s: 1.0 } => 1,
        _ => {
            return Err(Error::Spec(format!(
                "variance bound is stated for critical shears y^n, got {}",
                spec.flow.kind()
            )))
        }
    };
    if spec.initial_data != InitialDataKind::TentShear {
        return Err(Error::Spec("variance bound uses tent_shear data".into()));
    }
    let data = build_initial_data(spec.initial_data, &spec.flow, kappa)?;
    let s = data.scale;
    let r = &spec.resolution;
    let quad = QuadratureGrid::periodic_strip(r.mc_nodes_a, -s, s, r.mc_nodes_b)?;
    let horizon = t_ladder.iter().copied().fold(0.0, f64::max);
    if !(horizon > 0.0) {
        return Err(Error::Config("ladder needs a positive time".into()));
    }
    let (dt, _) = spec.time_params(kappa)?;
    let cfg = SdeConfig::new(dt.min(horizon), horizon)?;
    let positive: Vec<f64> = t_ladder.iter().copied().filter(|t| *t > 0.0).collect();
    let ladder = integrated_variance_ladder(
        |p| data.eval(p),
        &spec.flow,
        &spec.diffusivity(kappa)?,
        &quad,
        &cfg,
        &positive,
        r.mc_samples,
        spec.seed,
    )?;
    let norm0 = data.l2_sq(0.0);
    let p = n as f64 / (n as f64 + 2.0);
    let bracket = |t: f64| {
        let a = kappa.powf(p) * t;
        norm0 * (kappa * t + a * a + a.powi(n as i32 + 2))
    };
    let mut rows: Vec<VarianceBoundRow> = Vec::with_capacity(t_ladder.len());
    let mut it = ladder.iter();
    for &t in t_ladder {
        if t <= 0.0 {
            rows.push(VarianceBoundRow {
                t,
                measured: 0.0,
                standard_error: 0.0,
                bracket: 0.0,
                bound: 0.0,
            });
        } else {
            let lp = it.next().expect("one rung per positive time");
            rows.push(VarianceBoundRow {
                t: lp.time,
                measured: 2.0 * lp.value,
                standard_error: 2.0 * lp.standard_error,
                bracket: bracket(lp.time),
                bound: 0.0,
            });
        }
    }
    let ratios: Vec<f64> = rows
        .iter()
        .filter(|r| r.bracket > 0.0)
        .map(|r| r.measured / r.bracket)
        .collect();
    let fitted_c = ratios.iter().copied().fold(0.0, f64::max);
    for r in &mut rows {
        r.bound = fitted_c * r.bracket;
    }
    let up = ratios.windows(2).all(|w| w[1] >= w[0]);
    let down = ratios.windows(2).all(|w| w[1] <= w[0]);
    Ok(VarianceBoundReport {
        kappa,
        rows,
        fitted_c,
        ratio_monotone: up || down,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalPoint {
    pub kappa: f64,
    /// `κ^{−α/(α+2)}`
    pub t: f64,
    pub measured: f64,
    pub standard_error: f64,
    /// `κ^{α/(α+2)} t`
    pub reference: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalScaling {
    pub points: Vec<FunctionalPoint>,
    /// Geometric mean of `measured / reference`.
    pub fitted_c: f64,
    /// `max_i max(ratio_i / C, C / ratio_i)`
    pub worst_factor: f64,
}

/// The two-Brownian increment functional from `y = 0` at the natural time
/// `t = κ^{−α/(α+2)}`, compared with `C κ^{α/(α+2)} t` for one fitted `C`.
/// Every point uses `steps` equal time steps.
pub fn holder_functional_scaling(
    field: &VelocityField,
    kappas: &[f64],
    steps: usize,
    n_pairs: usize,
    seed: u64,
) -> Result<FunctionalScaling> {
    let alpha = match *field {
        VelocityField::HolderShear { alpha, .. } => alpha,
        VelocityField::ConstantShear { .. } => 1.0,
        _ => {
            return Err(Error::Spec(format!(
                "functional scaling needs a Hölder or linear shear, got {}",
                field.kind()
            )))
        }
    };
    if kappas.is_empty() || steps == 0 {
        return Err(Error::Config("need at least one κ and one step".into()));
    }
    let p = alpha / (alpha + 2.0);
    let mut points = Vec::with_capacity(kappas.len());
    for (i, &k) in kappas.iter().enumerate() {
        let t = k.powf(-p);
        let cfg = SdeConfig::new(t / steps as f64, t)?;
        let est = shear_increment_functional(
            field,
            k,
            0.0,
            &cfg,
            n_pairs,
            crate::stochastic::mix_seed(seed, i as u64),
        )?;
        points.push(FunctionalPoint {
            kappa: k,
            t,
            measured: est.value,
            standard_error: est.standard_error,
            reference: k.powf(p) * t,
        });
    }
    let logs: Vec<f64> = points.iter().map(|q| (q.measured / q.reference).ln()).collect();
    let fitted_c = (logs.iter().sum::<f64>() / logs.len() as f64).exp();
    let worst_factor = points
        .iter()
        .map(|q| {
            let r = q.measured / q.reference / fitted_c;
            r.max(1.0 / r)
        })
        .fold(1.0, f64::max);
    Ok(FunctionalScaling {
        points,
        fitted_c,
        worst_factor,
    })
}
