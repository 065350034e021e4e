//! Ordinary least squares on `log T` against `log κ`.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::{Error, Result};

/// Fewest uncensored points a fit accepts.
pub const MIN_FIT_POINTS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    /// Half-width of the 95 % confidence interval of the slope.
    pub ci_half_width: f64,
    pub log_correction_applied: bool,
    /// `exp(intercept)`, the fitted constant in `T = C κ^slope`.
    pub prefactor: f64,
    pub n_points: usize,
}

/// `1 + log(1/κ^p)`.
pub fn log_correction(kappa: f64, p: f64) -> f64 {
    1.0 - p * kappa.ln()
}

/// Fits `log(T / corr) = intercept + slope · log κ`, where `corr` is the log
/// correction with exponent `correction` when given and 1 otherwise.
pub fn fit_power_law(kappas: &[f64], times: &[f64], correction: Option<f64>) -> Result<ScalingFit> {
    if kappas.len() != times.len() {
        return Err(Error::Config("fit needs as many times as diffusivities".into()));
    }
    let n = kappas.len();
    if n < MIN_FIT_POINTS {
        return Err(Error::InsufficientData {
            usable: n,
            needed: MIN_FIT_POINTS,
            censored: vec![],
        });
    }
    if kappas.iter().chain(times).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::Config("fit needs positive finite κ and T".into()));
    }
    let xs: Vec<f64> = kappas.iter().map(|k| k.ln()).collect();
    let ys: Vec<f64> = kappas
        .iter()
        .zip(times)
        .map(|(&k, &t)| (t / correction.map_or(1.0, |p| log_correction(k, p))).ln())
        .collect();
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::Config("fit needs at least two distinct κ".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let dof = nf - 2.0;
    let se_slope = (sse / dof / sxx).sqrt();
    let tq = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| Error::Config(format!("t distribution: {e}")))?
        .inverse_cdf(0.975);
    Ok(ScalingFit {
        slope,
        intercept,
        residual_rms: (sse / nf).sqrt(),
        ci_half_width: tq * se_slope,
        log_correction_applied: correction.is_some(),
        prefactor: intercept.exp(),
        n_points: n,
    })
}
