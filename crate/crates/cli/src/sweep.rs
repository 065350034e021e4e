//! `enhdiff sweep`: mixing times across diffusivities and the exponent fit.

use std::path::Path;

use enhdiff::experiments::{
    fit_sweep, measure_mixing_time, predicted_slope, render_sweep_svg, synthetic_times, write_sweep_csv,
    ExperimentSpec, MixingTime, ScalingFit, SweepRow,
};
use serde_json::{json, Value};

use crate::config::{Format, LoadedConfig};
use crate::outcome::{write_file, write_json, CliError};

const DEFAULT_HORIZON: f64 = 100.0;

fn measure_all(spec: &ExperimentSpec, verbose: bool) -> Result<Vec<MixingTime>, CliError> {
    let mut rows = Vec::with_capacity(spec.kappas.len());
    for &k in &spec.kappas {
        let m = measure_mixing_time(spec, k)?;
        if verbose {
            eprintln!(
                "kappa = {k:e}: T = {}{}",
                m.t,
                if m.censored { " (censored)" } else { "" }
            );
        }
        rows.push(m);
    }
    Ok(rows)
}

fn fit_json(fit: &ScalingFit, pred: f64) -> Value {
    json!({
        "slope": fit.slope,
        "intercept": fit.intercept,
        "residual_rms": fit.residual_rms,
        "ci_halfwidth": fit.ci_half_width,
        "prefactor": fit.prefactor,
        "n_points": fit.n_points,
        "log_correction_applied": fit.log_correction_applied,
        "slope_error": (fit.slope - pred).abs(),
    })
}

pub fn cmd_sweep(cfg: &LoadedConfig, dir: &Path) -> Result<Value, CliError> {
    let kappas = cfg.kappas()?;
    let spec = cfg.spec(kappas, DEFAULT_HORIZON)?;
    spec.validate()?;
    let family = spec
        .family()
        .map_err(|e| cfg.error(Some("flow"), "kind", e.to_string()))?;
    let pred = predicted_slope(&family)?;
    let correction = spec
        .correction()
        .map_err(|e| cfg.error(Some("experiment"), "log_correction", e.to_string()))?;
    if let Some(s) = &cfg.config.experiment.synthetic {
        if !(s.prefactor > 0.0 && s.slope.is_finite()) {
            return Err(cfg
                .error(
                    Some("experiment.synthetic"),
                    "prefactor",
                    "synthetic prefactor must be > 0",
                )
                .into());
        }
    }
    std::fs::create_dir_all(dir)?;

    let synthetic = cfg.config.experiment.synthetic.clone();
    let rows = match &synthetic {
        Some(s) => synthetic_times(&spec.kappas, s.slope, s.prefactor, correction),
        None => measure_all(&spec, true)?,
    };
    let fit = fit_sweep(&spec, &rows);
    let fit_ref = fit.as_ref().ok();
    let table: Vec<SweepRow> = rows.iter().map(|m| SweepRow::from_result(m, pred, fit_ref)).collect();

    let mut files = Vec::new();
    if cfg.wants(Format::Csv) {
        let mut buf = Vec::new();
        write_sweep_csv(&table, &mut buf)?;
        write_file(dir, "sweep.csv", &buf)?;
        files.push("sweep.csv");
    }
    let censored: Vec<f64> = rows.iter().filter(|r| r.censored).map(|r| r.kappa).collect();
    let mut summary = json!({
        "command": "sweep",
        "flow": spec.flow,
        "gamma": spec.gamma,
        "initial_data": spec.initial_data.name(),
        "family": family,
        "backend": spec.backend,
        "time_rule": spec.time_rule,
        "theta_mix": spec.theta_mix,
        "seed": spec.seed,
        "synthetic": synthetic.is_some(),
        "slope_pred": pred,
        "log_correction_exponent": correction,
        "rows": rows,
        "censored_kappas": censored,
    });

    match fit {
        Ok(fit) => {
            if cfg.wants(Format::Svg) {
                let title = format!("{} mixing time vs kappa", spec.flow.kind());
                write_file(
                    dir,
                    "sweep.svg",
                    render_sweep_svg(&table, Some(&fit), &title).as_bytes(),
                )?;
                files.push("sweep.svg");
            }
            summary["status"] = json!("ok");
            summary["fit"] = fit_json(&fit, pred);
            if cfg.config.experiment.threshold_sensitivity && synthetic.is_none() {
                let mut extra = Vec::new();
                for theta in [0.5, (-1.0f64).exp(), 0.1] {
                    let mut s = spec.clone();
                    s.theta_mix = theta;
                    let r = measure_all(&s, false)?;
                    let f = fit_sweep(&s, &r).ok();
                    extra.push(json!({
                        "theta_mix": theta,
                        "slope": f.map(|f| f.slope),
                        "ci_halfwidth": f.map(|f| f.ci_half_width),
                    }));
                }
                summary["threshold_sensitivity"] = Value::Array(extra);
            }
            summary["files"] = json!(files);
            write_json(dir, "summary.json", &summary)?;
            Ok(summary)
        }
        Err(e) => {
            let err = CliError::from(e);
            summary["status"] = json!("no_fit");
            summary["error"] = json!(err.to_string());
            summary["files"] = json!(files);
            write_json(dir, "summary.json", &summary)?;
            Err(err)
        }
    }
}
