//! `enhdiff run`: one simulation with field snapshots and an energy ledger.

use std::path::Path;

use enhdiff::experiments::{build_initial_data, mc_quadrature, Backend, InitialData, InitialDataKind};
use enhdiff::feynman_kac::integrated_variance_ladder;
use enhdiff::grid::{
    energy_ledger_update, write_binary, write_csv, CartesianGrid, CartesianStepper, EnergyLedger, PolarGrid,
    PolarStepper, ScalarField, SnapshotGrid,
};
use enhdiff::ibm::{interface_sample, EdgeMode, Interface, RegularizedDelta};
use enhdiff::stochastic::SdeConfig;
use enhdiff::VelocityField;
use serde_json::{json, Value};

use crate::config::{Format, LoadedConfig};
use crate::outcome::{write_file, write_json, CliError};

const DEFAULT_HORIZON: f64 = 1.0;

fn snapshot<G: SnapshotGrid>(
    cfg: &LoadedConfig,
    dir: &Path,
    stem: &str,
    f: &ScalarField<G>,
) -> Result<Vec<String>, CliError> {
    let mut written = Vec::new();
    if cfg.wants(Format::Csv) {
        let mut buf = Vec::new();
        write_csv(f, &mut buf)?;
        let name = format!("{stem}.csv");
        write_file(dir, &name, &buf)?;
        written.push(name);
    }
    if cfg.wants(Format::Binary) {
        let mut buf = Vec::new();
        write_binary(f, &mut buf)?;
        let name = format!("{stem}.enhd");
        write_file(dir, &name, &buf)?;
        written.push(name);
    }
    Ok(written)
}

fn ledger_csv(ledger: &EnergyLedger) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(["t", "l2_sq", "grad_sq", "dissipation", "residual"])
        .map_err(io)?;
    for s in &ledger.samples {
        w.write_record([
            s.t.to_string(),
            s.l2_sq.to_string(),
            s.grad_sq.to_string(),
            s.dissipation.to_string(),
            s.residual.to_string(),
        ])
        .map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

fn steps(dt: f64, horizon: f64) -> usize {
    ((horizon / dt) - 1e-9).ceil().max(1.0) as usize
}

struct Tracker {
    target: f64,
    crossing: Option<f64>,
}

impl Tracker {
    fn new(theta: f64, l2_0: f64) -> Self {
        Self {
            target: theta * l2_0,
            crossing: None,
        }
    }

    fn observe(&mut self, t: f64, l2: f64) {
        if self.crossing.is_none() && l2 <= self.target {
            self.crossing = Some(t);
        }
    }

    fn json(&self, theta: f64) -> Value {
        json!({
            "theta_mix": theta,
            "t": self.crossing,
            "censored": self.crossing.is_none(),
        })
    }
}

fn ledger_json(ledger: &EnergyLedger) -> Value {
    let last = ledger.last().copied();
    json!({
        "max_relative_residual": ledger.max_relative_residual(),
        "dissipation": last.map(|s| s.dissipation),
        "final_residual": last.map(|s| s.residual),
    })
}

fn run_cartesian(
    cfg: &LoadedConfig,
    dir: &Path,
    flow: &VelocityField,
    data: &InitialData,
    kappa: f64,
) -> Result<Value, CliError> {
    let (dt, horizon) = cfg.times(DEFAULT_HORIZON)?;
    let res = cfg.resolution()?;
    let theta = cfg.theta_mix()?;
    let grid = CartesianGrid::new(res.nx, res.ny, res.ly.ly(kappa, data.beta))?;
    let stepper = CartesianStepper::new(grid, flow, kappa, dt)?;
    let mut f = ScalarField::from_fn(grid, |p| data.eval(p))?;
    let iface = match &cfg.config.interface {
        Some(sec) => {
            let path = cfg.base_dir.join(&sec.path);
            let file = std::fs::File::open(&path).map_err(|e| {
                cfg.error(
                    Some("interface"),
                    "path",
                    format!("cannot open {}: {e}", path.display()),
                )
            })?;
            let iface = Interface::from_csv(file)?;
            Some((iface, RegularizedDelta::for_grid(&grid, sec.kernel)?))
        }
        None => None,
    };

    let mut files = snapshot(cfg, dir, "field_initial", &f)?;
    let mut ledger = EnergyLedger::new();
    energy_ledger_update(&mut ledger, &f, kappa);
    let l2_0 = f.l2_norm();
    let mut tracker = Tracker::new(theta, l2_0);
    let n = steps(dt, horizon);
    for _ in 0..n {
        stepper.step(&mut f)?;
        energy_ledger_update(&mut ledger, &f, kappa);
        tracker.observe(f.time, f.l2_norm());
    }
    files.extend(snapshot(cfg, dir, "field_final", &f)?);
    if cfg.wants(Format::Csv) {
        write_file(dir, "energy.csv", &ledger_csv(&ledger)?)?;
        files.push("energy.csv".into());
    }
    if let Some((iface, delta)) = iface {
        let vals = interface_sample(&f, &iface, &delta, EdgeMode::Periodic)?;
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(["x", "y", "dS", "value"]).map_err(io)?;
        for ((p, ds), v) in iface.markers.iter().zip(&iface.weights).zip(&vals) {
            w.write_record([p.x.to_string(), p.y.to_string(), ds.to_string(), v.to_string()])
                .map_err(io)?;
        }
        write_file(
            dir,
            "interface.csv",
            &w.into_inner().map_err(|e| CliError::Io(e.to_string()))?,
        )?;
        files.push("interface.csv".into());
    }

    let ratio = f.l2_norm() / l2_0;
    let mut summary = json!({
        "grid": { "kind": "cartesian", "nx": grid.nx, "ny": grid.ny, "ly": grid.ly },
        "dt": dt,
        "steps": n,
        "t_final": f.time,
        "l2_ratio": ratio,
        "energy": ledger_json(&ledger),
        "mixing_time": tracker.json(theta),
        "files": files,
    });
    if *flow == VelocityField::Zero && data.kind == InitialDataKind::SineX {
        let expected = (-kappa * f.time).exp();
        summary["heat_decay"] = json!({
            "expected": expected,
            "abs_error": (ratio - expected).abs(),
        });
    }
    Ok(summary)
}

fn run_polar(
    cfg: &LoadedConfig,
    dir: &Path,
    q: f64,
    data: &InitialData,
    kappa: f64,
    gamma: f64,
) -> Result<Value, CliError> {
    let (dt, horizon) = cfg.times(DEFAULT_HORIZON)?;
    let res = cfg.resolution()?;
    let theta = cfg.theta_mix()?;
    let spec = cfg.spec(Vec::new(), DEFAULT_HORIZON)?;
    let diff = spec.diffusivity(kappa)?;
    let grid = PolarGrid::for_scale(kappa, data.beta, res.nr, res.ntheta)?;
    let stepper = PolarStepper::new(grid, q, &diff, dt)?;
    let f0 = ScalarField::from_fn(grid, |p| data.eval(p))?;
    let mut files = snapshot(cfg, dir, "field_initial", &f0)?;
    let mut state = stepper.to_spectral(&f0)?;
    let mut ledger = EnergyLedger::with_radial_exponent(gamma);
    energy_ledger_update(&mut ledger, &f0, kappa);
    let l2_0 = f0.l2_norm();
    let mut tracker = Tracker::new(theta, l2_0);
    let n = steps(dt, horizon);
    let mut f = f0;
    for _ in 0..n {
        stepper.advance(&mut state, 1);
        f = stepper.to_field(&state)?;
        energy_ledger_update(&mut ledger, &f, kappa);
        tracker.observe(f.time, f.l2_norm());
    }
    files.extend(snapshot(cfg, dir, "field_final", &f)?);
    if cfg.wants(Format::Csv) {
        write_file(dir, "energy.csv", &ledger_csv(&ledger)?)?;
        files.push("energy.csv".into());
    }
    Ok(json!({
        "grid": { "kind": "polar", "nr": grid.nr, "ntheta": grid.ntheta, "r_min": grid.r_min, "r_max": grid.r_max },
        "dt": dt,
        "steps": n,
        "t_final": f.time,
        "l2_ratio": f.l2_norm() / l2_0,
        "energy": ledger_json(&ledger),
        "mixing_time": tracker.json(theta),
        "files": files,
    }))
}

fn run_monte_carlo(cfg: &LoadedConfig, dir: &Path, data: &InitialData, kappa: f64) -> Result<Value, CliError> {
    let spec = cfg.spec(Vec::new(), DEFAULT_HORIZON)?;
    let (dt, horizon) = (spec.dt, spec.horizon);
    let quad = mc_quadrature(&spec, data, kappa)?;
    let sde = SdeConfig::new(dt, horizon)?;
    let m = spec.resolution.mc_ladder;
    let times: Vec<f64> = (1..=m).map(|i| horizon * i as f64 / m as f64).collect();
    let ladder = integrated_variance_ladder(
        |p| data.eval(p),
        &spec.flow,
        &spec.diffusivity(kappa)?,
        &quad,
        &sde,
        &times,
        spec.resolution.mc_samples,
        spec.seed,
    )?;
    let half_norm = 0.5 * quad.integrate(|p| data.eval(p).powi(2));
    let target = (1.0 - spec.theta_mix * spec.theta_mix) * half_norm;
    let crossing = ladder.iter().find(|p| p.value >= target).map(|p| p.time);

    let mut files = Vec::new();
    if cfg.wants(Format::Csv) {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(["t", "half_integrated_variance", "standard_error"])
            .map_err(io)?;
        for p in &ladder {
            w.write_record([p.time.to_string(), p.value.to_string(), p.standard_error.to_string()])
                .map_err(io)?;
        }
        write_file(
            dir,
            "variance.csv",
            &w.into_inner().map_err(|e| CliError::Io(e.to_string()))?,
        )?;
        files.push("variance.csv".to_string());
    }
    let last = ladder.last().copied();
    Ok(json!({
        "quadrature_nodes": quad.len(),
        "samples_per_node": spec.resolution.mc_samples,
        "dt": dt,
        "t_final": horizon,
        "half_l2_sq_initial": half_norm,
        "half_integrated_variance": last.map(|p| p.value),
        "standard_error": last.map(|p| p.standard_error),
        "mixing_time": {
            "theta_mix": spec.theta_mix,
            "t": crossing,
            "censored": crossing.is_none(),
        },
        "files": files,
    }))
}

/// Runs one simulation into `dir` and returns the summary document.
pub fn cmd_run(cfg: &LoadedConfig, dir: &Path) -> Result<Value, CliError> {
    let flow = cfg.flow()?;
    let kappa = cfg.kappa()?;
    let gamma = cfg.gamma()?;
    let kind = cfg.config.initial_data.kind;
    let data =
        build_initial_data(kind, &flow, kappa).map_err(|e| cfg.error(Some("initial_data"), "kind", e.to_string()))?;
    if gamma != 0.0 && !flow.is_circular() {
        return Err(cfg
            .error(
                Some("diffusivity"),
                "gamma",
                "`diffusivity.gamma` needs a circular flow",
            )
            .into());
    }
    cfg.times(DEFAULT_HORIZON)?;
    cfg.resolution()?;
    cfg.theta_mix()?;
    if cfg.config.interface.is_some() && (flow.is_circular() || cfg.config.solver.backend != Backend::Grid) {
        return Err(cfg
            .error(
                Some("interface"),
                "path",
                "interface sampling needs the Cartesian grid backend",
            )
            .into());
    }
    std::fs::create_dir_all(dir)?;

    let backend = cfg.config.solver.backend;
    let body = match (backend, flow) {
        (Backend::MonteCarlo, _) => run_monte_carlo(cfg, dir, &data, kappa),
        (Backend::Grid, VelocityField::Circular { q }) => run_polar(cfg, dir, q, &data, kappa, gamma),
        (Backend::Grid, _) => run_cartesian(cfg, dir, &flow, &data, kappa),
    };
    let header = json!({
        "command": "run",
        "flow": flow,
        "kappa": kappa,
        "gamma": gamma,
        "initial_data": kind.name(),
        "backend": match backend { Backend::Grid => "grid", Backend::MonteCarlo => "monte_carlo" },
        "seed": cfg.config.seed,
    });
    let mut summary = header;
    match body {
        Ok(Value::Object(fields)) => {
            summary["status"] = json!("ok");
            for (k, v) in fields {
                summary[k] = v;
            }
            write_json(dir, "summary.json", &summary)?;
            Ok(summary)
        }
        Ok(_) => unreachable!("run bodies are JSON objects"),
        Err(e) => {
            summary["status"] = json!("failed");
            summary["error"] = json!(e.to_string());
            summary["partial"] = json!(true);
            write_json(dir, "summary.json", &summary)?;
            Err(e)
        }
    }
}
