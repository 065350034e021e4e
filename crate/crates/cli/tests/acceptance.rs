//! Acceptance suite: every criterion at its stated tolerance, one PASS/FAIL
//! line each. Expected values are closed forms computed here, or
//! independent simulations.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use enhdiff::experiments::{
    holder_functional_scaling, predicted_slope, sweep_and_fit, ExperimentSpec, InitialDataKind, SweepResult, TimeRule,
};
use enhdiff::feynman_kac::{estimate_density, integrated_variance_ladder, QuadratureGrid};
use enhdiff::grid::{
    energy_ledger_update, windowed_gradient_sq, CartesianGrid, CartesianStepper, EnergyLedger, ScalarField,
};
use enhdiff::ibm::{interface_sample, spread, EdgeMode, Interface, KernelShape, RegularizedDelta};
use enhdiff::stochastic::{shear_increment_functional, simulate_ensemble, SdeConfig};
use enhdiff::{DiffusivityModel, Vec2, VelocityField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn sine_x(p: Vec2) -> f64 {
    p.x.sin()
}

// ---------------------------------------------------------------------------
// 1. heat decay

fn heat_decay() -> Outcome {
    let (kappa, t): (f64, f64) = (0.1, 1.0);
    let exact = (-kappa * t).exp();

    let g = CartesianGrid::new(64, 16, PI).unwrap();
    let mut f = ScalarField::from_fn(g, sine_x).unwrap();
    let l0 = f.l2_norm();
    CartesianStepper::new(g, &VelocityField::Zero, kappa, 0.01)
        .unwrap()
        .run(&mut f, 100)
        .unwrap();
    let grid_err = (f.l2_norm() / l0 - exact).abs();

    let cfg = SdeConfig::new(0.01, t).unwrap();
    let diff = DiffusivityModel::isotropic(kappa);
    let mut worst_z: f64 = 0.0;
    for k in 0..8 {
        let x0 = Vec2::new(0.35 + 2.0 * PI * k as f64 / 8.0, -0.7 + 0.2 * k as f64);
        let e = simulate_ensemble(&VelocityField::Zero, &diff, x0, &cfg, 100 + k, 100_000).unwrap();
        let d = estimate_density(sine_x, &e).unwrap();
        worst_z = worst_z.max((d.mean - exact * x0.x.sin()).abs() / d.standard_error);
    }
    outcome(
        grid_err <= 1e-6 && worst_z <= 3.0,
        format!("grid |ratio − e^-0.1| = {grid_err:.2e} (≤ 1e-6); MC worst probe {worst_z:.2} SE (≤ 3) at N = 1e5"),
    )
}

// ---------------------------------------------------------------------------
// linear-shear benchmark shared by criteria 2, 3 and 4

struct ShearBenchmark {
    max_residual: f64,
    /// `(t, relative amplitude error)` every 0.5 time units
    amplitude_errors: Vec<(f64, f64)>,
    /// `(t, κ∫₀ᵗ∫_{|y|≤π/2} |∇ρ|²)` every 2.5 time units
    window_dissipation: Vec<(f64, f64)>,
}

const SHEAR_KAPPA: f64 = 1e-3;
const SHEAR_T: f64 = 10.0;

/// Amplitude of `e^{i(x − yt)}` over the rows with `|y| ≤ π/2`.
fn sheared_amplitude(f: &ScalarField<CartesianGrid>, t: f64) -> f64 {
    let g = f.grid;
    let (mut re, mut im, mut n) = (0.0, 0.0, 0.0);
    for j in 0..g.ny {
        let y = g.y(j);
        if y.abs() > 0.5 * PI + 1e-12 {
            continue;
        }
        for i in 0..g.nx {
            let ph = g.x(i) - y * t;
            re += f.get(j, i) * ph.cos();
            im -= f.get(j, i) * ph.sin();
        }
        n += g.nx as f64;
    }
    2.0 * re.hypot(im) / n
}

fn shear_benchmark(dt: f64, diagnostics: bool) -> ShearBenchmark {
    let g = CartesianGrid::new(256, 256, PI).unwrap();
    let mut f = ScalarField::from_fn(g, sine_x).unwrap();
    let s = CartesianStepper::new(g, &VelocityField::ConstantShear { s: 1.0 }, SHEAR_KAPPA, dt).unwrap();
    let mut ledger = EnergyLedger::new();
    energy_ledger_update(&mut ledger, &f, SHEAR_KAPPA);
    let steps = (SHEAR_T / dt).round() as usize;
    let per_half = (0.5 / dt).round() as usize;
    let mut amplitude_errors = Vec::new();
    let mut window_dissipation = Vec::new();
    let window = |f: &ScalarField<CartesianGrid>| windowed_gradient_sq(f, -0.5 * PI, 0.5 * PI);
    let mut prev_w = if diagnostics { window(&f) } else { 0.0 };
    let mut d_w = 0.0;
    for k in 1..=steps {
        s.step(&mut f).unwrap();
        energy_ledger_update(&mut ledger, &f, SHEAR_KAPPA);
        if diagnostics {
            let w = window(&f);
            d_w += SHEAR_KAPPA * 0.5 * dt * (prev_w + w);
            prev_w = w;
            if k % per_half == 0 {
                let t = k as f64 * dt;
                let exact = (-SHEAR_KAPPA * (t + t.powi(3) / 3.0)).exp();
                amplitude_errors.push((t, (sheared_amplitude(&f, t) / exact - 1.0).abs()));
                if k % (5 * per_half) == 0 {
                    window_dissipation.push((t, d_w));
                }
            }
        }
    }
    ShearBenchmark {
        max_residual: ledger.max_relative_residual(),
        amplitude_errors,
        window_dissipation,
    }
}

// ---------------------------------------------------------------------------
// 2. energy identity

fn energy_identity(bench: &ShearBenchmark, half: &ShearBenchmark) -> Outcome {
    let g = CartesianGrid::new(64, 64, 2.0).unwrap();
    let mut f = ScalarField::from_fn(g, |p| {
        p.x.sin() + 0.4 * (3.0 * p.x - PI * p.y).cos() + 0.2 * (2.0 * PI * p.y).sin()
    })
    .unwrap();
    let s = CartesianStepper::new(g, &VelocityField::Zero, 0.1, 0.01).unwrap();
    let mut ledger = EnergyLedger::new();
    energy_ledger_update(&mut ledger, &f, 0.1);
    for _ in 0..200 {
        s.step(&mut f).unwrap();
        energy_ledger_update(&mut ledger, &f, 0.1);
    }
    let pure = ledger.max_relative_residual();
    let ratio = bench.max_residual / half.max_residual;
    outcome(
        pure <= 1e-10 && bench.max_residual <= 0.01 && ratio >= 3.0,
        format!(
            "pure diffusion R/‖ρ0‖² = {pure:.2e} (≤ 1e-10); linear shear {:.2e} (≤ 1e-2), halving dt divides it by {ratio:.2} (≥ 3)",
            bench.max_residual
        ),
    )
}

// ---------------------------------------------------------------------------
// 3. variance–dissipation duality

fn duality(bench: &ShearBenchmark) -> Outcome {
    // Zero field, sin x: ρ = e^{−κt} sin x and
    // κ∫₀ᵗ‖∇ρ‖² = ½(1 − e^{−2κt})∫ sin² x = ½(1 − e^{−2κt})·π·|I_y|
    let (kappa, t): (f64, f64) = (0.1, 1.0);
    let quad = QuadratureGrid::periodic_strip(32, -0.5, 0.5, 1).unwrap();
    let cfg = SdeConfig::new(0.01, t).unwrap();
    let heat = integrated_variance_ladder(
        sine_x,
        &VelocityField::Zero,
        &DiffusivityModel::isotropic(kappa),
        &quad,
        &cfg,
        &[t],
        10_000,
        31,
    )
    .unwrap()[0];
    let exact = 0.5 * (1.0 - (-2.0 * kappa * t).exp()) * PI;
    let z_heat = (heat.value - exact).abs() / heat.standard_error;

    // linear shear: MC on the window against the grid's windowed dissipation
    let quad = QuadratureGrid::periodic_strip(8, -0.5 * PI, 0.5 * PI, 4).unwrap();
    let cfg = SdeConfig::new(0.01, SHEAR_T).unwrap();
    let times: Vec<f64> = bench.window_dissipation.iter().map(|p| p.0).collect();
    let mc = integrated_variance_ladder(
        sine_x,
        &VelocityField::ConstantShear { s: 1.0 },
        &DiffusivityModel::isotropic(SHEAR_KAPPA),
        &quad,
        &cfg,
        &times,
        10_000,
        32,
    )
    .unwrap();
    let mut worst = String::new();
    let mut shear_ok = true;
    let mut worst_rel: f64 = 0.0;
    for (p, &(t, d)) in mc.iter().zip(&bench.window_dissipation) {
        let diff = (p.value - d).abs();
        let tol = (3.0 * p.standard_error).max(0.02 * d);
        shear_ok &= diff <= tol;
        if diff / d >= worst_rel {
            worst_rel = diff / d;
            worst = format!("t = {t}: MC {:.5} ± {:.5} vs grid {d:.5}", p.value, p.standard_error);
        }
    }
    outcome(
        z_heat <= 3.0 && shear_ok,
        format!(
            "zero field {z_heat:.2} SE (≤ 3, N = 1e4 × 32 nodes); linear shear worst {:.2}% ({worst}; ≤ max(3 SE, 2%))",
            100.0 * worst_rel
        ),
    )
}

// ---------------------------------------------------------------------------
// 4. linear-shear closed form

fn linear_shear_closed_form(bench: &ShearBenchmark) -> Outcome {
    let (t, e) = bench
        .amplitude_errors
        .iter()
        .copied()
        .fold((0.0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    outcome(
        e <= 0.01,
        format!("max relative error of exp(−κ(t + t³/3)) {e:.2e} at t = {t} over t ≤ 10 (≤ 1e-2)"),
    )
}

// ---------------------------------------------------------------------------
// sweeps

fn sweep(flow: VelocityField, gamma: f64, data: InitialDataKind, dt: f64, horizon: f64) -> SweepResult {
    let mut spec = ExperimentSpec::new(flow, data);
    spec.gamma = gamma;
    spec.time_rule = TimeRule::Scaled;
    spec.dt = dt;
    spec.horizon = horizon;
    sweep_and_fit(&spec).unwrap()
}

fn describe(r: &SweepResult) -> String {
    let censored = r.rows.iter().filter(|m| m.censored).count();
    format!(
        "slope {:.4} ± {:.4} vs {:.4} (|Δ| = {:.4}, {censored} censored)",
        r.fit.slope,
        r.fit.ci_half_width,
        r.predicted_slope,
        r.slope_error()
    )
}

fn critical_shear() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [1, 2] {
        let r = sweep(
            VelocityField::PowerShear { n },
            0.0,
            InitialDataKind::TentShear,
            0.005,
            20.0,
        );
        let expected = -(n as f64) / (n as f64 + 2.0);
        pass &= (r.fit.slope - expected).abs() <= 0.10;
        parts.push(format!("n = {n}: {}", describe(&r)));
    }
    outcome(pass, format!("{} (tol 0.10)", parts.join("; ")))
}

const POLAR_DT: f64 = 0.0005;
const POLAR_HORIZON: f64 = 10.0;

fn circular(q: f64, gamma: f64) -> SweepResult {
    sweep(
        VelocityField::Circular { q },
        gamma,
        InitialDataKind::AnnulusCircular,
        POLAR_DT,
        POLAR_HORIZON,
    )
}

fn circular_scaling() -> (Outcome, SweepResult) {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut q1 = None;
    for q in [1.0, 2.0] {
        let r = circular(q, 0.0);
        pass &= r.fit.log_correction_applied && (r.fit.slope + q / (q + 2.0)).abs() <= 0.15;
        parts.push(format!("q = {q}: {}", describe(&r)));
        if q == 1.0 {
            q1 = Some(r);
        }
    }
    (
        outcome(pass, format!("log-corrected {} (tol 0.15)", parts.join("; "))),
        q1.expect("q = 1 ran"),
    )
}

fn anisotropic(q1: &SweepResult) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (q, gamma) in [(1.0, 0.0), (1.0, 1.0), (2.0, 1.0)] {
        let r = circular(q, gamma);
        let family = enhdiff::experiments::Family::from_flow(&VelocityField::Circular { q }, gamma).unwrap();
        let pred = predicted_slope(&family).unwrap();
        let ok = (r.fit.slope - pred).abs() <= 0.15;
        pass &= ok;
        let mut line = format!(
            "(q, γ) = ({q}, {gamma}): {} {}",
            describe(&r),
            if ok { "ok" } else { "MISS" }
        );
        if gamma == 0.0 {
            let gap = (r.fit.slope - q1.fit.slope).abs();
            let consistent = gap <= r.fit.ci_half_width.max(q1.fit.ci_half_width);
            pass &= consistent;
            line.push_str(&format!(
                ", matches circular q = 1 within CI: {consistent} (gap {gap:.1e})"
            ));
        }
        parts.push(line);
    }
    outcome(pass, format!("{} (tol 0.15)", parts.join("; ")))
}

// ---------------------------------------------------------------------------
// 6. Hölder functional

fn holder_functional() -> Outcome {
    let (kappa, t, dt): (f64, f64, f64) = (1e-3, 1.0, 1e-3);
    let exact = 4.0 * kappa * t.powi(3) / 3.0;

    // independent brute force: ∫(W¹ − W²) has the law of √2 ∫W
    let mut rng = ChaCha8Rng::seed_from_u64(20_260_117);
    let n = (t / dt).round() as usize;
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    let samples = 1_000_000;
    let sigma = (2.0 * kappa).sqrt() * 2f64.sqrt();
    for _ in 0..samples {
        let (mut w, mut integral) = (0.0f64, 0.0);
        for _ in 0..n {
            integral += dt * w;
            let z: f64 = rng.sample(StandardNormal);
            w += dt.sqrt() * z;
        }
        let v = (sigma * integral).powi(2);
        sum += v;
        sum_sq += v * v;
    }
    let mean = sum / samples as f64;
    let se = ((sum_sq / samples as f64 - mean * mean) / (samples - 1) as f64).sqrt();
    let z_brute = (mean - exact).abs() / se;

    let cfg = SdeConfig::new(dt, t).unwrap();
    let est =
        shear_increment_functional(&VelocityField::ConstantShear { s: 1.0 }, kappa, 0.0, &cfg, 100_000, 5).unwrap();
    let z = (est.value - exact).abs() / est.standard_error;

    let holder = VelocityField::HolderShear { alpha: 0.5, c: 1.0 };
    let scaling = holder_functional_scaling(&holder, &[1e-3, 1e-4], 1000, 20_000, 6).unwrap();
    outcome(
        z_brute <= 3.0 && z <= 3.0 && scaling.worst_factor <= 3.0,
        format!(
            "α = 1: 4κt³/3 confirmed by 1e6-sample brute force ({z_brute:.2} SE), estimator {z:.2} SE (≤ 3); α = 0.5: C = {:.4}, worst factor {:.3} (≤ 3)",
            scaling.fitted_c, scaling.worst_factor
        ),
    )
}

// ---------------------------------------------------------------------------
// 9. IBM kernels

fn ibm_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let g = CartesianGrid::new(64, 64, PI).unwrap();
    let delta = RegularizedDelta::for_grid(&g, KernelShape::Peskin4).unwrap();
    let markers: Vec<Vec2> = (0..100)
        .map(|_| Vec2::new(rng.random_range(0.0..2.0 * PI), rng.random_range(-PI..PI)))
        .collect();
    let weights: Vec<f64> = (0..100).map(|_| rng.random_range(0.01..0.1)).collect();
    let iface = Interface::new(markers, weights).unwrap();

    let ones = ScalarField::from_fn(g, |_| 1.0).unwrap();
    let pu = interface_sample(&ones, &iface, &delta, EdgeMode::Periodic)
        .unwrap()
        .iter()
        .map(|s| (s - 1.0).abs())
        .fold(0.0, f64::max);

    let rho =
        ScalarField::from_values(g, (0..g.nx * g.ny).map(|_| rng.random_range(-1.0..1.0)).collect(), 0.0).unwrap();
    let v: Vec<f64> = (0..100).map(|_| rng.random_range(-1.0..1.0)).collect();
    let sampled = interface_sample(&rho, &iface, &delta, EdgeMode::Periodic).unwrap();
    let lhs: f64 = sampled
        .iter()
        .zip(&v)
        .zip(&iface.weights)
        .map(|((a, b), w)| a * b * w)
        .sum();
    let spread_field = spread(&v, &iface, &delta, &g, EdgeMode::Periodic).unwrap();
    let rhs: f64 = rho
        .values
        .iter()
        .zip(&spread_field.values)
        .map(|(a, b)| a * b)
        .sum::<f64>()
        * g.cell_area();
    let adj = (lhs - rhs).abs() / lhs.abs().max(rhs.abs());

    let linear = |p: Vec2| 0.3 + 0.7 * p.x - 0.4 * p.y;
    let interior: Vec<Vec2> = (0..50)
        .map(|_| Vec2::new(rng.random_range(1.0..5.0), rng.random_range(-2.0..2.0)))
        .collect();
    let errors = |kernel: KernelShape| -> Vec<f64> {
        [32usize, 64, 128]
            .iter()
            .map(|&n| {
                let g = CartesianGrid::new(n, n, PI).unwrap();
                let f = ScalarField::from_fn(g, linear).unwrap();
                let d = RegularizedDelta::for_grid(&g, kernel).unwrap();
                let iface = Interface::new(interior.clone(), vec![1.0; interior.len()]).unwrap();
                interface_sample(&f, &iface, &d, EdgeMode::Bounded)
                    .unwrap()
                    .iter()
                    .zip(&interior)
                    .map(|(s, p)| (s - linear(*p)).abs())
                    .fold(0.0, f64::max)
            })
            .collect()
    };
    let orders = |e: &[f64]| -> Vec<f64> { e.windows(2).map(|w| (w[0] / w[1]).log2()).collect() };
    let peskin = errors(KernelShape::Peskin4);
    let cosine = errors(KernelShape::Cosine);
    let exact_reproduction = peskin.iter().all(|e| *e <= 1e-12);
    let min_order = orders(&peskin).into_iter().fold(f64::INFINITY, f64::min);
    let order_ok = exact_reproduction || min_order >= 1.8;
    outcome(
        pu <= 1e-12 && adj <= 1e-12 && order_ok,
        format!(
            "partition of unity {pu:.1e}, adjointness {adj:.1e} (≤ 1e-12); linear field, default kernel errors {:.1e} / {:.1e} / {:.1e} ({}); cosine kernel orders {:?}",
            peskin[0],
            peskin[1],
            peskin[2],
            if exact_reproduction {
                "reproduced to round-off".to_string()
            } else {
                format!("order {min_order:.2}, ≥ 1.8")
            },
            orders(&cosine).iter().map(|o| (o * 100.0).round() / 100.0).collect::<Vec<_>>()
        ),
    )
}

// ---------------------------------------------------------------------------
// 10. determinism

const DETERMINISM_CONFIGS: [(&str, &str, &str); 3] = [
    (
        "grid_run",
        "run",
        "seed = 4\n[flow]\nkind = \"power_shear\"\nn = 2\n[diffusivity]\nkappa = 0.001\n[initial_data]\nkind = \"tent_shear\"\n[solver]\nnx = 64\nny = 64\ndt = 0.05\nhorizon = 5.0\n[output]\nformats = [\"csv\", \"binary\"]\n",
    ),
    (
        "mc_run",
        "run",
        "seed = 9\n[flow]\nkind = \"circular\"\nq = 1.0\n[diffusivity]\nkappa = 0.001\ngamma = 0.5\n[initial_data]\nkind = \"annulus_circular\"\n[solver]\nbackend = \"monte_carlo\"\ndt = 0.05\nhorizon = 2.0\nmc_samples = 200\nmc_nodes_a = 8\nmc_nodes_b = 4\nmc_ladder = 4\n",
    ),
    (
        "sweep",
        "sweep",
        "seed = 2\n[flow]\nkind = \"circular\"\nq = 2.0\n[initial_data]\nkind = \"annulus_circular\"\n[solver]\nnr = 64\nntheta = 64\ntime_rule = \"scaled\"\ndt = 0.01\nhorizon = 10.0\n",
    ),
];

fn run_cli(args: &[&str], threads: &str, out: &Path) -> bool {
    Command::new(env!("CARGO_BIN_EXE_enhdiff"))
        .args(args)
        .args(["--threads", threads, "--output-dir"])
        .arg(out)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| {
            let p = e.ok()?.path();
            let name = p.file_name()?.to_str()?.to_string();
            name.ends_with(".csv").then(|| (name, std::fs::read(&p).unwrap()))
        })
        .collect();
    v.sort();
    v
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut pass = true;
    let mut notes = Vec::new();
    for (name, cmd, text) in DETERMINISM_CONFIGS {
        let cfg = tmp.path().join(format!("{name}.toml"));
        std::fs::write(&cfg, text).unwrap();
        let cfg_s = cfg.to_str().unwrap();
        let runs: Vec<Vec<(String, Vec<u8>)>> = [("1", "a"), ("1", "b"), ("3", "c")]
            .iter()
            .map(|(threads, tag)| {
                let out = tmp.path().join(format!("{name}_{tag}"));
                if !run_cli(&[cmd, cfg_s], threads, &out) {
                    return Vec::new();
                }
                csv_files(&out)
            })
            .collect();
        let same = !runs[0].is_empty() && runs.iter().all(|r| *r == runs[0]);
        pass &= same;
        notes.push(format!(
            "{name}: {} CSV files {}",
            runs[0].len(),
            if same { "identical" } else { "DIFFER" }
        ));
    }
    outcome(pass, format!("{} (same seed, --threads 1, 1, 3)", notes.join("; ")))
}

// ---------------------------------------------------------------------------

fn main() {
    let start = Instant::now();
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut record = |id: u32, name: &'static str, o: Outcome| {
        println!(
            "criterion {id:>2} {name}: {} — {} [{:.0} s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
        results.push((id, name, o));
    };

    record(1, "heat-decay oracle", heat_decay());
    let bench = shear_benchmark(0.01, true);
    let half = shear_benchmark(0.005, false);
    record(2, "energy identity", energy_identity(&bench, &half));
    record(3, "variance-dissipation duality", duality(&bench));
    record(4, "linear-shear closed form", linear_shear_closed_form(&bench));
    record(5, "critical-shear scaling", critical_shear());
    record(6, "Hölder functional", holder_functional());
    let (c7, q1) = circular_scaling();
    record(7, "circular scaling", c7);
    record(8, "anisotropic theorem", anisotropic(&q1));
    record(9, "IBM kernel suite", ibm_suite());
    record(10, "determinism", determinism());

    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {}/{} criteria passed{}",
        results.len() - failed.len(),
        results.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!("; failing: {failed:?}")
        }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
