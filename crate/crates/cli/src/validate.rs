//! `enhdiff validate`: the built-in oracle suite.

use std::f64::consts::PI;

use enhdiff::feynman_kac::{integrated_variance_ladder, QuadratureGrid};
use enhdiff::grid::{CartesianGrid, CartesianStepper, ScalarField};
use enhdiff::ibm::{interface_sample, EdgeMode, Interface, KernelShape, RegularizedDelta};
use enhdiff::stochastic::{mix_seed, NoiseAmplitude, SdeConfig};
use enhdiff::{DiffusivityModel, Vec2, VelocityField};

pub const CHECKS: [&str; 4] = [
    "heat_decay",
    "linear_shear_closed_form",
    "variance_dissipation_duality",
    "delta_partition_of_unity",
];

#[derive(Debug, Clone, Copy, Default)]
pub struct Hooks {
    /// Drive the Monte Carlo paths with `2κ` instead of `√(2κ)`.
    pub noise_typo: bool,
}

pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

type Outcome = enhdiff::Result<(bool, String)>;

fn heat_decay() -> Outcome {
    let (kappa, t) = (0.1, 1.0);
    let g = CartesianGrid::new(64, 16, PI)?;
    let mut f = ScalarField::from_fn(g, |p| p.x.sin())?;
    let l0 = f.l2_norm();
    let s = CartesianStepper::new(g, &VelocityField::Zero, kappa, 0.01)?;
    s.run(&mut f, 100)?;
    let ratio = f.l2_norm() / l0;
    let expected = (-kappa * t).exp();
    let err = (ratio - expected).abs();
    Ok((err <= 1e-6, format!("|ratio - e^-0.1| = {err:.3e} (tol 1e-6)")))
}

/// Amplitude of `e^{i(x − y t)}` in `f` over the rows with `|y| ≤ π/2`.
pub fn sheared_mode_amplitude(f: &ScalarField<CartesianGrid>, t: f64) -> f64 {
    let g = f.grid;
    let (mut re, mut im, mut area) = (0.0, 0.0, 0.0);
    for j in 0..g.ny {
        let y = g.y(j);
        if y.abs() > 0.5 * PI + 1e-12 {
            continue;
        }
        for i in 0..g.nx {
            let phase = g.x(i) - y * t;
            let v = f.get(j, i);
            re += v * phase.cos();
            im -= v * phase.sin();
        }
        area += g.nx as f64;
    }
    2.0 * re.hypot(im) / area
}

fn linear_shear() -> Outcome {
    let kappa = 1e-3;
    let g = CartesianGrid::new(256, 256, PI)?;
    let mut f = ScalarField::from_fn(g, |p| p.x.sin())?;
    let s = CartesianStepper::new(g, &VelocityField::ConstantShear { s: 1.0 }, kappa, 0.01)?;
    let mut worst: f64 = 0.0;
    for k in 1..=10 {
        s.run(&mut f, 100)?;
        let t = k as f64;
        let exact = (-kappa * (t + t.powi(3) / 3.0)).exp();
        worst = worst.max((sheared_mode_amplitude(&f, t) / exact - 1.0).abs());
    }
    Ok((
        worst <= 0.01,
        format!("max relative amplitude error {worst:.3e} over t = 1..10 (tol 1e-2)"),
    ))
}

fn duality(hooks: Hooks) -> Outcome {
    let (kappa, t) = (0.1, 1.0);
    let quad = QuadratureGrid::periodic_strip(32, -0.5, 0.5, 1)?;
    let noise = if hooks.noise_typo {
        NoiseAmplitude::TwoKappa
    } else {
        NoiseAmplitude::SqrtTwoKappa
    };
    let cfg = SdeConfig::new(0.01, t)?.with_noise(noise);
    let ladder = integrated_variance_ladder(
        |p: Vec2| p.x.sin(),
        &VelocityField::Zero,
        &DiffusivityModel::isotropic(kappa),
        &quad,
        &cfg,
        &[t],
        10_000,
        2024,
    )?;
    let est = ladder[0];
    // ρ = e^{−κt} sin x, so κ∫₀ᵗ‖∇ρ‖² = ½(1 − e^{−2κt})‖sin x‖² on the strip
    let exact = 0.5 * (1.0 - (-2.0 * kappa * t).exp()) * PI;
    let z = (est.value - exact).abs() / est.standard_error;
    Ok((
        z <= 3.0,
        format!("MC {:.6} vs closed form {exact:.6}: {z:.2} SE (tol 3)", est.value),
    ))
}

fn uniform(seed: u64, i: u64) -> f64 {
    (mix_seed(seed, i) >> 11) as f64 / (1u64 << 53) as f64
}

fn partition_of_unity() -> Outcome {
    let g = CartesianGrid::new(64, 64, PI)?;
    let ones = ScalarField::from_fn(g, |_| 1.0)?;
    let markers: Vec<Vec2> = (0..100)
        .map(|i| Vec2::new(2.0 * PI * uniform(11, 2 * i), PI * (2.0 * uniform(11, 2 * i + 1) - 1.0)))
        .collect();
    let iface = Interface::new(markers, vec![1.0; 100])?;
    let delta = RegularizedDelta::for_grid(&g, KernelShape::Peskin4)?;
    let sums = interface_sample(&ones, &iface, &delta, EdgeMode::Periodic)?;
    let worst = sums.iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max);
    Ok((
        worst <= 1e-12,
        format!("max |Σ δ h² − 1| = {worst:.3e} over 100 markers (tol 1e-12)"),
    ))
}

pub fn run_check(name: &str, hooks: Hooks) -> Option<CheckResult> {
    let name = *CHECKS.iter().find(|c| **c == name)?;
    let out = match name {
        "heat_decay" => heat_decay(),
        "linear_shear_closed_form" => linear_shear(),
        "variance_dissipation_duality" => duality(hooks),
        _ => partition_of_unity(),
    };
    Some(match out {
        Ok((pass, detail)) => CheckResult { name, pass, detail },
        Err(e) => CheckResult {
            name,
            pass: false,
            detail: format!("error: {e}"),
        },
    })
}
