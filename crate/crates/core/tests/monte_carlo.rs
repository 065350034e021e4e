use std::f64::consts::PI;

use enhdiff::feynman_kac::estimate_density;
use enhdiff::stochastic::{simulate_ensemble, two_point_separation, Coupling, SdeConfig};
use enhdiff::{DiffusivityModel, Vec2, VelocityField};

#[test]
fn brownian_coordinate_variance_is_two_kappa_t() {
    let (kappa, t) = (0.05, 1.0);
    let cfg = SdeConfig::new(0.01, t).unwrap();
    let e = simulate_ensemble(
        &VelocityField::Zero,
        &DiffusivityModel::isotropic(kappa),
        Vec2::new(PI, 0.3),
        &cfg,
        7,
        20_000,
    )
    .unwrap();
    let (mx, my) = e.coordinate_moments();
    let expected = 2.0 * kappa * t;
    assert!((mx.mean - PI).abs() < 4.0 * mx.mean_se());
    assert!((my.mean - 0.3).abs() < 4.0 * my.mean_se());
    assert!(
        (mx.variance - expected).abs() < 4.0 * mx.variance_se(),
        "{}",
        mx.variance
    );
    assert!(
        (my.variance - expected).abs() < 4.0 * my.variance_se(),
        "{}",
        my.variance
    );
}

#[test]
fn independent_pair_separation_is_eight_kappa_t() {
    let (kappa, t) = (0.02, 2.0);
    let cfg = SdeConfig::new(0.01, t).unwrap();
    let p = Vec2::new(2.0, 0.0);
    let s = two_point_separation(
        &VelocityField::Zero,
        &DiffusivityModel::isotropic(kappa),
        p,
        p,
        &cfg,
        Coupling::IndependentNoise,
        20_000,
        3,
    )
    .unwrap();
    let expected = 8.0 * kappa * t;
    assert!(
        (s.value - expected).abs() < 4.0 * s.standard_error,
        "{} vs {expected}",
        s.value
    );

    let common = two_point_separation(
        &VelocityField::Zero,
        &DiffusivityModel::isotropic(kappa),
        p,
        Vec2::new(2.5, 0.0),
        &cfg,
        Coupling::CommonNoise,
        100,
        3,
    )
    .unwrap();
    assert!((common.value - 0.25).abs() < 1e-12);
}

#[test]
fn density_matches_heat_kernel_convolution() {
    // E cos(k(y0 + √(2κt) Z)) = e^{−κk²t} cos(k y0)
    let (kappa, t, k) = (0.1, 0.5, 2.0);
    let cfg = SdeConfig::new(0.01, t).unwrap();
    for (i, y0) in [0.0, 0.4, 1.3].into_iter().enumerate() {
        let e = simulate_ensemble(
            &VelocityField::Zero,
            &DiffusivityModel::isotropic(kappa),
            Vec2::new(0.0, y0),
            &cfg,
            40 + i as u64,
            40_000,
        )
        .unwrap();
        let d = estimate_density(|p: Vec2| (k * p.y).cos(), &e).unwrap();
        let exact = (-kappa * k * k * t).exp() * (k * y0).cos();
        assert!(
            (d.mean - exact).abs() < 4.0 * d.standard_error,
            "y0 = {y0}: {} vs {exact}",
            d.mean
        );
    }
}

#[test]
fn standard_error_scales_as_inverse_root_n() {
    let cfg = SdeConfig::new(0.02, 1.0).unwrap();
    let ns = [1000usize, 4000, 16_000, 64_000];
    let ses: Vec<f64> = ns
        .iter()
        .map(|&n| {
            let e = simulate_ensemble(
                &VelocityField::ConstantShear { s: 1.0 },
                &DiffusivityModel::isotropic(0.1),
                Vec2::new(0.5, 0.5),
                &cfg,
                11,
                n,
            )
            .unwrap();
            estimate_density(|p: Vec2| p.x.sin(), &e).unwrap().standard_error
        })
        .collect();
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = ses.iter().map(|s| s.ln()).collect();
    let mx = xs.iter().sum::<f64>() / 4.0;
    let my = ys.iter().sum::<f64>() / 4.0;
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((slope + 0.5).abs() < 0.05, "slope {slope}");
}

#[test]
fn ensembles_are_reproducible_and_seed_sensitive() {
    let cfg = SdeConfig::new(0.05, 1.0).unwrap();
    let run = |seed| {
        simulate_ensemble(
            &VelocityField::Circular { q: 1.0 },
            &DiffusivityModel::anisotropic(0.01, 1.0),
            Vec2::new(0.5, 0.0),
            &cfg,
            seed,
            500,
        )
        .unwrap()
    };
    assert_eq!(run(5), run(5));
    assert_ne!(run(5).terminal_points, run(6).terminal_points);
}
