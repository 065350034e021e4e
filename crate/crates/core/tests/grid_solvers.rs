use std::f64::consts::PI;

use enhdiff::grid::{
    read_binary, read_csv, write_binary, write_csv, CartesianGrid, CartesianStepper, PolarGrid, PolarStepper,
    ScalarField, Snapshot,
};
use enhdiff::{DiffusivityModel, Vec2, VelocityField};

fn interior_error(a: &ScalarField<CartesianGrid>, b: &ScalarField<CartesianGrid>) -> f64 {
    let g = a.grid;
    let mut worst: f64 = 0.0;
    for j in 0..g.ny {
        if g.y(j).abs() > 0.5 * g.ly {
            continue;
        }
        for i in 0..g.nx {
            worst = worst.max((a.get(j, i) - b.get(j, i)).abs());
        }
    }
    worst
}

#[test]
fn strang_splitting_converges_at_second_order() {
    let g = CartesianGrid::new(64, 64, PI).unwrap();
    let flow = VelocityField::PowerShear { n: 2 };
    let rho0 = |p: Vec2| p.x.sin() * (-p.y * p.y).exp();
    let solve = |dt: f64| {
        let mut f = ScalarField::from_fn(g, rho0).unwrap();
        CartesianStepper::new(g, &flow, 0.05, dt)
            .unwrap()
            .run(&mut f, (2.0 / dt).round() as usize)
            .unwrap();
        f
    };
    let reference = solve(0.0025);
    let errors: Vec<f64> = [0.04, 0.02, 0.01]
        .iter()
        .map(|&dt| interior_error(&solve(dt), &reference))
        .collect();
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order > 1.7, "errors {errors:?}");
    }
}

#[test]
fn shear_dissipates_faster_than_diffusion_alone() {
    let kappa = 1e-3;
    let g = CartesianGrid::new(128, 128, PI).unwrap();
    let decay = |flow: VelocityField| {
        let mut f = ScalarField::from_fn(g, |p| p.x.sin()).unwrap();
        let l0 = f.l2_norm();
        CartesianStepper::new(g, &flow, kappa, 0.02)
            .unwrap()
            .run(&mut f, 500)
            .unwrap();
        f.l2_norm() / l0
    };
    let plain = decay(VelocityField::Zero);
    let sheared = decay(VelocityField::ConstantShear { s: 1.0 });
    assert!((plain - (-kappa * 10.0f64).exp()).abs() < 1e-9);
    assert!(sheared < 0.9 * plain, "{sheared} vs {plain}");
}

#[test]
fn polar_norm_decays_monotonically_and_faster_with_differential_rotation() {
    let grid = PolarGrid::new(96, 64, 0.5, 1.5).unwrap();
    let data = |p: Vec2| {
        let r = p.norm();
        (PI * (r - 0.5)).sin().powi(2) * p.angle().sin()
    };
    let diff = DiffusivityModel::isotropic(1e-3);
    let history = |q: f64| {
        let s = PolarStepper::new(grid, q, &diff, 0.01).unwrap();
        let mut state = s.to_spectral(&ScalarField::from_fn(grid, data).unwrap()).unwrap();
        let mut norms = vec![s.l2_sq(&state)];
        for _ in 0..40 {
            s.advance(&mut state, 50);
            norms.push(s.l2_sq(&state));
        }
        norms
    };
    let strong = history(3.0);
    let weak = history(0.01);
    assert!(strong.windows(2).all(|w| w[1] <= w[0]));
    assert!(weak.windows(2).all(|w| w[1] <= w[0]));
    assert!(
        strong.last().unwrap() < &(0.5 * weak.last().unwrap()),
        "{strong:?} vs {weak:?}"
    );
}

#[test]
fn snapshots_round_trip_through_csv_and_binary() {
    let g = CartesianGrid::new(16, 8, 1.5).unwrap();
    let f = ScalarField::from_fn(g, |p| p.x.cos() * p.y + 0.25).unwrap();

    let mut csv_buf = Vec::new();
    write_csv(&f, &mut csv_buf).unwrap();
    let text = String::from_utf8(csv_buf.clone()).unwrap();
    assert!(text.starts_with("x,y,value\n"));
    let rows = read_csv::<CartesianGrid, _>(csv_buf.as_slice()).unwrap();
    assert_eq!(rows.len(), 16 * 8);
    for r in rows {
        assert!((r[2] - (r[0].cos() * r[1] + 0.25)).abs() < 1e-12);
    }

    let mut bin = Vec::new();
    write_binary(&f, &mut bin).unwrap();
    assert_eq!(&bin[..5], b"ENHD1");
    match read_binary(bin.as_slice()).unwrap() {
        Snapshot::Cartesian(back) => assert_eq!(back, f),
        Snapshot::Polar(_) => panic!("grid kind lost"),
    }
}
