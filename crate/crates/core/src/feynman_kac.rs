//! Feynman-Kac estimators: `ρ(t, x) = E ρ0(X_t(x))`, the pointwise variance
//! of `ρ0(X_t(x))`, and its spatial integral, which equals the cumulative
//! dissipation `κ ∫₀ᵗ ‖∇ρ‖² ds` of the exact dynamics.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::flows::{DiffusivityModel, Vec2, VelocityField};
use crate::par::{map_indexed, tree_sum};
use crate::stats::SampleMoments;
use crate::stochastic::{mix_seed, two_point_separation, Coupling, EulerMaruyama, SdeConfig, TrajectoryEnsemble};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointEstimate {
    pub mean: f64,
    pub standard_error: f64,
    pub n_samples: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub variance: f64,
    pub standard_error: f64,
}

fn sampled_values<F>(rho0: &F, ensemble: &TrajectoryEnsemble) -> Vec<f64>
where
    F: Fn(Vec2) -> f64,
{
    ensemble.terminal_points.iter().map(|&p| rho0(p)).collect()
}

/// Sample mean of `ρ0` over the ensemble's terminal points.
pub fn estimate_density<F>(rho0: F, ensemble: &TrajectoryEnsemble) -> Result<PointEstimate>
where
    F: Fn(Vec2) -> f64,
{
    if ensemble.is_empty() {
        return Err(Error::Estimator("density estimate from an empty ensemble".into()));
    }
    let m = SampleMoments::from_slice(&sampled_values(&rho0, ensemble));
    if !m.mean.is_finite() {
        return Err(Error::Estimator("initial data returned a non-finite value".into()));
    }
    Ok(PointEstimate {
        mean: m.mean,
        standard_error: m.mean_se(),
        n_samples: m.n,
    })
}

/// Unbiased sample variance of `ρ0` over the ensemble's terminal points.
pub fn estimate_variance<F>(rho0: F, ensemble: &TrajectoryEnsemble) -> Result<VarianceEstimate>
where
    F: Fn(Vec2) -> f64,
{
    if ensemble.terminal_points.len() < 2 {
        return Err(Error::Estimator(format!(
            "variance needs at least 2 samples, got {}",
            ensemble.terminal_points.len()
        )));
    }
    let m = SampleMoments::from_slice(&sampled_values(&rho0, ensemble));
    Ok(VarianceEstimate {
        variance: m.variance,
        standard_error: m.variance_se(),
    })
}

/// Quadrature nodes and weights over a spatial domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub nodes: Vec<Vec2>,
    pub weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn new(nodes: Vec<Vec2>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::Config(format!(
                "{} quadrature nodes but {} weights",
                nodes.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::Config("quadrature weights must be non-negative".into()));
        }
        Ok(Self { nodes, weights })
    }

    /// `T × [y_lo, y_hi]`: `nx` equispaced nodes in x (exact for trigonometric
    /// polynomials of degree < nx) times `ny` midpoint nodes in y.
    pub fn periodic_strip(nx: usize, y_lo: f64, y_hi: f64, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 || !(y_hi > y_lo) {
            return Err(Error::Config("empty periodic strip quadrature".into()));
        }
        let hx = TAU / nx as f64;
        let hy = (y_hi - y_lo) / ny as f64;
        let mut nodes = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            let y = y_lo + (j as f64 + 0.5) * hy;
            for i in 0..nx {
                nodes.push(Vec2::new(i as f64 * hx, y));
            }
        }
        let weights = vec![hx * hy; nx * ny];
        Ok(Self { nodes, weights })
    }

    /// Annulus `r_lo ≤ r ≤ r_hi` with midpoint radii and equispaced angles.
    pub fn annulus(r_lo: f64, r_hi: f64, nr: usize, ntheta: usize) -> Result<Self> {
        if nr == 0 || ntheta == 0 || !(r_hi > r_lo) || r_lo < 0.0 {
            return Err(Error::Config("empty annulus quadrature".into()));
        }
        let dr = (r_hi - r_lo) / nr as f64;
        let dth = TAU / ntheta as f64;
        let mut nodes = Vec::with_capacity(nr * ntheta);
        let mut weights = Vec::with_capacity(nr * ntheta);
        for i in 0..nr {
            let r = r_lo + (i as f64 + 0.5) * dr;
            for j in 0..ntheta {
                nodes.push(Vec2::from_polar(r, j as f64 * dth));
                weights.push(r * dr * dth);
            }
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Sum of the weights, i.e. the measure of the covered domain.
    pub fn measure(&self) -> f64 {
        tree_sum(&self.weights)
    }

    /// `Σ w_i f(x_i)`.
    pub fn integrate<F: Fn(Vec2) -> f64>(&self, f: F) -> f64 {
        let terms: Vec<f64> = self.nodes.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).collect();
        tree_sum(&terms)
    }
}

/// Per-node variances of `ρ0(X_t(x_i))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceField {
    pub nodes: Vec<Vec2>,
    pub weights: Vec<f64>,
    /// Clipped at zero.
    pub variance: Vec<f64>,
    pub standard_error: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratedVariance {
    /// `½ Σ w_i Var_i`
    pub value: f64,
    pub standard_error: f64,
    pub field: VarianceField,
}

/// Values `ρ0(X_k)` of every sample at every ladder step, sample-major.
fn node_samples<F>(
    rho0: &F,
    em: &EulerMaruyama<'_>,
    x0: Vec2,
    cfg: &SdeConfig,
    ladder: &[usize],
    n_samples: usize,
    node_seed: u64,
) -> Result<Vec<f64>>
where
    F: Fn(Vec2) -> f64,
{
    let m = ladder.len();
    let mut out = vec![0.0; n_samples * m];
    for s in 0..n_samples {
        let row = &mut out[s * m..(s + 1) * m];
        let mut next = 0;
        em.run_observed(x0, cfg, mix_seed(node_seed, s as u64), |k, x| {
            while next < m && ladder[next] == k {
                row[next] = rho0(x);
                next += 1;
            }
        })?;
    }
    Ok(out)
}

/// Converts requested times into step counts on the `cfg` grid (rounded to
/// the nearest step, at least one step, at most the final step).
pub fn ladder_steps(cfg: &SdeConfig, times: &[f64]) -> Result<Vec<usize>> {
    let n = cfg.n_steps();
    let mut steps: Vec<usize> = Vec::with_capacity(times.len());
    for &t in times {
        if !(t > 0.0) || t > cfg.t_final * (1.0 + 1e-12) {
            return Err(Error::Config(format!("ladder time {t} outside (0, {}]", cfg.t_final)));
        }
        let k = if t >= cfg.t_final * (1.0 - 1e-12) {
            n
        } else {
            ((t / cfg.dt).round() as usize).clamp(1, n)
        };
        if let Some(&last) = steps.last() {
            if k < last {
                return Err(Error::Config("ladder times must be increasing".into()));
            }
        }
        steps.push(k);
    }
    Ok(steps)
}

/// One rung of an integrated-variance ladder.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderPoint {
    pub time: f64,
    pub value: f64,
    pub standard_error: f64,
}

/// `½ Σ_i w_i Var ρ0(X_t(x_i))` at every ladder time, from one set of paths.
///
/// Node `i` uses base seed `mix_seed(seed, i)`; results are independent of
/// the worker count.
#[allow(clippy::too_many_arguments)]
pub fn integrated_variance_ladder<F>(
    rho0: F,
    field: &VelocityField,
    diff: &DiffusivityModel,
    grid: &QuadratureGrid,
    cfg: &SdeConfig,
    times: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<LadderPoint>>
where
    F: Fn(Vec2) -> f64 + Sync,
{
    let (points, _) = ladder_impl(&rho0, field, diff, grid, cfg, times, n_samples, seed, false)?;
    Ok(points)
}

#[allow(clippy::too_many_arguments)]
fn ladder_impl<F>(
    rho0: &F,
    field: &VelocityField,
    diff: &DiffusivityModel,
    grid: &QuadratureGrid,
    cfg: &SdeConfig,
    times: &[f64],
    n_samples: usize,
    seed: u64,
    keep_field: bool,
) -> Result<(Vec<LadderPoint>, Option<VarianceField>)>
where
    F: Fn(Vec2) -> f64 + Sync,
{
    if grid.is_empty() {
        return Err(Error::Estimator("integrated variance over an empty grid".into()));
    }
    if n_samples < 2 {
        return Err(Error::Estimator(format!(
            "integrated variance needs at least 2 samples per node, got {n_samples}"
        )));
    }
    let em = EulerMaruyama::new(field, diff, cfg.noise)?;
    let ladder = ladder_steps(cfg, times)?;
    let m = ladder.len();
    // per node: (variance, se) for each ladder rung
    let per_node = map_indexed(grid.len(), |i| -> Result<Vec<(f64, f64)>> {
        let samples = node_samples(
            rho0,
            &em,
            grid.nodes[i],
            cfg,
            &ladder,
            n_samples,
            mix_seed(seed, i as u64),
        )?;
        let mut col = vec![0.0; n_samples];
        Ok((0..m)
            .map(|j| {
                for (s, c) in col.iter_mut().enumerate() {
                    *c = samples[s * m + j];
                }
                let mo = SampleMoments::from_slice(&col);
                (mo.variance.max(0.0), mo.variance_se())
            })
            .collect())
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut points = Vec::with_capacity(m);
    for (j, &k) in ladder.iter().enumerate() {
        let terms: Vec<f64> = per_node.iter().zip(&grid.weights).map(|(v, w)| w * v[j].0).collect();
        let se_terms: Vec<f64> = per_node
            .iter()
            .zip(&grid.weights)
            .map(|(v, w)| (w * v[j].1).powi(2))
            .collect();
        points.push(LadderPoint {
            time: cfg.time_after(k),
            value: 0.5 * tree_sum(&terms),
            standard_error: 0.5 * tree_sum(&se_terms).sqrt(),
        });
    }
    let field = keep_field.then(|| VarianceField {
        nodes: grid.nodes.clone(),
        weights: grid.weights.clone(),
        variance: per_node.iter().map(|v| v[m - 1].0).collect(),
        standard_error: per_node.iter().map(|v| v[m - 1].1).collect(),
    });
    Ok((points, field))
}

/// `½ Σ_i w_i Var ρ0(X_t(x_i))` at `t = cfg.t_final`, with the per-node field.
#[allow(clippy::too_many_arguments)]
pub fn integrated_variance<F>(
    rho0: F,
    field: &VelocityField,
    diff: &DiffusivityModel,
    grid: &QuadratureGrid,
    cfg: &SdeConfig,
    n_samples: usize,
    seed: u64,
) -> Result<IntegratedVariance>
where
    F: Fn(Vec2) -> f64 + Sync,
{
    let (points, vf) = ladder_impl(&rho0, field, diff, grid, cfg, &[cfg.t_final], n_samples, seed, true)?;
    let p = points[0];
    Ok(IntegratedVariance {
        value: p.value,
        standard_error: p.standard_error,
        field: vf.expect("field requested"),
    })
}

/// Measured terms of `Var f ≤ E f² ≤ (E f)² + E|∇f|²` for
/// `f(x) = ρ0(X_t(x))`, with `∇f` from common-noise central differences.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JensenChain {
    pub mean: f64,
    pub variance: f64,
    pub second_moment: f64,
    pub mean_sq_plus_grad_sq: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn jensen_chain_diagnostic<F>(
    rho0: F,
    field: &VelocityField,
    diff: &DiffusivityModel,
    x: Vec2,
    cfg: &SdeConfig,
    n_samples: usize,
    seed: u64,
    h: f64,
) -> Result<JensenChain>
where
    F: Fn(Vec2) -> f64 + Sync,
{
    if n_samples < 2 {
        return Err(Error::Estimator("Jensen diagnostic needs at least 2 samples".into()));
    }
    if !(h > 0.0) {
        return Err(Error::Config(format!("finite-difference step {h} must be > 0")));
    }
    let em = EulerMaruyama::new(field, diff, cfg.noise)?;
    let rows = map_indexed(n_samples, |i| -> Result<(f64, f64)> {
        let s = mix_seed(seed, i as u64);
        let f = |p: Vec2| em.run(p, cfg, s).map(&rho0);
        let f0 = f(x)?;
        let gx = (f(x + Vec2::new(h, 0.0))? - f(x - Vec2::new(h, 0.0))?) / (2.0 * h);
        let gy = (f(x + Vec2::new(0.0, h))? - f(x - Vec2::new(0.0, h))?) / (2.0 * h);
        Ok((f0, gx * gx + gy * gy))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let squares: Vec<f64> = values.iter().map(|v| v * v).collect();
    let grads: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let mo = SampleMoments::from_slice(&values);
    let n = n_samples as f64;
    Ok(JensenChain {
        mean: mo.mean,
        variance: mo.variance,
        second_moment: tree_sum(&squares) / n,
        mean_sq_plus_grad_sq: mo.mean * mo.mean + tree_sum(&grads) / n,
    })
}

/// Both sides of
/// `κ∫₀ᵗ‖∇ρ‖² ≤ C ‖∇ρ0‖²_∞ ∫∫ E|X_t(x) − X_t(y)|² dy dx`
/// with the constant `C` that makes it an equality for the measured values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationBound {
    pub dissipation: f64,
    pub dissipation_se: f64,
    pub separation_integral: f64,
    pub grad_sup_sq: f64,
    pub fitted_c: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn separation_bound_diagnostic<F>(
    rho0: F,
    grad_sup: f64,
    field: &VelocityField,
    diff: &DiffusivityModel,
    grid: &QuadratureGrid,
    cfg: &SdeConfig,
    coupling: Coupling,
    n_samples: usize,
    n_pairs: usize,
    seed: u64,
) -> Result<SeparationBound>
where
    F: Fn(Vec2) -> f64 + Sync,
{
    let lhs = integrated_variance(rho0, field, diff, grid, cfg, n_samples, seed)?;
    let n = grid.len();
    let pair_seed = mix_seed(seed, u64::MAX);
    let terms = map_indexed(n * n, |ij| -> Result<f64> {
        let (i, j) = (ij / n, ij % n);
        let s = two_point_separation(
            field,
            diff,
            grid.nodes[i],
            grid.nodes[j],
            cfg,
            coupling,
            n_pairs,
            mix_seed(pair_seed, ij as u64),
        )?;
        Ok(grid.weights[i] * grid.weights[j] * s.value)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let grad_sup_sq = grad_sup * grad_sup;
    let separation_integral = tree_sum(&terms);
    let rhs = grad_sup_sq * separation_integral;
    Ok(SeparationBound {
        dissipation: lhs.value,
        dissipation_se: lhs.standard_error,
        separation_integral,
        grad_sup_sq,
        fitted_c: if rhs > 0.0 { lhs.value / rhs } else { f64::NAN },
    })
}
