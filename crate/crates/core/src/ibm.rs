//! Regularized delta functions, interpolation of a grid field onto interface
//! markers, and the adjoint spreading operator.
//!
//! Two kernels share the support `[−ε, ε]` and the peak value `1/ε`:
//!
//! * [`KernelShape::Cosine`], `(1/(2ε))(1 + cos(πr/ε))`;
//! * [`KernelShape::Peskin4`], the four-point kernel `φ(r/h)/h` with
//!   `h = ε/2`.
//!
//! Both have a discrete unit sum on grids with `ε` a whole number of cells
//! (an even number for `Peskin4`). `Peskin4` also has a vanishing discrete
//! first moment, so it interpolates linear fields exactly; the cosine kernel
//! only does so for markers placed symmetrically between nodes.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::flows::Vec2;
use crate::grid::{CartesianGrid, ScalarField};
use crate::par::tree_sum;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelShape {
    Cosine,
    #[default]
    Peskin4,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularizedDelta {
    pub epsilon: f64,
    pub kernel: KernelShape,
}

impl RegularizedDelta {
    pub fn new(epsilon: f64, kernel: KernelShape) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::Config(format!("kernel half-width {epsilon} must be > 0")));
        }
        Ok(Self { epsilon, kernel })
    }

    /// Default half-width of two grid spacings.
    pub fn for_grid(grid: &CartesianGrid, kernel: KernelShape) -> Result<Self> {
        Self::new(2.0 * grid.dx().max(grid.dy()), kernel)
    }

    /// One-dimensional kernel value.
    pub fn eval(&self, r: f64) -> f64 {
        delta_eval(self, r)
    }

    /// Tensor-product kernel `δ(r.x) δ(r.y)`.
    pub fn eval_2d(&self, r: Vec2) -> f64 {
        self.eval(r.x) * self.eval(r.y)
    }
}

fn peskin4(s: f64) -> f64 {
    let a = s.abs();
    if a <= 1.0 {
        (3.0 - 2.0 * a + (1.0 + 4.0 * a - 4.0 * a * a).sqrt()) / 8.0
    } else if a < 2.0 {
        (5.0 - 2.0 * a - (-7.0 + 12.0 * a - 4.0 * a * a).max(0.0).sqrt()) / 8.0
    } else {
        0.0
    }
}

/// Closed-form kernel value; zero outside `[−ε, ε]`.
pub fn delta_eval(delta: &RegularizedDelta, r: f64) -> f64 {
    let eps = delta.epsilon;
    if !(r.abs() < eps) {
        return 0.0;
    }
    match delta.kernel {
        KernelShape::Cosine => (1.0 + (std::f64::consts::PI * r / eps).cos()) / (2.0 * eps),
        KernelShape::Peskin4 => {
            let h = 0.5 * eps;
            peskin4(r / h) / h
        }
    }
}

/// Immersed interface: markers with arc-length weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interface {
    pub markers: Vec<Vec2>,
    pub weights: Vec<f64>,
}

impl Interface {
    pub fn new(markers: Vec<Vec2>, weights: Vec<f64>) -> Result<Self> {
        if markers.len() != weights.len() {
            return Err(Error::Config(format!(
                "{} markers but {} surface weights",
                markers.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::Config(format!("surface weight {w} must be > 0")));
        }
        Ok(Self { markers, weights })
    }

    /// `n` equispaced markers on a circle.
    pub fn circle(center: Vec2, radius: f64, n: usize) -> Result<Self> {
        if n == 0 || !(radius > 0.0) {
            return Err(Error::Config("circle needs n > 0 markers and radius > 0".into()));
        }
        let dth = std::f64::consts::TAU / n as f64;
        let markers = (0..n)
            .map(|k| center + Vec2::from_polar(radius, k as f64 * dth))
            .collect();
        Self::new(markers, vec![radius * dth; n])
    }

    /// Reads `x,y,dS` rows.
    pub fn from_csv<R: Read>(input: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(input);
        let header = rd.headers()?.clone();
        if header.iter().ne(["x", "y", "dS"]) {
            return Err(Error::Format(format!(
                "interface CSV header must be x,y,dS, found {:?}",
                header.iter().collect::<Vec<_>>()
            )));
        }
        let mut markers = Vec::new();
        let mut weights = Vec::new();
        for (k, rec) in rd.records().enumerate() {
            let rec = rec?;
            let num = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::Format(format!("interface row {}: bad column {}", k + 2, i + 1)))
            };
            markers.push(Vec2::new(num(0)?, num(1)?));
            weights.push(num(2)?);
        }
        Self::new(markers, weights)
    }

    pub fn len(&self) -> usize {
        self.markers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.markers.is_empty()
    }

    /// Total arc length `Σ dS_k`.
    pub fn measure(&self) -> f64 {
        tree_sum(&self.weights)
    }
}

/// How stencils that cross the edge of the grid are treated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeMode {
    /// Indices wrap around the periodic domain.
    #[default]
    Periodic,
    /// Markers must stay at least `ε` inside the domain.
    Bounded,
}

/// Node indices and weights `δ(x_i − X)·h` along one axis.
#[allow(clippy::too_many_arguments)]
fn axis_stencil(
    delta: &RegularizedDelta,
    pos: f64,
    origin: f64,
    h: f64,
    n: usize,
    period: f64,
    edge: EdgeMode,
    axis: &str,
) -> Result<Vec<(usize, f64)>> {
    let eps = delta.epsilon;
    if edge == EdgeMode::Bounded && (pos - eps < origin || pos + eps > origin + period) {
        return Err(Error::Geometry(format!(
            "marker {axis} = {pos} lies within ε = {eps} of the domain edge"
        )));
    }
    let s = (pos - origin) / h;
    let reach = eps / h;
    let lo = (s - reach).floor() as i64;
    let hi = (s + reach).ceil() as i64;
    let mut out = Vec::with_capacity((hi - lo + 1) as usize);
    for i in lo..=hi {
        let w = delta.eval((i as f64 - s) * h) * h;
        if w != 0.0 {
            out.push((i.rem_euclid(n as i64) as usize, w));
        }
    }
    Ok(out)
}

fn check_resolution(delta: &RegularizedDelta, grid: &CartesianGrid) -> Result<()> {
    let need = 2.0 * grid.dx().max(grid.dy());
    if delta.epsilon < need * (1.0 - 1e-12) {
        return Err(Error::Config(format!(
            "kernel half-width {} under-resolved (needs ≥ {need})",
            delta.epsilon
        )));
    }
    Ok(())
}

type Stencil = (Vec<(usize, f64)>, Vec<(usize, f64)>);

fn marker_stencil(delta: &RegularizedDelta, grid: &CartesianGrid, p: Vec2, edge: EdgeMode) -> Result<Stencil> {
    let sx = axis_stencil(delta, p.x, 0.0, grid.dx(), grid.nx, std::f64::consts::TAU, edge, "x")?;
    let sy = axis_stencil(delta, p.y, -grid.ly, grid.dy(), grid.ny, 2.0 * grid.ly, edge, "y")?;
    Ok((sx, sy))
}

/// `ρ_Γ(X_k) = Σ_nodes δ_ε(x − X_k) ρ(x) dx dy` for every marker.
pub fn interface_sample(
    fieldval: &ScalarField<CartesianGrid>,
    iface: &Interface,
    delta: &RegularizedDelta,
    edge: EdgeMode,
) -> Result<Vec<f64>> {
    let g = fieldval.grid;
    check_resolution(delta, &g)?;
    iface
        .markers
        .iter()
        .map(|&p| {
            let (sx, sy) = marker_stencil(delta, &g, p, edge)?;
            let rows: Vec<f64> = sy
                .iter()
                .map(|&(j, wy)| {
                    let t: Vec<f64> = sx.iter().map(|&(i, wx)| wx * fieldval.get(j, i)).collect();
                    wy * tree_sum(&t)
                })
                .collect();
            Ok(tree_sum(&rows))
        })
        .collect()
}

/// `F(x) = Σ_k δ_ε(x − X_k) v_k dS_k`, the adjoint of [`interface_sample`]
/// under `⟨·,·⟩_grid = Σ · dx dy` and `⟨·,·⟩_Γ = Σ · dS`.
pub fn spread(
    values: &[f64],
    iface: &Interface,
    delta: &RegularizedDelta,
    grid: &CartesianGrid,
    edge: EdgeMode,
) -> Result<ScalarField<CartesianGrid>> {
    if values.len() != iface.len() {
        return Err(Error::Config(format!(
            "{} values for {} markers",
            values.len(),
            iface.len()
        )));
    }
    check_resolution(delta, grid)?;
    let area = grid.cell_area();
    let mut out = vec![0.0; grid.nx * grid.ny];
    for (k, &p) in iface.markers.iter().enumerate() {
        let (sx, sy) = marker_stencil(delta, grid, p, edge)?;
        let a = values[k] * iface.weights[k] / area;
        for &(j, wy) in &sy {
            for &(i, wx) in &sx {
                out[j * grid.nx + i] += a * wy * wx;
            }
        }
    }
    ScalarField::from_values(*grid, out, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> CartesianGrid {
        CartesianGrid::new(32, 32, std::f64::consts::PI).unwrap()
    }

    #[test]
    fn kernel_peaks_and_support() {
        for k in [KernelShape::Cosine, KernelShape::Peskin4] {
            let d = RegularizedDelta::new(0.3, k).unwrap();
            assert!((d.eval(0.0) - 1.0 / 0.3).abs() < 1e-12);
            assert_eq!(d.eval(0.3), 0.0);
            assert_eq!(d.eval(-0.31), 0.0);
            assert_eq!(d.eval(0.17), d.eval(-0.17));
        }
    }

    #[test]
    fn kernel_integrates_to_one() {
        for k in [KernelShape::Cosine, KernelShape::Peskin4] {
            let d = RegularizedDelta::new(0.5, k).unwrap();
            let n = 10_000;
            let h = 1.0 / n as f64;
            let s: f64 = (0..n).map(|i| d.eval(-0.5 + (i as f64 + 0.5) * h) * h).sum();
            assert!((s - 1.0).abs() < 1e-7, "{k:?} {s}");
        }
    }

    #[test]
    fn node_centred_stencil() {
        // both kernels give weights 1/4, 1/2, 1/4 per axis at ε = 2dx
        let g = grid();
        for k in [KernelShape::Cosine, KernelShape::Peskin4] {
            let d = RegularizedDelta::for_grid(&g, k).unwrap();
            let s = axis_stencil(
                &d,
                g.x(5),
                0.0,
                g.dx(),
                g.nx,
                std::f64::consts::TAU,
                EdgeMode::Periodic,
                "x",
            )
            .unwrap();
            let w: Vec<(usize, f64)> = s.iter().map(|&(i, w)| (i, (w * 1e12).round() / 1e12)).collect();
            assert_eq!(w, vec![(4, 0.25), (5, 0.5), (6, 0.25)]);
        }
    }

    #[test]
    fn bounded_edge_rejects_markers_near_seam() {
        let g = grid();
        let d = RegularizedDelta::for_grid(&g, KernelShape::Peskin4).unwrap();
        let f = ScalarField::from_fn(g, |_| 1.0).unwrap();
        let near = Interface::new(vec![Vec2::new(0.1, 0.0)], vec![1.0]).unwrap();
        assert!(matches!(
            interface_sample(&f, &near, &d, EdgeMode::Bounded),
            Err(Error::Geometry(_))
        ));
        let v = interface_sample(&f, &near, &d, EdgeMode::Periodic).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_values_spread_to_zero() {
        let g = grid();
        let d = RegularizedDelta::for_grid(&g, KernelShape::Cosine).unwrap();
        let iface = Interface::circle(Vec2::new(3.0, 0.0), 1.0, 16).unwrap();
        let f = spread(&[0.0; 16], &iface, &d, &g, EdgeMode::Periodic).unwrap();
        assert!(f.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_marker_stamp() {
        let g = grid();
        let d = RegularizedDelta::for_grid(&g, KernelShape::Peskin4).unwrap();
        let p = Vec2::new(2.05, 0.3);
        let iface = Interface::new(vec![p], vec![0.7]).unwrap();
        let f = spread(&[1.0], &iface, &d, &g, EdgeMode::Periodic).unwrap();
        for j in 0..g.ny {
            for i in 0..g.nx {
                let r = Vec2::new(g.x(i), g.y(j)) - p;
                assert!((f.get(j, i) - 0.7 * d.eval_2d(r)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn interface_csv() {
        let text = "x,y,dS\n1.0,0.5,0.1\n2.0,-0.5,0.2\n";
        let i = Interface::from_csv(text.as_bytes()).unwrap();
        assert_eq!(i.len(), 2);
        assert!((i.measure() - 0.3).abs() < 1e-15);
        assert!(Interface::from_csv("a,b,c\n".as_bytes()).is_err());
        assert!(Interface::from_csv("x,y,dS\n1,2,-1\n".as_bytes()).is_err());
    }
}
