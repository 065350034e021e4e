//! Browser bindings: a shear-flow and a circular-flow solver that can be
//! stepped from JavaScript, plus the predicted mixing-time slopes.

use enhdiff::experiments::{build_initial_data, predicted_slope, Family, InitialDataKind};
use enhdiff::grid::{CartesianGrid, CartesianStepper, PolarGrid, PolarState, PolarStepper, ScalarField};
use enhdiff::{DiffusivityModel, VelocityField};
use wasm_bindgen::prelude::*;

fn js_err(e: enhdiff::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// `ρ0 = φ(y) sin x` advected by `u = (y^n, 0)` on a periodic strip.
#[wasm_bindgen]
pub struct ShearDemo {
    stepper: CartesianStepper,
    field: ScalarField<CartesianGrid>,
    initial_norm: f64,
    steps: usize,
    dt: f64,
}

#[wasm_bindgen]
impl ShearDemo {
    #[wasm_bindgen(constructor)]
    pub fn new(n: u32, kappa: f64, size: usize, dt: f64) -> Result<ShearDemo, JsError> {
        let flow = VelocityField::PowerShear { n };
        let data = build_initial_data(InitialDataKind::TentShear, &flow, kappa).map_err(js_err)?;
        let grid = CartesianGrid::new(size, size, 8.0 * kappa.powf(data.beta)).map_err(js_err)?;
        let field = ScalarField::from_fn(grid, |p| data.eval(p)).map_err(js_err)?;
        let stepper = CartesianStepper::new(grid, &flow, kappa, dt).map_err(js_err)?;
        Ok(ShearDemo {
            initial_norm: field.l2_norm(),
            stepper,
            field,
            steps: 0,
            dt,
        })
    }

    pub fn advance(&mut self, steps: usize) -> Result<(), JsError> {
        self.stepper.run(&mut self.field, steps).map_err(js_err)?;
        self.steps += steps;
        Ok(())
    }

    /// Field values, rows bottom to top.
    pub fn values(&self) -> Vec<f64> {
        self.field.values.clone()
    }

    pub fn size(&self) -> usize {
        self.field.grid.nx
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    /// `‖ρ(t)‖ / ‖ρ0‖`.
    pub fn relative_norm(&self) -> f64 {
        self.field.l2_norm() / self.initial_norm
    }
}

/// Annular datum rotated by `u = r^q (−y, x)` with diffusivity `κ r^γ`.
#[wasm_bindgen]
pub struct PolarDemo {
    stepper: PolarStepper,
    state: PolarState,
    initial_norm_sq: f64,
    steps: usize,
    dt: f64,
}

#[wasm_bindgen]
impl PolarDemo {
    #[wasm_bindgen(constructor)]
    pub fn new(q: f64, gamma: f64, kappa: f64, size: usize, dt: f64) -> Result<PolarDemo, JsError> {
        let flow = VelocityField::Circular { q };
        let data = build_initial_data(InitialDataKind::AnnulusCircular, &flow, kappa).map_err(js_err)?;
        let grid = PolarGrid::for_scale(kappa, data.beta, size, size).map_err(js_err)?;
        let diff = if gamma == 0.0 {
            DiffusivityModel::isotropic(kappa)
        } else {
            DiffusivityModel::anisotropic(kappa, gamma)
        };
        let stepper = PolarStepper::new(grid, q, &diff, dt).map_err(js_err)?;
        let field = ScalarField::from_fn(grid, |p| data.eval(p)).map_err(js_err)?;
        let state = stepper.to_spectral(&field).map_err(js_err)?;
        Ok(PolarDemo {
            initial_norm_sq: stepper.l2_sq(&state),
            stepper,
            state,
            steps: 0,
            dt,
        })
    }

    pub fn advance(&mut self, steps: usize) {
        self.stepper.advance(&mut self.state, steps);
        self.steps += steps;
    }

    /// Field values, row `i` at radius `r_i`, column `j` at angle `θ_j`.
    pub fn values(&self) -> Result<Vec<f64>, JsError> {
        Ok(self.stepper.to_field(&self.state).map_err(js_err)?.values)
    }

    pub fn size(&self) -> usize {
        self.stepper.grid().nr
    }

    pub fn r_min(&self) -> f64 {
        self.stepper.grid().r_min
    }

    pub fn r_max(&self) -> f64 {
        self.stepper.grid().r_max
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    pub fn relative_norm(&self) -> f64 {
        (self.stepper.l2_sq(&self.state) / self.initial_norm_sq).sqrt()
    }
}

/// Predicted `d log T / d log κ`. `kind` is `shear` (parameter `n`),
/// `holder` (`α`) or `circular` (`q`, with radial exponent `gamma`).
#[wasm_bindgen(js_name = predictedSlope)]
pub fn predicted_slope_js(kind: &str, parameter: f64, gamma: f64) -> Result<f64, JsError> {
    let family = match kind {
        "shear" if parameter >= 1.0 && parameter.fract() == 0.0 => Family::CriticalShear { n: parameter as u32 },
        "holder" => Family::Holder { alpha: parameter },
        "circular" if gamma == 0.0 => Family::Circular { q: parameter },
        "circular" => Family::Anisotropic { q: parameter, gamma },
        _ => {
            return Err(JsError::new(&format!(
                "unknown family {kind} with parameter {parameter}"
            )))
        }
    };
    predicted_slope(&family).map_err(js_err)
}
