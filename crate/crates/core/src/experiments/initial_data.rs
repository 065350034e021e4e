use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::flows::{Vec2, VelocityField};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialDataKind {
    /// `φ(y) sin x` with `φ(y) = (κ^β − |y|)₊`.
    TentShear,
    /// `φ(r − 3κ^β) sin θ`, supported in `[2κ^β, 4κ^β]`.
    AnnulusCircular,
    /// `sin x`.
    SineX,
}

impl InitialDataKind {
    pub fn name(self) -> &'static str {
        match self {
            InitialDataKind::TentShear => "tent_shear",
            InitialDataKind::AnnulusCircular => "annulus_circular",
            InitialDataKind::SineX => "sine_x",
        }
    }
}

/// Where an initial datum is nonzero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Support {
    Strip { y_lo: f64, y_hi: f64 },
    Annulus { r_lo: f64, r_hi: f64 },
    Everywhere,
}

/// Localisation exponent `β` of the flow's initial data.
pub fn beta_for_flow(flow: &VelocityField) -> Result<f64> {
    match *flow {
        VelocityField::PowerShear { n } => Ok(1.0 / (n as f64 + 2.0)),
        VelocityField::ConstantShear { .. } => Ok(1.0 / 3.0),
        VelocityField::HolderShear { alpha, .. } => Ok(1.0 / (alpha + 2.0)),
        VelocityField::Circular { q } => Ok(1.0 / (q + 2.0)),
        VelocityField::Zero => Err(Error::Spec("the zero flow has no localisation scale".into())),
    }
}

/// An evaluable initial datum at a fixed `κ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub kind: InitialDataKind,
    pub kappa: f64,
    pub beta: f64,
    /// `κ^β` (zero for `SineX`).
    pub scale: f64,
}

fn tent(s: f64, u: f64) -> f64 {
    (s - u.abs()).max(0.0)
}

impl InitialData {
    pub fn eval(&self, p: Vec2) -> f64 {
        match self.kind {
            InitialDataKind::SineX => p.x.sin(),
            InitialDataKind::TentShear => tent(self.scale, p.y) * p.x.sin(),
            InitialDataKind::AnnulusCircular => {
                let r = p.norm();
                let v = tent(self.scale, r - 3.0 * self.scale);
                if v == 0.0 {
                    0.0
                } else {
                    v * p.y / r
                }
            }
        }
    }

    pub fn support(&self) -> Support {
        let s = self.scale;
        match self.kind {
            InitialDataKind::SineX => Support::Everywhere,
            InitialDataKind::TentShear => Support::Strip { y_lo: -s, y_hi: s },
            InitialDataKind::AnnulusCircular => Support::Annulus {
                r_lo: 2.0 * s,
                r_hi: 4.0 * s,
            },
        }
    }

    /// `sup |∇ρ0|`.
    pub fn grad_sup(&self) -> f64 {
        // |∇ρ0|² = φ'² sin² + (φ/r)² cos² with |φ'| = 1, φ ≤ κ^β < 1 and
        // φ/r ≤ ½ on the annulus
        1.0
    }

    /// Exact `‖ρ0‖²`; `SineX` and `TentShear` on `T × [−L_y, L_y)`.
    pub fn l2_sq(&self, ly: f64) -> f64 {
        let s = self.scale;
        match self.kind {
            InitialDataKind::SineX => 2.0 * PI * ly,
            InitialDataKind::TentShear => PI * 2.0 * s.powi(3) / 3.0,
            // ∫ φ(r − 3s)² r dr = 3s · 2s³/3 by symmetry of φ
            InitialDataKind::AnnulusCircular => PI * 2.0 * s.powi(4),
        }
    }
}

/// Builds the initial datum matching `flow` at diffusivity `kappa`.
pub fn build_initial_data(kind: InitialDataKind, flow: &VelocityField, kappa: f64) -> Result<InitialData> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::Config(format!("κ = {kappa} not in (0, 1)")));
    }
    let (beta, scale) = match kind {
        InitialDataKind::SineX => {
            if flow.is_circular() {
                return Err(Error::Spec("sine_x data needs a shear or zero flow".into()));
            }
            (0.0, 0.0)
        }
        InitialDataKind::TentShear => {
            if !flow.is_shear() || matches!(flow, VelocityField::Zero) {
                return Err(Error::Spec(format!(
                    "tent_shear data needs a shear flow, got {}",
                    flow.kind()
                )));
            }
            let b = beta_for_flow(flow)?;
            (b, kappa.powf(b))
        }
        InitialDataKind::AnnulusCircular => {
            if !flow.is_circular() {
                return Err(Error::Spec(format!(
                    "annulus_circular data needs a circular flow, got {}",
                    flow.kind()
                )));
            }
            let b = beta_for_flow(flow)?;
            (b, kappa.powf(b))
        }
    };
    Ok(InitialData {
        kind,
        kappa,
        beta,
        scale,
    })
}
