//! Velocity fields and diffusivity models.
//!
//! Every flow here is steady and divergence-free: shears depend only on `y`
//! and the circular flow rotates with an angular speed that depends only on
//! the radius.

use std::ops::{Add, Mul, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(r: f64, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(r * c, r * s)
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Polar angle in `[0, 2π)`.
    pub fn angle(self) -> f64 {
        let a = self.y.atan2(self.x);
        if a < 0.0 {
            a + std::f64::consts::TAU
        } else {
            a
        }
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

/// Closed family of steady, divergence-free flows.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VelocityField {
    Zero,
    /// `u = (yⁿ, 0)`: a critical point of order `n` at `y = 0`.
    PowerShear {
        n: u32,
    },
    /// `u = (c·|y|^α, 0)`.
    HolderShear {
        alpha: f64,
        c: f64,
    },
    /// Pure rotation with angular speed `r^q`.
    Circular {
        q: f64,
    },
    /// `u = (s·y, 0)`.
    ConstantShear {
        s: f64,
    },
}

impl VelocityField {
    /// Checks the parameter ranges of the variant.
    pub fn validate(&self) -> Result<()> {
        match *self {
            VelocityField::Zero => Ok(()),
            VelocityField::PowerShear { n } if n >= 1 => Ok(()),
            VelocityField::PowerShear { n } => Err(Error::Config(format!("power shear order n = {n} must be >= 1"))),
            VelocityField::HolderShear { alpha, c } => {
                if !(alpha > 0.0 && alpha <= 1.0) {
                    return Err(Error::Config(format!("Hölder exponent {alpha} not in (0, 1]")));
                }
                if !(c > 0.0 && c.is_finite()) {
                    return Err(Error::Config(format!("Hölder constant {c} must be > 0")));
                }
                Ok(())
            }
            VelocityField::Circular { q } if q > 0.0 && q.is_finite() => Ok(()),
            VelocityField::Circular { q } => Err(Error::Config(format!("circular exponent q = {q} must be > 0"))),
            VelocityField::ConstantShear { s } if s.is_finite() => Ok(()),
            VelocityField::ConstantShear { s } => Err(Error::Config(format!("shear rate {s} must be finite"))),
        }
    }

    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            VelocityField::Zero => "zero",
            VelocityField::PowerShear { .. } => "power_shear",
            VelocityField::HolderShear { .. } => "holder_shear",
            VelocityField::Circular { .. } => "circular",
            VelocityField::ConstantShear { .. } => "constant_shear",
        }
    }

    pub fn is_circular(&self) -> bool {
        matches!(self, VelocityField::Circular { .. })
    }

    /// True for the variants of the form `u = (U(y), 0)`, including `Zero`.
    pub fn is_shear(&self) -> bool {
        !self.is_circular()
    }

    /// Streamwise profile `U(y)` of a shear flow (`None` for circular flows).
    pub fn shear_profile(&self, y: f64) -> Option<f64> {
        match *self {
            VelocityField::Zero => Some(0.0),
            VelocityField::PowerShear { n } => Some(y.powi(n as i32)),
            VelocityField::HolderShear { alpha, c } => Some(c * y.abs().powf(alpha)),
            VelocityField::ConstantShear { s } => Some(s * y),
            VelocityField::Circular { .. } => None,
        }
    }

    /// Angular speed `dθ/dt` at radius `r`; zero for non-circular flows.
    pub fn angular_speed(&self, r: f64) -> f64 {
        match *self {
            VelocityField::Circular { q } => r.powf(q),
            _ => 0.0,
        }
    }

    /// Exact velocity at `p`.
    pub fn velocity(&self, p: Vec2) -> Result<Vec2> {
        match *self {
            VelocityField::Circular { q } => {
                let r = p.norm();
                if r <= 0.0 || !r.is_finite() {
                    return Err(Error::Domain(format!(
                        "circular flow evaluated at r = {r} (needs r > 0)"
                    )));
                }
                // r^q · r e_θ = r^q · (−y, x)
                let w = r.powf(q);
                Ok(Vec2::new(-w * p.y, w * p.x))
            }
            _ => Ok(Vec2::new(self.shear_profile(p.y).unwrap_or(0.0), 0.0)),
        }
    }
}

/// Pointwise velocity evaluation.
pub fn eval_velocity(field: &VelocityField, point: Vec2) -> Result<Vec2> {
    field.velocity(point)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiffusivityModel {
    Isotropic {
        kappa: f64,
    },
    /// Local diffusivity `κ r^γ`; only meaningful on polar domains.
    AnisotropicRadial {
        kappa: f64,
        gamma: f64,
    },
}

impl DiffusivityModel {
    pub fn isotropic(kappa: f64) -> Self {
        DiffusivityModel::Isotropic { kappa }
    }

    pub fn anisotropic(kappa: f64, gamma: f64) -> Self {
        DiffusivityModel::AnisotropicRadial { kappa, gamma }
    }

    pub fn kappa(&self) -> f64 {
        match *self {
            DiffusivityModel::Isotropic { kappa } => kappa,
            DiffusivityModel::AnisotropicRadial { kappa, .. } => kappa,
        }
    }

    pub fn gamma(&self) -> f64 {
        match *self {
            DiffusivityModel::Isotropic { .. } => 0.0,
            DiffusivityModel::AnisotropicRadial { gamma, .. } => gamma,
        }
    }

    pub fn is_isotropic(&self) -> bool {
        matches!(self, DiffusivityModel::Isotropic { .. })
    }

    /// `κ` must lie in `[0, 1)` (zero is the deterministic limit) and `γ` in `[0, 1]`.
    pub fn validate(&self) -> Result<()> {
        let kappa = self.kappa();
        if !(0.0..1.0).contains(&kappa) {
            return Err(Error::Config(format!("diffusivity kappa = {kappa} not in [0, 1)")));
        }
        let gamma = self.gamma();
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::Config(format!("anisotropy gamma = {gamma} not in [0, 1]")));
        }
        Ok(())
    }

    /// Local diffusivity at radius `r`.
    pub fn at_radius(&self, r: f64) -> f64 {
        match *self {
            DiffusivityModel::Isotropic { kappa } => kappa,
            DiffusivityModel::AnisotropicRadial { kappa, gamma } => {
                if gamma == 0.0 {
                    kappa
                } else if r <= 0.0 {
                    0.0
                } else {
                    kappa * r.powf(gamma)
                }
            }
        }
    }
}

/// Local diffusivity at `point`; the anisotropic model uses its distance to the origin.
pub fn eval_diffusivity(model: &DiffusivityModel, point: Vec2) -> f64 {
    model.at_radius(point.norm())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolderCheck {
    pub max_ratio: f64,
    pub holds: bool,
}

/// Samples `samples` random pairs in `interval` and reports the largest
/// Hölder quotient `|u(y) − u(y′)| / |y − y′|^α`.
pub fn verify_holder(field: &VelocityField, interval: (f64, f64), samples: usize, seed: u64) -> Result<HolderCheck> {
    let VelocityField::HolderShear { alpha, c } = *field else {
        return Err(Error::UnsupportedVariant(format!(
            "Hölder check needs a holder_shear field, got {}",
            field.kind()
        )));
    };
    field.validate()?;
    if samples < 2 {
        return Err(Error::Config("Hölder check needs at least 2 samples".into()));
    }
    let (lo, hi) = interval;
    if !(hi > lo) {
        return Err(Error::Config(format!("empty interval [{lo}, {hi}]")));
    }
    let u = |y: f64| c * y.abs().powf(alpha);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_ratio: f64 = 0.0;
    for _ in 0..samples {
        let a = rng.random_range(lo..hi);
        let b = rng.random_range(lo..hi);
        let gap = (a - b).abs();
        if gap == 0.0 {
            continue;
        }
        max_ratio = max_ratio.max((u(a) - u(b)).abs() / gap.powf(alpha));
    }
    Ok(HolderCheck {
        max_ratio,
        holds: max_ratio <= c * (1.0 + 1e-12),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pointwise_examples() {
        let v = eval_velocity(&VelocityField::PowerShear { n: 2 }, Vec2::new(0.0, 0.5)).unwrap();
        assert_eq!(v, Vec2::new(0.25, 0.0));
        let v = eval_velocity(&VelocityField::Zero, Vec2::new(3.0, -7.0)).unwrap();
        assert_eq!(v, Vec2::ZERO);
        let h = VelocityField::HolderShear { alpha: 0.5, c: 1.0 };
        let v = eval_velocity(&h, Vec2::new(1.0, 0.09)).unwrap();
        assert!((v.x - 0.3).abs() < 1e-15 && v.y == 0.0);
    }

    #[test]
    fn circular_rejects_origin() {
        let f = VelocityField::Circular { q: 1.0 };
        assert!(matches!(f.velocity(Vec2::ZERO), Err(Error::Domain(_))));
        // r = 2, q = 1: speed r^q·r = 4 along e_θ
        let v = f.velocity(Vec2::new(2.0, 0.0)).unwrap();
        assert!((v.x).abs() < 1e-15 && (v.y - 4.0).abs() < 1e-15);
    }

    #[test]
    fn diffusivity_examples() {
        let p = Vec2::new(0.3, 0.4);
        assert_eq!(eval_diffusivity(&DiffusivityModel::isotropic(0.01), p), 0.01);
        let a = DiffusivityModel::anisotropic(0.01, 1.0);
        assert!((a.at_radius(2.0) - 0.02).abs() < 1e-16);
        assert_eq!(DiffusivityModel::anisotropic(0.1, 0.0).at_radius(7.0), 0.1);
        assert_eq!(a.at_radius(0.0), 0.0);
    }

    #[test]
    fn holder_lipschitz_case() {
        let f = VelocityField::HolderShear { alpha: 1.0, c: 1.0 };
        let chk = verify_holder(&f, (-1.0, 1.0), 10_000, 3).unwrap();
        assert!(chk.max_ratio <= 1.0 + 1e-12);
        assert!(chk.holds);
    }

    #[test]
    fn holder_square_root_case() {
        let f = VelocityField::HolderShear { alpha: 0.5, c: 1.0 };
        let chk = verify_holder(&f, (-1.0, 1.0), 10_000, 11).unwrap();
        assert!(chk.holds, "max ratio {}", chk.max_ratio);
        // brute force over a dense deterministic lattice of pairs
        let n = 400;
        let ys: Vec<f64> = (0..=n).map(|i| -1.0 + 2.0 * i as f64 / n as f64).collect();
        let mut worst: f64 = 0.0;
        for &a in &ys {
            for &b in &ys {
                if a != b {
                    let r = (a.abs().sqrt() - b.abs().sqrt()).abs() / (a - b).abs().sqrt();
                    worst = worst.max(r);
                }
            }
        }
        assert!(worst <= 1.0 + 1e-12);
        assert!(chk.max_ratio <= worst + 1e-9 || chk.max_ratio <= 1.0);
    }

    #[test]
    fn holder_rejects_other_variants() {
        let r = verify_holder(&VelocityField::PowerShear { n: 2 }, (-1.0, 1.0), 10, 0);
        assert!(matches!(r, Err(Error::UnsupportedVariant(_))));
    }

    /// Richardson-extrapolated central differences of yⁿ at 0.
    fn derivative_at_zero(n: u32, order: u32, h: f64) -> f64 {
        let f = |y: f64| VelocityField::PowerShear { n }.shear_profile(y).unwrap();
        let d = |h: f64| -> f64 {
            // order-th central difference: Σ (−1)^k C(order,k) f((order/2 − k) h) / h^order
            let mut acc = 0.0;
            let mut binom = 1.0;
            for k in 0..=order {
                let s = if k % 2 == 0 { 1.0 } else { -1.0 };
                acc += s * binom * f((order as f64 / 2.0 - k as f64) * h);
                binom = binom * (order - k) as f64 / (k + 1) as f64;
            }
            acc / h.powi(order as i32)
        };
        (4.0 * d(h / 2.0) - d(h)) / 3.0
    }

    #[test]
    fn power_shear_critical_point_order() {
        for n in 1..=4u32 {
            for j in 1..n {
                assert!(derivative_at_zero(n, j, 1e-2).abs() < 1e-2, "n={n} j={j}");
            }
            let fact: f64 = (1..=n).map(|k| k as f64).product();
            let dn = derivative_at_zero(n, n, 1e-2);
            assert!((dn - fact).abs() <= 0.01 * fact, "n={n}: {dn} vs {fact}");
        }
    }

    proptest! {
        #[test]
        fn velocity_is_pure(x in -10.0f64..10.0, y in -10.0f64..10.0, n in 1u32..5) {
            let f = VelocityField::PowerShear { n };
            let a = f.velocity(Vec2::new(x, y)).unwrap();
            let b = f.velocity(Vec2::new(x, y)).unwrap();
            prop_assert_eq!(a.x.to_bits(), b.x.to_bits());
            prop_assert_eq!(a.y.to_bits(), b.y.to_bits());
        }

        #[test]
        fn anisotropic_diffusivity_monotone(r1 in 0.0f64..10.0, dr in 0.0f64..10.0, g in 0.0f64..=1.0) {
            let m = DiffusivityModel::anisotropic(0.05, g);
            prop_assert!(m.at_radius(r1 + dr) >= m.at_radius(r1));
        }

        #[test]
        fn circular_is_tangential(x in -5.0f64..5.0, y in -5.0f64..5.0, q in 0.1f64..3.0) {
            prop_assume!(x.hypot(y) > 1e-6);
            let p = Vec2::new(x, y);
            let v = VelocityField::Circular { q }.velocity(p).unwrap();
            prop_assert!((v.x * p.x + v.y * p.y).abs() <= 1e-9 * v.norm().max(1.0) * p.norm());
        }
    }
}
