//! TOML run configuration.
//!
//! Unknown keys are rejected by the parser; semantic errors are reported
//! with the line of the offending key when it can be found.

use std::fmt;
use std::path::{Path, PathBuf};

use enhdiff::experiments::{log_spaced_kappas, Backend, ExperimentSpec, InitialDataKind, LyRule, Resolution, TimeRule};
use enhdiff::ibm::KernelShape;
use enhdiff::VelocityField;
use serde::Deserialize;

#[derive(Debug)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSection {
    pub kind: String,
    pub n: Option<u32>,
    pub alpha: Option<f64>,
    pub c: Option<f64>,
    pub q: Option<f64>,
    pub s: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffusivitySection {
    pub kappa: Option<f64>,
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialDataSection {
    pub kind: InitialDataKind,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub backend: Backend,
    pub nx: usize,
    pub ny: usize,
    pub ly: Option<f64>,
    pub nr: usize,
    pub ntheta: usize,
    pub dt: f64,
    pub horizon: Option<f64>,
    pub time_rule: TimeRule,
    pub mc_samples: usize,
    pub mc_nodes_a: usize,
    pub mc_nodes_b: usize,
    pub mc_ladder: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        let r = Resolution::default();
        Self {
            backend: Backend::Grid,
            nx: r.nx,
            ny: r.ny,
            ly: None,
            nr: r.nr,
            ntheta: r.ntheta,
            dt: 0.01,
            horizon: None,
            time_rule: TimeRule::Absolute,
            mc_samples: r.mc_samples,
            mc_nodes_a: r.mc_nodes_a,
            mc_nodes_b: r.mc_nodes_b,
            mc_ladder: r.mc_ladder,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSection {
    pub slope: f64,
    #[serde(default = "one")]
    pub prefactor: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub kappas: Option<Vec<f64>>,
    pub kappa_max: Option<f64>,
    pub kappa_min: Option<f64>,
    pub count: Option<usize>,
    pub theta_mix: Option<f64>,
    pub log_correction: Option<bool>,
    pub threshold_sensitivity: bool,
    pub synthetic: Option<SyntheticSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Binary,
    Svg,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: Option<PathBuf>,
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: None,
            formats: vec![Format::Csv, Format::Svg],
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfaceSection {
    /// CSV with header `x,y,dS`, relative to the config file.
    pub path: PathBuf,
    #[serde(default)]
    pub kernel: KernelShape,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub flow: FlowSection,
    #[serde(default)]
    pub diffusivity: DiffusivitySection,
    pub initial_data: InitialDataSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub output: OutputSection,
    pub interface: Option<InterfaceSection>,
}

/// A parsed config together with its source text, for error locations.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub source: String,
    pub base_dir: PathBuf,
}

/// Line (1-based) of `key` inside `[section]`, or of the section header
/// when the key is absent.
pub fn key_line(source: &str, section: Option<&str>, key: &str) -> Option<usize> {
    let mut current: Option<String> = None;
    let mut header = None;
    for (i, raw) in source.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = Some(name.trim().to_string());
            if section == Some(name.trim()) {
                header = Some(i + 1);
            }
            continue;
        }
        if current.as_deref() != section {
            continue;
        }
        if let Some(rest) = line.strip_prefix(key) {
            if rest.trim_start().starts_with('=') {
                return Some(i + 1);
            }
        }
    }
    header
}

fn line_of(source: &str, offset: usize) -> usize {
    source[..offset].matches('\n').count() + 1
}

/// Line of a parse error. Unknown-key errors span the whole table, so the
/// key itself is looked up inside the span.
fn error_line(source: &str, span: std::ops::Range<usize>, message: &str) -> usize {
    let unknown = message
        .strip_prefix("unknown field `")
        .and_then(|rest| rest.split('`').next());
    if let Some(key) = unknown {
        let mut offset = span.start;
        for line in source[span.clone()].split_inclusive('\n') {
            let t = line.trim_start();
            if let Some(rest) = t.strip_prefix(key) {
                if rest.trim_start().starts_with('=') {
                    return line_of(source, offset);
                }
            }
            offset += line.len();
        }
    }
    line_of(source, span.start)
}

impl LoadedConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let source = std::fs::read_to_string(path).map_err(|e| ConfigError {
            line: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse(&source, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn parse(source: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let config: RunConfig = toml::from_str(source).map_err(|e| ConfigError {
            line: e.span().map(|s| error_line(source, s, e.message())),
            message: e.message().trim().to_string(),
        })?;
        Ok(Self {
            config,
            source: source.to_string(),
            base_dir: base_dir.to_path_buf(),
        })
    }

    pub fn error(&self, section: Option<&str>, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            line: key_line(&self.source, section, key),
            message: message.into(),
        }
    }

    pub fn flow(&self) -> Result<VelocityField, ConfigError> {
        let f = &self.config.flow;
        let need = |v: Option<f64>, key: &str| {
            v.ok_or_else(|| {
                self.error(
                    Some("flow"),
                    "kind",
                    format!("missing required key `flow.{key}` for kind = {}", f.kind),
                )
            })
        };
        let allowed: &[&str] = match f.kind.as_str() {
            "zero" => &[],
            "constant_shear" => &["s"],
            "power_shear" => &["n"],
            "holder_shear" => &["alpha", "c"],
            "circular" => &["q"],
            other => {
                return Err(self.error(
                    Some("flow"),
                    "kind",
                    format!(
                        "unknown flow.kind `{other}` (expected zero, constant_shear, power_shear, holder_shear or circular)"
                    ),
                ))
            }
        };
        let present = [
            ("n", f.n.is_some()),
            ("alpha", f.alpha.is_some()),
            ("c", f.c.is_some()),
            ("q", f.q.is_some()),
            ("s", f.s.is_some()),
        ];
        for (key, set) in present {
            if set && !allowed.contains(&key) {
                return Err(self.error(
                    Some("flow"),
                    key,
                    format!("`flow.{key}` is not a parameter of {}", f.kind),
                ));
            }
        }
        let field = match f.kind.as_str() {
            "zero" => VelocityField::Zero,
            "constant_shear" => VelocityField::ConstantShear { s: f.s.unwrap_or(1.0) },
            "power_shear" => VelocityField::PowerShear {
                n: f.n.ok_or_else(|| {
                    self.error(
                        Some("flow"),
                        "kind",
                        "missing required key `flow.n` for kind = power_shear",
                    )
                })?,
            },
            "holder_shear" => VelocityField::HolderShear {
                alpha: need(f.alpha, "alpha")?,
                c: f.c.unwrap_or(1.0),
            },
            _ => VelocityField::Circular { q: need(f.q, "q")? },
        };
        field
            .validate()
            .map_err(|e| self.error(Some("flow"), allowed.first().unwrap_or(&"kind"), e.to_string()))?;
        Ok(field)
    }

    pub fn kappa(&self) -> Result<f64, ConfigError> {
        let k = self
            .config
            .diffusivity
            .kappa
            .ok_or_else(|| self.error(Some("diffusivity"), "kappa", "missing required key `diffusivity.kappa`"))?;
        if !(k > 0.0 && k < 1.0) {
            return Err(self.error(
                Some("diffusivity"),
                "kappa",
                format!("`diffusivity.kappa` = {k} must lie in (0, 1)"),
            ));
        }
        Ok(k)
    }

    pub fn gamma(&self) -> Result<f64, ConfigError> {
        let g = self.config.diffusivity.gamma.unwrap_or(0.0);
        if !(0.0..=1.0).contains(&g) {
            return Err(self.error(
                Some("diffusivity"),
                "gamma",
                format!("`diffusivity.gamma` = {g} must lie in [0, 1]"),
            ));
        }
        Ok(g)
    }

    pub fn theta_mix(&self) -> Result<f64, ConfigError> {
        let t = self.config.experiment.theta_mix.unwrap_or((-1.0f64).exp());
        if !(t > 0.0 && t < 1.0) {
            return Err(self.error(
                Some("experiment"),
                "theta_mix",
                format!("`experiment.theta_mix` = {t} must lie in (0, 1)"),
            ));
        }
        Ok(t)
    }

    /// `(dt, horizon)` with the given default horizon.
    pub fn times(&self, default_horizon: f64) -> Result<(f64, f64), ConfigError> {
        let s = &self.config.solver;
        if !(s.dt > 0.0 && s.dt.is_finite()) {
            return Err(self.error(Some("solver"), "dt", format!("`solver.dt` = {} must be > 0", s.dt)));
        }
        let h = s.horizon.unwrap_or(default_horizon);
        if !(h >= s.dt && h.is_finite()) {
            return Err(self.error(
                Some("solver"),
                "horizon",
                format!(
                    "`solver.horizon` = {h} must be finite and at least solver.dt = {}",
                    s.dt
                ),
            ));
        }
        Ok((s.dt, h))
    }

    pub fn resolution(&self) -> Result<Resolution, ConfigError> {
        let s = &self.config.solver;
        let check = |v: usize, key: &str, min: usize| {
            if v < min {
                Err(self.error(
                    Some("solver"),
                    key,
                    format!("`solver.{key}` = {v} must be at least {min}"),
                ))
            } else {
                Ok(())
            }
        };
        check(s.nx, "nx", 4)?;
        check(s.ny, "ny", 4)?;
        check(s.nr, "nr", 3)?;
        check(s.ntheta, "ntheta", 4)?;
        check(s.mc_samples, "mc_samples", 2)?;
        check(s.mc_nodes_a, "mc_nodes_a", 1)?;
        check(s.mc_nodes_b, "mc_nodes_b", 1)?;
        check(s.mc_ladder, "mc_ladder", 1)?;
        let ly = match s.ly {
            Some(l) if l > 0.0 && l.is_finite() => LyRule::Fixed { ly: l },
            Some(l) => return Err(self.error(Some("solver"), "ly", format!("`solver.ly` = {l} must be > 0"))),
            None if self.config.initial_data.kind == InitialDataKind::SineX => LyRule::Fixed {
                ly: std::f64::consts::PI,
            },
            None => LyRule::default(),
        };
        Ok(Resolution {
            nx: s.nx,
            ny: s.ny,
            ly,
            nr: s.nr,
            ntheta: s.ntheta,
            mc_samples: s.mc_samples,
            mc_nodes_a: s.mc_nodes_a,
            mc_nodes_b: s.mc_nodes_b,
            mc_ladder: s.mc_ladder,
        })
    }

    /// Diffusivities of a sweep, strictly decreasing.
    pub fn kappas(&self) -> Result<Vec<f64>, ConfigError> {
        let e = &self.config.experiment;
        let ks = match (&e.kappas, e.kappa_max, e.kappa_min) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                return Err(self.error(
                    Some("experiment"),
                    "kappas",
                    "give either `experiment.kappas` or `experiment.kappa_max`/`kappa_min`, not both",
                ))
            }
            (Some(list), None, None) => list.clone(),
            (None, hi, lo) => {
                log_spaced_kappas(hi.unwrap_or(10f64.powf(-2.5)), lo.unwrap_or(1e-5), e.count.unwrap_or(6))
            }
        };
        if ks.len() < 5 {
            return Err(self.error(
                Some("experiment"),
                "kappas",
                format!("a sweep needs at least 5 diffusivities, got {}", ks.len()),
            ));
        }
        if ks.iter().any(|k| !(*k > 0.0 && *k < 1.0)) || ks.windows(2).any(|w| w[1] >= w[0]) {
            return Err(self.error(
                Some("experiment"),
                "kappas",
                "sweep diffusivities must lie in (0, 1) and be strictly decreasing",
            ));
        }
        Ok(ks)
    }

    /// Experiment spec for a sweep, or for a single run when `kappas` is empty.
    pub fn spec(&self, kappas: Vec<f64>, default_horizon: f64) -> Result<ExperimentSpec, ConfigError> {
        let flow = self.flow()?;
        let (dt, horizon) = self.times(default_horizon)?;
        let mut spec = ExperimentSpec::new(flow, self.config.initial_data.kind);
        spec.gamma = self.gamma()?;
        spec.kappas = kappas;
        spec.backend = self.config.solver.backend;
        spec.theta_mix = self.theta_mix()?;
        spec.dt = dt;
        spec.horizon = horizon;
        spec.time_rule = self.config.solver.time_rule;
        spec.resolution = self.resolution()?;
        spec.log_correction = self.config.experiment.log_correction;
        spec.seed = self.config.seed;
        Ok(spec)
    }

    pub fn output_dir(&self) -> PathBuf {
        match &self.config.output.directory {
            Some(d) if d.is_relative() => self.base_dir.join(d),
            Some(d) => d.clone(),
            None => PathBuf::from("enhdiff-out"),
        }
    }

    pub fn wants(&self, f: Format) -> bool {
        self.config.output.formats.contains(&f)
    }
}
