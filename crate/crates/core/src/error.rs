use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A point outside the domain of a velocity field or grid.
    #[error("domain error: {0}")]
    Domain(String),

    /// An operation that only makes sense for some flow or kernel variants.
    #[error("unsupported variant: {0}")]
    UnsupportedVariant(String),

    /// Invalid numeric parameters (time steps, sizes, diffusivities, ...).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A time step rejected by a solver; `suggested` is a step that would be accepted.
    #[error("time step {dt} rejected: {reason} (try dt <= {suggested})")]
    TimeStep { dt: f64, suggested: f64, reason: String },

    /// Statistical estimator preconditions (sample counts, empty grids).
    #[error("estimator error: {0}")]
    Estimator(String),

    /// Mismatched experiment ingredients (initial data vs flow family, etc.).
    #[error("experiment specification error: {0}")]
    Spec(String),

    /// Interface markers too close to a non-periodic edge.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// Too few usable points for a scaling fit; lists the censored diffusivities.
    #[error("insufficient data for fit: {usable} uncensored points (need {needed}); censored kappa = {censored:?}")]
    InsufficientData {
        usable: usize,
        needed: usize,
        censored: Vec<f64>,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
