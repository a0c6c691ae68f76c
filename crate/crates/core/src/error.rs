use thiserror::Error;

/// Errors from the counting primitives.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CombinatoricsError {
    #[error("binomial coefficient C({n}, {k}) requires k <= n")]
    KOutOfRange { n: usize, k: usize },
    #[error("poisson mean must be finite and non-negative, got {0}")]
    InvalidMean(f64),
    #[error("truncation epsilon must lie in (0, 1), got {0}")]
    InvalidEpsilon(f64),
}

/// Errors from the analytic activation model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid model parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
    #[error("{ues} UEs placed on zero unactivated beams")]
    NoBeams { ues: usize },
    #[error("truncation dropped {lost_mass:e} of probability mass (limit {limit:e}); lower epsilon")]
    TruncationDominated { lost_mass: f64, limit: f64 },
    #[error(transparent)]
    Combinatorics(#[from] CombinatoricsError),
}

/// Errors from tracking-area geometry.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("position ({x}, {y}) lies outside the tracking area")]
    OutOfBounds { x: f64, y: f64 },
    #[error("invalid geometry parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
}

/// A configuration value that failed validation. `field` names the offending key.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid configuration `{field}`: {reason}")]
pub struct ConfigError {
    pub field: String,
    pub reason: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl From<GeometryError> for ConfigError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::InvalidParameter { field, reason } => ConfigError::new(field, reason),
            other => ConfigError::new("geometry", other.to_string()),
        }
    }
}

/// Errors surfaced by experiment runs.
#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error on {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("{0}")]
    Compare(String),
}

impl ExperimentError {
    /// True when the failure stems from user-supplied configuration.
    pub fn is_config(&self) -> bool {
        matches!(self, ExperimentError::Config(_) | ExperimentError::Model(ModelError::InvalidParameter { .. }))
    }
}
