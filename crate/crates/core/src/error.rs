use thiserror::Error;

/// Errors raised by the geometry, gas, flow and analysis routines.
///
/// Numeric payloads are stored as `f64` regardless of the scalar type the
/// computation ran in, so that errors can cross crate boundaries and be
/// serialized without carrying a type parameter.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("probe radius {radius} leaves the local fluid wedge (admissible reach {reach})")]
    GeometryClip { radius: f64, reach: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("speed {speed} reaches the limit speed {limit}")]
    LimitSpeedExceeded { speed: f64, limit: f64 },

    #[error("flux {flux} reaches the sonic maximum {flux_max}")]
    SonicFluxExceeded { flux: f64, flux_max: f64 },

    #[error("singular linear system (condition estimate {condition:e})")]
    SingularSystem { condition: f64 },

    #[error("ill-conditioned corner fit (condition number {condition:e})")]
    FitQuality { condition: f64 },

    #[error("singular coefficient at corner {corner} is insensitive to circulation (slope {slope:e})")]
    DegenerateKutta { corner: usize, slope: f64 },

    #[error("far-field fit residual {residual:e} exceeds {tolerance:e}; sample radii too small")]
    FarFieldContamination { residual: f64, tolerance: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("sonic excursion at ({x}, {y}): flux ratio m/m_max = {flux_ratio} (Picard step {iteration})")]
    SonicExcursion {
        x: f64,
        y: f64,
        flux_ratio: f64,
        iteration: usize,
    },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    IterationLimit {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },
}

impl Error {
    /// Short machine-readable tag for summaries.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGeometry(_) => "invalid_geometry",
            Error::GeometryClip { .. } => "geometry_clip",
            Error::Domain(_) => "domain",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::LimitSpeedExceeded { .. } => "limit_speed_exceeded",
            Error::SonicFluxExceeded { .. } => "sonic_flux_exceeded",
            Error::SingularSystem { .. } => "singular_system",
            Error::FitQuality { .. } => "fit_quality",
            Error::DegenerateKutta { .. } => "degenerate_kutta",
            Error::FarFieldContamination { .. } => "far_field_contamination",
            Error::Unsupported(_) => "unsupported",
            Error::SonicExcursion { .. } => "sonic_excursion",
            Error::IterationLimit { .. } => "iteration_limit",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
