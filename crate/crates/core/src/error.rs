use thiserror::Error;

/// Errors raised by the library.
///
/// Variants split into two groups: validation errors (bad input, physically
/// inadmissible parameters) and numerical failures (integration or
/// eigensolver breakdown). The CLI maps them to different exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("polar singularity: zero radius")]
    PolarSingularity,

    #[error("no relative motion: relative momentum vanishes")]
    NoRelativeMotion,

    #[error("not in CM frame: component sum {0:e}")]
    NotCmFrame(f64),

    #[error("singular configuration: denominator {0:e} at a potential wall")]
    SingularConfiguration(f64),

    #[error("angle {phi} lies on a sector boundary")]
    OnBoundary { phi: f64 },

    #[error("angle {phi} is outside the sector ({lo}, {hi})")]
    OutsideSector { phi: f64, lo: f64, hi: f64 },

    #[error("state off the orbit manifold: |cos 3(phi+delta)| = {cos} exceeds k = {k}")]
    OffOrbit { cos: f64, k: f64 },

    #[error("no exact prediction available: {0}")]
    NoPrediction(String),

    #[error("integration failure: {0}")]
    IntegrationFailure(String),

    #[error("did not reach asymptotic regime by t = {0}")]
    NotAsymptotic(f64),

    #[error("insufficient asymptotic samples: {0}")]
    InsufficientSamples(String),

    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    #[error("box extent too small: edge mass {mass:e} for level {level}")]
    ExtentTooSmall { level: usize, mass: f64 },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of a numerical method rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::IntegrationFailure(_)
                | Error::NotAsymptotic(_)
                | Error::InsufficientSamples(_)
                | Error::Eigensolver(_)
                | Error::ExtentTooSmall { .. }
                | Error::OffOrbit { .. }
        )
    }
}

impl Error {
    /// Short snake_case tag, used as a status column.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::PolarSingularity => "polar_singularity",
            Error::NoRelativeMotion => "no_relative_motion",
            Error::NotCmFrame(_) => "not_cm_frame",
            Error::SingularConfiguration(_) => "singular_configuration",
            Error::OnBoundary { .. } => "on_boundary",
            Error::OutsideSector { .. } => "outside_sector",
            Error::OffOrbit { .. } => "off_orbit",
            Error::NoPrediction(_) => "no_prediction",
            Error::IntegrationFailure(_) => "integration_failure",
            Error::NotAsymptotic(_) => "not_asymptotic",
            Error::InsufficientSamples(_) => "insufficient_samples",
            Error::Eigensolver(_) => "eigensolver",
            Error::ExtentTooSmall { .. } => "extent_too_small",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
