use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("inner series has a nonzero constant term")]
    ConstantTerm,

    #[error("series is not tangent to the identity")]
    NotTangentToIdentity,

    #[error("resonance at component {component}, multi-index {alpha:?}")]
    Resonant { alpha: Vec<u32>, component: usize },

    #[error("divisor {modulus:e} below the precision floor; needs about {required_bits} bits")]
    PrecisionFloor { modulus: f64, required_bits: u32 },

    #[error("continued fraction too shallow: need index {needed}, have depth {depth}")]
    InsufficientDepth { needed: usize, depth: usize },

    #[error("requested depth {requested} exceeds the representable range (max {representable})")]
    DepthOverflow { requested: usize, representable: usize },

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("missing input: {0}")]
    Missing(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    /// Stable machine-readable identifier used by the CLI and the C ABI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::ConstantTerm => "constant_term",
            Error::NotTangentToIdentity => "not_tangent_to_identity",
            Error::Resonant { .. } => "resonant",
            Error::PrecisionFloor { .. } => "precision_floor",
            Error::InsufficientDepth { .. } => "insufficient_depth",
            Error::DepthOverflow { .. } => "depth_overflow",
            Error::Domain(_) => "domain",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Missing(_) => "missing_input",
            Error::DegenerateFit(_) => "degenerate_fit",
            Error::Parse(_) => "parse",
            Error::Numeric(_) => "numeric",
        }
    }

    /// True for failures caused by bad input rather than by the mathematics.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::InvalidArgument(_) | Error::Parse(_) | Error::Missing(_) | Error::Domain(_))
    }
}
