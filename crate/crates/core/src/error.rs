use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("at least 2 channels are required, got {0}")]
    TooFewChannels(usize),

    #[error("column is not normalized: squared norm {norm_sq}")]
    NotNormalized { norm_sq: f64 },

    #[error("detector index {index} out of range for {dim} channels")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("expected {expected} phases, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("alternating profile requires an even channel count, got {0}")]
    OddChannelCount(usize),

    #[error("splitter columns do not have uniform modulus 1/sqrt(n)")]
    NonUniformModulus,

    #[error("cross-phase factor requires distinct detectors, got ({0}, {0})")]
    SameDetector(usize),

    #[error("unknown beam-splitter convention `{0}` (expected `real` or `symmetric`)")]
    UnknownConvention(String),

    #[error("unknown extended-HOM topology `{0}` (expected `eq6`, `fig5` or `fig6`)")]
    UnknownTopology(String),

    #[error("invalid network: {0}")]
    InvalidTopology(String),

    #[error("columns overlap |<a|b>| = {overlap:.3e}; splitter is not unitary-embeddable")]
    NonPhysical { overlap: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "grid under-resolved: step {step:.3e} exceeds fringe width {fringe:.3e} / {min_per_fringe}"
    )]
    UnderResolvedGrid {
        step: f64,
        fringe: f64,
        min_per_fringe: usize,
    },

    #[error("grid [{min:.4e}, {max:.4e}] does not cover the envelope: need [{need_min:.4e}, {need_max:.4e}]")]
    InsufficientCoverage {
        min: f64,
        max: f64,
        need_min: f64,
        need_max: f64,
    },

    #[error("pattern must be a 1-D slice")]
    NotASlice,

    #[error("found {0} dark fringes, need at least 2")]
    TooFewMinima(usize),

    /// An internal consistency check failed; this is a bug, not bad input.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Invariant(_))
    }
}
