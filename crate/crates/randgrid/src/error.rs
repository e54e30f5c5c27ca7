//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration (bad mesh, bad preset, unwritable output, ...).
    /// Maps to process exit code 2.
    #[error("configuration error: {0}")]
    Config(String),

    /// A coefficient or integrand evaluated to a non-finite value.
    #[error("non-finite value in {what} at mesh index {index}")]
    NonFinite { what: &'static str, index: usize },

    /// Two path-valued objects do not share the same mesh.
    #[error("mesh mismatch: {0}")]
    MeshMismatch(String),

    /// A time argument fell outside the valid interval.
    #[error("domain error: {0}")]
    Domain(String),

    /// The intensity evaluator violated positivity even after clamping.
    #[error("intensity must be positive and finite, got {value} at t = {t}")]
    IntensityViolation { value: f64, t: f64 },

    /// Operation only defined for a specific dimension.
    #[error("unsupported dimension {got}, expected {expected}")]
    UnsupportedDimension { got: usize, expected: usize },

    /// Statistical routine got fewer samples than it needs.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A design normalizer came out non-positive.
    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    /// Candidate normalization in the optimality audit failed.
    #[error("audit configuration error: {0}")]
    AuditConfig(String),

    /// Sweep configs differ outside the declared axis.
    #[error("sweep axis violation: {0}")]
    AxisViolation(String),

    /// Two sampler substreams collided.
    #[error("seed stream collision: {0}")]
    StreamCollision(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: configuration-class errors exit 2,
    /// everything else (runtime/test failures) exits 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::MeshMismatch(_)
            | Error::Domain(_)
            | Error::UnsupportedDimension { .. }
            | Error::AxisViolation(_)
            | Error::StreamCollision(_)
            | Error::Io(_) => 2,
            _ => 1,
        }
    }
}
