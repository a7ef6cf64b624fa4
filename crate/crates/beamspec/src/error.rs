//! Error type shared by all library modules.
//!
//! Every fallible operation returns [`BeamError`]. The variant name is part of
//! the public contract: the CLI surfaces it verbatim in diagnostics, so each
//! `Display` string starts with the variant's own name.

use thiserror::Error;

/// Unified error type for the beam-spectral library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BeamError {
    /// An input value was NaN or infinite.
    #[error("NonFiniteInput: argument is not a finite number")]
    NonFiniteInput,

    /// The scaled characteristic function was requested at a pole
    /// (cosh tau = 0, i.e. tau on the imaginary axis at odd multiples of i*pi/2).
    #[error("CoshPole: cosh(tau) vanishes at tau = ({re}, {im})")]
    CoshPole { re: f64, im: f64 },

    /// A gain value outside `k >= 0` was supplied.
    #[error("InvalidGain: feedback gain must be nonnegative, got {0}")]
    InvalidGain(f64),

    /// An iteration failed to reach its tolerance within the iteration cap.
    #[error("NoConvergence: {context} did not converge within {iterations} iterations")]
    NoConvergence { context: String, iterations: usize },

    /// A Newton iterate converged, but outside the seed cell it started from —
    /// the computed root belongs to a different mode index.
    #[error("BasinEscape: root for index {n} left its seed cell (|tau - seed| = {distance:.3e})")]
    BasinEscape { n: usize, distance: f64 },

    /// The shifted linear system was numerically singular.
    #[error("SingularShift: factorization of (A - shift I) failed")]
    SingularShift,

    /// A spectrum report with no points was supplied where one is required.
    #[error("EmptyReport: the spectrum report contains no points")]
    EmptyReport,

    /// A configuration precondition was violated.
    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),

    /// Factorization of the time-stepping matrix failed.
    #[error("LinearSolveFailure: factorization of the stepping matrix failed")]
    LinearSolveFailure,

    /// A decay fit was requested over a window containing nonpositive energy.
    #[error("NonpositiveEnergy: energy is not strictly positive inside the fit window")]
    NonpositiveEnergy,

    /// A constructed eigenmode vanished identically after scaling, which marks
    /// the originating root as spurious.
    #[error("DegenerateMode: eigenfunction is identically zero after scaling (spurious root)")]
    DegenerateMode,

    /// Two sampled functions that must share a grid had different lengths.
    #[error("ShapeMismatch: expected {expected} samples, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
}

impl BeamError {
    /// The bare variant name, used by the CLI to surface errors verbatim.
    pub fn name(&self) -> &'static str {
        match self {
            BeamError::NonFiniteInput => "NonFiniteInput",
            BeamError::CoshPole { .. } => "CoshPole",
            BeamError::InvalidGain(_) => "InvalidGain",
            BeamError::NoConvergence { .. } => "NoConvergence",
            BeamError::BasinEscape { .. } => "BasinEscape",
            BeamError::SingularShift => "SingularShift",
            BeamError::EmptyReport => "EmptyReport",
            BeamError::InvalidConfig(_) => "InvalidConfig",
            BeamError::LinearSolveFailure => "LinearSolveFailure",
            BeamError::NonpositiveEnergy => "NonpositiveEnergy",
            BeamError::DegenerateMode => "DegenerateMode",
            BeamError::ShapeMismatch { .. } => "ShapeMismatch",
        }
    }
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, BeamError>;
