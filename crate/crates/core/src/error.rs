//! Error type shared by every module.

use alloc::boxed::Box;
use alloc::string::String;

use crate::trajectory::Trajectory;

pub type Result<T> = core::result::Result<T, GssError>;

/// Coarse class used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Malformed or inconsistent input.
    Config,
    /// A numerical procedure failed or an assumption did not hold.
    Numerical,
    /// A forcing frequency sits on a system eigenvalue.
    Resonance,
}

#[derive(Debug, thiserror::Error)]
pub enum GssError {
    #[error("{which} matrix is not symmetric (relative asymmetry {asymmetry:.3e})")]
    NotSymmetric { which: &'static str, asymmetry: f64 },
    #[error("{which} matrix is not positive definite")]
    NotPositiveDefinite { which: &'static str },
    #[error("damping matrix is indefinite (smallest eigenvalue {min_eigenvalue:.3e})")]
    DampingIndefinite { min_eigenvalue: f64 },
    #[error("nonlinear term {term} has degree {degree}; nonlinear terms need degree >= 2")]
    NonlinearTermDegreeTooLow { term: String, degree: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("time column is not uniformly spaced (row {row}: step {step:.6e}, expected {expected:.6e})")]
    NonuniformInput { row: usize, step: f64, expected: f64 },
    #[error("forcing signal needs at least two samples")]
    EmptySignal,
    #[error("linear part is not asymptotically stable (eigenvalue real part {real_part:.3e})")]
    UnstableLinearPart { real_part: f64 },
    #[error("eigenvector matrix is numerically singular (condition number {condition:.3e})")]
    DefectiveSpectrum { condition: f64 },
    #[error("damping is not proportional to mass and stiffness")]
    NotStructural,
    #[error("zero eigenvalue (mode {mode})")]
    ZeroEigenvalue { mode: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("effective Newmark stiffness is singular")]
    SingularEffectiveStiffness,
    #[error("near resonance: mode {mode}, harmonic {harmonic:?}, |i<k,Omega> - lambda| = {distance:.3e}")]
    NearResonance { mode: usize, harmonic: alloc::vec::Vec<i32>, distance: f64 },
    #[error("order {requested} unavailable (computed through {available})")]
    OrderUnavailable { requested: usize, available: usize },
    #[error("Pade denominator nearly vanishes (|q| = {value:.3e} at coordinate {coordinate}, delta = {delta})")]
    DenominatorNearZero { value: f64, coordinate: usize, delta: f64 },
    #[error("Newton iteration diverged at step {step} (residual {residual:.3e})")]
    NewtonDivergence { step: usize, residual: f64 },
    #[error("Picard iteration did not converge in {iterations} iterations (last difference {last_difference:.3e})")]
    NoConvergence { iterations: usize, last_difference: f64, last_iterate: Box<Trajectory> },
    #[error("adaptive quadrature did not reach tolerance (estimate {error_estimate:.3e})")]
    QuadratureFailure { error_estimate: f64 },
    #[error("modal reconstruction left an imaginary residue {residue:.3e} (scale {scale:.3e})")]
    ComplexResidue { residue: f64, scale: f64 },
    #[error("instance too large: {0}")]
    InstanceTooLarge(String),
    #[error("linear algebra failure: {0}")]
    LinearAlgebra(&'static str),
}

impl GssError {
    pub fn category(&self) -> ErrorCategory {
        use GssError::*;
        match self {
            NearResonance { .. } => ErrorCategory::Resonance,
            NotSymmetric { .. }
            | NotPositiveDefinite { .. }
            | DampingIndefinite { .. }
            | NonlinearTermDegreeTooLow { .. }
            | DimensionMismatch(_)
            | NonFinite(_)
            | NonuniformInput { .. }
            | EmptySignal
            | NotStructural
            | InvalidParameter(_)
            | GridMismatch(_)
            | OrderUnavailable { .. }
            | InstanceTooLarge(_) => ErrorCategory::Config,
            _ => ErrorCategory::Numerical,
        }
    }

    /// Short stable name of the variant, for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        use GssError::*;
        match self {
            NotSymmetric { .. } => "NotSymmetric",
            NotPositiveDefinite { .. } => "NotPositiveDefinite",
            DampingIndefinite { .. } => "DampingIndefinite",
            NonlinearTermDegreeTooLow { .. } => "NonlinearTermDegreeTooLow",
            DimensionMismatch(_) => "DimensionMismatch",
            NonFinite(_) => "NonFinite",
            NonuniformInput { .. } => "NonuniformInput",
            EmptySignal => "EmptySignal",
            UnstableLinearPart { .. } => "UnstableLinearPart",
            DefectiveSpectrum { .. } => "DefectiveSpectrum",
            NotStructural => "NotStructural",
            ZeroEigenvalue { .. } => "ZeroEigenvalue",
            InvalidParameter(_) => "InvalidParameter",
            GridMismatch(_) => "GridMismatch",
            SingularEffectiveStiffness => "SingularEffectiveStiffness",
            NearResonance { .. } => "NearResonance",
            OrderUnavailable { .. } => "OrderUnavailable",
            DenominatorNearZero { .. } => "DenominatorNearZero",
            NewtonDivergence { .. } => "NewtonDivergence",
            NoConvergence { .. } => "NoConvergence",
            QuadratureFailure { .. } => "QuadratureFailure",
            ComplexResidue { .. } => "ComplexResidue",
            InstanceTooLarge(_) => "InstanceTooLarge",
            LinearAlgebra(_) => "LinearAlgebra",
        }
    }
}
