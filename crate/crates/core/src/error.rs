//! Crate error type.
//!
//! Diagnostics carry `f64` snapshots of the offending quantities regardless of
//! the scalar type in use; the loss of precision in an error message is
//! irrelevant and it keeps the error type non-generic.

use thiserror::Error;

#[derive(Debug, Error)]
#[non_exhaustive]
pub enum Error {
    #[error("sample count {n} is invalid: need a power of two, at least 8")]
    InvalidSampleCount { n: usize },

    #[error("sample {index} is not finite")]
    NonFiniteSample { index: usize },

    #[error("period must be finite and positive, got {period}")]
    InvalidPeriod { period: f64 },

    #[error("operands live on different grids (period or sample count differ)")]
    GridMismatch,

    #[error("Bloch wavenumber p = {p} lies outside the Brillouin zone [-{half_zone}, {half_zone}]")]
    OutsideBrillouinZone { p: f64, half_zone: f64 },

    #[error("truncation half-width {m} is too small; need at least 4")]
    TruncationTooSmall { m: usize },

    #[error("matrix is not Hermitian: defect {defect:e} exceeds tolerance {tol:e}")]
    HermiticityViolation { defect: f64, tol: f64 },

    #[error("eigenvalue iteration failed to converge within {max_sweeps} sweeps")]
    EigenNonConvergence { max_sweeps: usize },

    #[error(
        "truncation certificate did not converge: half-width cap {m_cap} reached \
         with last increment {last_increment:e}"
    )]
    CertificateNonConvergence { m_cap: usize, last_increment: f64 },

    #[error("band count {n_bands} is invalid: need 1..={max}")]
    InvalidBandCount { n_bands: usize, max: usize },

    #[error("Brillouin-zone sample count {n_p} is invalid: need odd and at least 3")]
    InvalidZoneSampleCount { n_p: usize },

    #[error("eigenvector has no fluctuation part (|δu| = {norm:e}); diagnostic undefined for constant modes")]
    DegenerateEigenvector { norm: f64 },

    #[error("λ + ⟨s⟩ = {value:e} is too close to zero; the resolvent identity degenerates")]
    ResolventDegenerate { value: f64 },

    #[error(
        "series truncation unreliable: last retained term is {ratio:e} of the sum, \
         above the 1e-3 validity threshold"
    )]
    SeriesTruncation { ratio: f64 },

    #[error("root bracketing failed: no sign change up to {limit}")]
    BracketFailure { limit: f64 },

    #[error("scan grid is empty")]
    EmptyGrid,

    #[error("parameter {name} is invalid: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("steady-state residual {residual:e} exceeds tolerance {tol:e}; the supplied (σ, C₀) pair is inconsistent")]
    SteadyStateResidual { residual: f64, tol: f64 },

    #[error("field blew up at t = {t}: non-finite value at x = {x}")]
    BlowUp { t: f64, x: f64 },

    #[error(
        "insufficient dynamic range: norm varied by {decades:.2} decades, need at least {required:.1}"
    )]
    InsufficientDynamicRange { decades: f64, required: f64 },

    #[error("CSV line {line}: {msg}")]
    Csv { line: usize, msg: String },

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
