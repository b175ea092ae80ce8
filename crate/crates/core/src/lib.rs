//! Linear stability of periodic steady states of reaction-diffusion equations,
//! decided a priori from the periodic source term alone.
//!
//! The central object is a real, L-periodic function s(x) (the linearized
//! reaction coefficient around a steady state). Perturbations δC of the steady
//! state evolve under ∂t δC = s(x) δC + ∂xx δC, and their growth or decay is
//! governed by the Bloch eigenvalue problem
//!
//! ```text
//!     -λ u = [ s(x) - p² + 2ip ∂x + ∂xx ] u,      u  L-periodic,
//! ```
//!
//! with Bloch wavenumber p in the first Brillouin zone [-κ/2, κ/2], κ = 2π/L.
//! The steady state is linearly stable exactly when the least eigenvalue λ₀₀
//! (attained at p = 0) is nonnegative.
//!
//! The crate provides three independent routes to that decision, built to
//! cross-validate each other:
//!
//! * [`spectrum`]: a Galerkin/Fourier discretization of the Bloch operator
//!   with a self-validating truncation certificate (`lambda00`, band
//!   structures over the Brillouin zone).
//! * [`criteria`]: closed-form sufficient conditions evaluated directly from
//!   s(x): pointwise negativity, a mean/fluctuation inequality, and a
//!   Kato-style lower bound on λ₀₀.
//! * [`sim`]: direct time integration of the reaction-diffusion dynamics
//!   (nonlinear and linearized) on a multi-period domain, from which decay
//!   rates are measured and compared against λ₀₀.
//!
//! [`mathieu`] specializes the machinery to the cosine source
//! s(x) = -α + β cos(2κx), where the spectral problem is Mathieu's equation
//! and stability boundaries in the (α, β) plane have closed or classical
//! series forms. [`plot`] renders the resulting stability diagram as SVG.
//!
//! All numerics are generic over the floating-point scalar through
//! [`scalar::Scalar`]; `f64` instantiations of the main types are exported at
//! the crate root (`PeriodicFunction64`, …). The stated tolerances throughout
//! assume `f64`; `f32` works but cannot reach them.

pub mod criteria;
pub mod eigen;
mod error;
pub mod fft;
pub mod mathieu;
pub mod periodic;
pub mod plot;
pub mod scalar;
pub mod sim;
pub mod spectrum;

pub use error::Error;
pub use scalar::Scalar;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;

pub use periodic::{NormConvention, PeriodicFunction};

/// `f64` periodic function on a uniform grid.
pub type PeriodicFunction64 = periodic::PeriodicFunction<f64>;
/// `f64` truncated Bloch operator.
pub type BlochMatrix64 = spectrum::BlochMatrix<f64>;
/// `f64` band structure over the Brillouin zone.
pub type BandStructure64 = spectrum::BandStructure<f64>;
/// `f64` least-eigenvalue result with its truncation certificate.
pub type Lambda0064 = spectrum::Lambda00<f64>;
/// `f64` closed-form criterion report.
pub type CriterionReport64 = criteria::CriterionReport<f64>;
/// `f64` cosine-source stability problem.
pub type MathieuProblem64 = mathieu::MathieuProblem<f64>;
/// `f64` reaction-diffusion problem with a known periodic steady state.
pub type RDProblem64 = sim::RDProblem<f64>;
