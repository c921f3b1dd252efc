//! Localized vibration modes of finite and infinite line defects in an infinite
//! square mass-spring lattice.
//!
//! The generic kernels live in the modules; the crate root pins them to `f64`.

// `!(x > 0)` is how NaN gets rejected; frozen reference values keep every digit.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod asymptotics;
pub mod error;
pub mod greens;
pub mod modes;
pub mod oracle;
pub mod quadrature;
pub mod scalar;
pub mod specfun;
pub mod waveguide;

pub use error::{Error, Result};
pub use greens::GreensIndex;
pub use modes::{DefectConfig, FieldGrid, GreensMatrix, ModeSolution, Symmetry};
pub use oracle::{TruncatedLattice, TruncatedMode};
pub use scalar::Real;

pub type FrequencyPoint = greens::FrequencyPoint<f64>;
pub type SeriesControl = specfun::SeriesControl<f64>;
pub type Estimate = quadrature::Estimate<f64>;
pub type FarFieldParams = asymptotics::FarFieldParams<f64>;
pub type DispersionSample = waveguide::DispersionSample<f64>;
pub type EnvelopeModel = waveguide::EnvelopeModel<f64>;
pub type TransverseLambda = waveguide::TransverseLambda<f64>;
