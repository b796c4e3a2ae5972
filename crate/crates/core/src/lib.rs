//! Elliptical ℓ-Pareto processes for spatial extremes.
//!
//! The crate covers the extremal-t exponent measure (exponent function,
//! intensities and their partial derivatives), exact samplers for
//! extremal-t max-stable vectors and ℓ-Pareto vectors, conditional
//! simulation, censored and pairwise likelihood fitting of the dependence
//! parameters, and a Monte Carlo study harness.
//!
//! The numerical kernel and the exponent-measure formulas are generic over
//! [`Scalar`] (`f32`/`f64`); samplers and estimators work in `f64`. The type
//! aliases at the crate root fix the scalar to `f64`.

pub mod error;
pub mod exponent;
pub mod inference;
pub mod numerics;
pub mod scalar;
pub mod simulate;
pub mod study;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Matrix = numerics::Matrix<f64>;
pub type PdMatrix = numerics::PdMatrix<f64>;
pub type CorrelationModel = exponent::CorrelationModel<f64>;
pub type ParamVector = exponent::ParamVector<f64>;
pub type EllipticalModel = exponent::EllipticalModel<f64>;
pub type MvtIntegrator = numerics::MvtIntegrator<f64>;
pub type MvtEstimate = numerics::MvtEstimate<f64>;
