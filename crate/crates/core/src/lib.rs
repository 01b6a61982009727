//! Spray geometry on open subsets of `R^n`: jets of fields on the slit
//! tangent bundle, sprays and their curvature, the metrizable one-form
//! family, Finsler metrizability checks and projectively flat metrics.

pub mod cli;
pub mod error;
pub mod jets;
pub mod linalg;
pub mod metrics;
pub mod metrizability;
pub mod oneform;
pub mod spray;

pub use error::{GeomError, Result};
