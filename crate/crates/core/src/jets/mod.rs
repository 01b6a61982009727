//! Forward-mode differentiation on the tangent bundle.

mod fd;
mod field;
mod jet;
mod sample;

pub use fd::{fd_oracle, fd_step};
pub use field::{euler_defect, jet_eval, multi_index, Field, JetVars, ScalarField, Var};
pub use jet::{Jet, MAX_ORDER};
pub use sample::{SampleBox, SampleSet, Sampler, TangentSample};
