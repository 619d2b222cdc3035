//! Multi-index composition of the nonlinearity with a truncated series.

mod compose;
mod tensor;

pub use compose::{assemble_h, assemble_phi, CompositionCache, Integrand};
pub use tensor::CoefficientTensor;
