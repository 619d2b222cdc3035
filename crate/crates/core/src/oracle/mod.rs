//! Independent reference solvers used to validate the expansion.
//!
//! Nothing here shares code paths with the routines it checks beyond the
//! system description itself.

mod faa_di_bruno;
mod linear;
mod newmark;
mod picard;
pub mod quadrature;
mod weights;

pub use faa_di_bruno::{decompositions, faadibruno_phi, monomial_coefficient, Decomposition};
pub use linear::{exact_pwl_response, expm};
pub use newmark::{newmark_full, newmark_full_with, NewmarkOptions, NEWTON_MAX_ITER, NEWTON_RTOL};
pub use picard::{iteration_bound, picard_gss, picard_residual, PicardOptions, PicardResult};
pub use quadrature::{integrate, integrate_with};
pub use weights::{general_weights_quadrature, oscillator_exponential, structural_weights_quadrature};

#[cfg(test)]
mod tests;
