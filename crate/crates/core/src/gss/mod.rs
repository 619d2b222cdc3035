//! Generalized steady states: Taylor expansion in the forcing amplitude,
//! Pade resummation, quasiperiodic forcing and reduced models.

mod expansion;
mod pade;
mod reduced;
mod torus;

pub use expansion::{
    compute_taylor_gss, divergence_check, expand_integrand, Backend, BackendTag, DivergenceWarning, GssExpansion,
    GssOptions, DIVERGENCE_GROWTH,
};
pub use pade::{evaluate_pade, pade_resum, PadeConditioning, PadeGss, DENOMINATOR_MIN, PADE_RCOND};
pub use reduced::{real_modal_basis, reduced_gss, spectral_subspace_model, substitute_linear};
pub use torus::{
    compute_quasiperiodic_gss, fit_quasiperiodic, frc_sweep, harmonic_forcing, FrcPoint, FrcStatus, TorusExpansion,
    TorusOptions,
};

#[cfg(test)]
mod tests;
