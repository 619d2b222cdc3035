//! Exponential-kernel integration of linear forced problems.

mod propagate;
mod quasiperiodic;
mod weights;

pub use propagate::{
    compute_kernel_weights, propagate, KernelPropagator, LinearPropagator, NewmarkPropagator, COMPLEX_RESIDUE_TOL,
};
pub use quasiperiodic::{
    propagate_quasiperiodic, quasiperiodic_step, steady_quasiperiodic, Harmonic, QuasiPeriodicForcing,
    DEFAULT_RESONANCE_REL,
};
pub use weights::{
    oscillator_step, qmat_structural, qvec_general, DampingBranch, KernelWeights, OscillatorStep, CRITICAL_TOL,
    SERIES_THRESHOLD,
};
