//! Generalized steady states (GSS) of damped nonlinear mechanical systems
//!
//! Systems of the form `M x'' + C x' + K x + f(x, x') = g(t)` with a polynomial
//! nonlinearity `f` and an arbitrary (aperiodic) forcing history `g`. The steady
//! response is expanded in powers of the forcing amplitude; each order solves a
//! linear problem by exponential-kernel propagation over the sampled forcing.
//!
//! The crate is `no_std` (with `alloc`). The `parallel` feature pulls in `std`
//! and rayon for per-mode and per-term parallelism; results do not depend on
//! the thread count.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bench;
pub mod composition;
pub mod error;
pub mod gss;
pub mod kernel;
pub mod linalg;
pub mod model;
pub mod oracle;
mod par;
pub mod spectral;
pub mod trajectory;

pub use error::{GssError, Result};
pub use trajectory::{TimeGrid, Trajectory};

pub use num_complex::Complex64;
