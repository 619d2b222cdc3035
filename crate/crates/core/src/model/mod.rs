//! System description: polynomial fields, mechanical systems, forcing and
//! reduced-order models.

mod field;
mod forcing;
mod multi_index;
mod reduced;
mod system;

pub use field::PolynomialField;
pub use forcing::{load_forcing, ForcingSignal, StateForcingTerm, TIME_SPACING_TOL};
pub use multi_index::{factorial, MultiIndex};
pub use reduced::ReducedModel;
pub use system::{build_system, fit_proportional_damping, DampingClass, DampingOverride, MechanicalSystem};
