//! Generalized continued fractions over product algebras, the split-complex
//! plane and Minkowski space: Gauss maps and digits, exact cylinders,
//! quadratic-surd periodicity, and invariant-measure diagnostics.

pub mod algebra;
pub mod analysis;
pub mod cf_core;
pub mod lagrange;
pub mod numeric;
pub mod systems;

pub use cf_core::{CfError, CfSystem, Digit, DigitSequence, ExpansionStatus};
pub use systems::{make_system, system_by_name, SystemId};
