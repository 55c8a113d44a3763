//! Landau–Weyl operators on phase-space functions.

mod lw;
mod phase_ops;

pub use lw::{lw_operator, lw_operator_from_xy_rule, LiftedSymbol, LwOperator, LwRoute, XY_RULE_MAX_DEGREE};
pub use phase_ops::{landau_translation, magnetic_hamiltonian_apply, metaplectic_rescale, BOUNDARY_MASS_LIMIT};
