//! Second-quantization oracle for the source.
//!
//! Photons are tracked as labeled creation operators (path, polarization,
//! internal state, time bin). Input states are pushed through the
//! interferometer mode by mode, post-selected on zero-delay two-fold
//! coincidences, and reduced to 4x4 polarization matrices by contracting the
//! internal labels with their overlap table. Nothing here shares code with the
//! closed-form matrices in [`crate::source_model`], which it is used to check.

mod components;
mod expr;
mod interferometer;

pub use components::{derive_all, derive_component, input_state, oracle_mixture, oracle_rho_exp, ComponentKind, OracleParams};
pub use expr::{FockExpression, InternalId, ModeImage, ModeLabel, Monomial, OverlapTable, Path, Pol, TimeBin, PRUNE_TOL, TRACKED_BINS};
pub use interferometer::{
    apply_beamsplitter, apply_chi_phase, apply_delay, apply_pol_switch, evolve, postselect_coincidence,
    reduce_to_polarization, BeamSplitter, InterferometerSpec,
};
