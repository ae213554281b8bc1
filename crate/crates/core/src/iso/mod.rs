//! Isometry synthesis between presentations, its application to vectors, recovery of `p`, and the
//! oracle reductions for the adversarial presentation.

mod reductions;
mod synth;

pub use reductions::{compute_e0_wrt_f, e0_vector, identity_reduction, recover_scale_from_atom, scale_bound, E0Approx, IdentityMap};
pub use synth::{
    apply_isometry, normalized, recover_p, synthesize_isometry, GenerationWitness, IsometryApprox, LedgerEntry, RecoveredP,
    SynthBudget, UnitVector,
};
