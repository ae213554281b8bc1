//! Finite trees, tree-indexed maps and the classical extension results for partial
//! disintegrations.

mod existence;
mod map;
mod node;
mod projection;
mod sigma;
mod success;

pub use existence::{extend_existence, ExistenceReport};
pub use map::{ComboMap, TransparentMap, TreeMap};
pub use node::{FiniteTree, TreeNode};
pub use projection::{check_hypothesis, distance_bound, exact_distance_single_free_node, project_to_strong_hom, sigma_hat};
pub use sigma::{
    hom_violation, sigma_tree, sigma_tree_w, sigma_tree_with, tree_norm, tree_norm_pow, validate_partial_disintegration,
    validate_transparent, Verdict, Witness,
};
pub use success::{
    generators_combo, generators_transparent, success_index, GeneratorApprox, SearchBudget, SpanWitness, SuccessIndex,
};
