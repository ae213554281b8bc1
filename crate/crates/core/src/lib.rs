//! Certified arithmetic and search procedures for computable presentations of `l^p`.
//!
//! The layers build on each other:
//!
//! * [`scalar`]: dyadic enclosures, `|z|^p`, `sigma_1`, `sigma` and the Lamperti objective.
//! * [`vectors`]: finitely supported vectors, norms, supports and `sigma_1` on vectors.
//! * [`presentation`]: generating sets known only through a norm oracle.
//! * [`tree`]: tree-indexed maps, partial disintegrations and projection onto strong homomorphisms.
//! * [`extension`]: ball certificates, approximate extension and the staged disintegration builder.
//! * [`chains`]: stage bounds, almost norm-maximizing children and chain partitions.
//! * [`iso`]: isometry synthesis and the reductions for the adversarial presentation.

pub mod chains;
pub mod error;
pub mod extension;
pub mod iso;
pub mod par;
pub mod presentation;
pub mod scalar;
pub mod tree;
pub mod vectors;

pub use error::{Error, Result};
