//! Ball certificates, approximate extension of partial disintegrations, and the staged
//! disintegration builder.

mod approx;
mod ball;
mod cells;
mod staged;

pub use approx::{adversarial_tail, approximate_extend, ComputableMap, ExtendBudget, Extension};
pub use ball::{certify_ball, error_functional, BallCertificate, RationalBall};
pub use staged::{build_disintegration, Stage, StagedDisintegration};
