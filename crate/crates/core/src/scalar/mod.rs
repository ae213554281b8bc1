//! Exact scalars, certified enclosures and the Lamperti functionals.

pub mod creal;
pub mod dyadic;
pub mod exponent;
pub mod interval;
pub mod lamperti;
pub mod rational;
pub mod sigma;
pub mod transcendental;

pub use creal::CReal;
pub use dyadic::Dyadic;
pub use exponent::PExponent;
pub use interval::{DyadicInterval, IntervalReport};
pub use rational::{format_rational, parse_rational, rat, rat_int, rat_pow2, GaussianRational};
pub use sigma::{
    abs_pow, lamperti_constant, lamperti_objective, sigma1_scalar, sigma_scalar,
};
