//! Presentations of `l^p`: generating sets reachable only through a norm oracle on formal
//! rational combinations.

mod adversarial;
mod ce;
mod computable;
mod descriptor;

use std::sync::Arc;

use num_rational::BigRational;

pub use adversarial::{two_pow_neg_over_p, Adversarial};
pub use ce::{mass_above, CeSet, CeSpec, Certainty, OracleAdapter, OracleMode, STAGED_GAMMA_SLACK_EXP};
pub use computable::{bit_bound, tail_series, vector_approx, ComputableVector};
pub use descriptor::{build, PresentationDescriptor};

use crate::error::{Error, Result};
use crate::scalar::{Dyadic, DyadicInterval, GaussianRational, PExponent};
use crate::vectors::{norm, FinSuppVector, GenCombo, LpSpace, NormSpace};

/// A computable presentation of `l^p` (or of `l^p_n`).
pub trait Presentation: NormSpace<GenCombo> {
    /// Short human-readable name.
    fn name(&self) -> String;

    fn descriptor(&self) -> PresentationDescriptor;

    /// Standard coordinates of `f`, within `2^-k` in norm. Only for presentations with a backdoor.
    fn transparent_eval(&self, _f: &GenCombo, _k: i64) -> Result<FinSuppVector> {
        Err(Error::NoBackdoor)
    }

    fn has_backdoor(&self) -> bool {
        false
    }
}

pub type SharedPresentation = Arc<dyn Presentation>;

/// A rational `q` with `|q - ||f||| < 2^-k`.
pub fn norm_approx<P: Presentation + ?Sized>(pres: &P, f: &GenCombo, k: i64) -> BigRational {
    norm(pres, f, k + 1).mid().to_rational()
}

/// Enclosure of `||f||` of width at most `2^-k`.
pub fn norm_enclosure<P: Presentation + ?Sized>(pres: &P, f: &GenCombo, k: i64) -> DyadicInterval {
    norm(pres, f, k)
}

pub fn relabel<A, B>(v: &crate::vectors::Sparse<A>) -> crate::vectors::Sparse<B> {
    crate::vectors::Sparse::from_pairs(v.iter().map(|(n, z)| (n, z.clone())))
}

/// The standard basis `E = {e_0, e_1, ...}`.
#[derive(Clone, Debug)]
pub struct Standard {
    lp: LpSpace,
}

impl Standard {
    pub fn new(p: PExponent) -> Self {
        Standard { lp: LpSpace::new(p) }
    }
}

impl NormSpace<GenCombo> for Standard {
    fn exponent(&self) -> &PExponent {
        &self.lp.p
    }

    fn norm_pow_w(&self, v: &GenCombo, w: i64) -> DyadicInterval {
        self.lp.norm_pow_w(&relabel(v), w)
    }
}

impl Presentation for Standard {
    fn name(&self) -> String {
        format!("E (p = {})", self.lp.p)
    }

    fn descriptor(&self) -> PresentationDescriptor {
        PresentationDescriptor::Standard { p: Some(self.lp.p.to_string()) }
    }

    fn transparent_eval(&self, f: &GenCombo, _k: i64) -> Result<FinSuppVector> {
        Ok(relabel(f))
    }

    fn has_backdoor(&self) -> bool {
        true
    }
}

/// `zeta E = {zeta e_0, zeta e_1, ...}` for a unimodular Gaussian rational `zeta`.
#[derive(Clone, Debug)]
pub struct Rotated {
    lp: LpSpace,
    zeta: GaussianRational,
}

impl Rotated {
    pub fn new(p: PExponent, zeta: GaussianRational) -> Result<Self> {
        if zeta.norm_sqr() != BigRational::from_integer(1.into()) {
            return Err(Error::InvalidInput(format!("rotation {zeta} is not unimodular")));
        }
        Ok(Rotated { lp: LpSpace::new(p), zeta })
    }
}

impl NormSpace<GenCombo> for Rotated {
    fn exponent(&self) -> &PExponent {
        &self.lp.p
    }

    fn norm_pow_w(&self, v: &GenCombo, w: i64) -> DyadicInterval {
        self.lp.norm_pow_w(&relabel(v), w)
    }
}

impl Presentation for Rotated {
    fn name(&self) -> String {
        format!("({})E (p = {})", self.zeta, self.lp.p)
    }

    fn descriptor(&self) -> PresentationDescriptor {
        PresentationDescriptor::Rotated { zeta: self.zeta.clone(), p: Some(self.lp.p.to_string()) }
    }

    fn transparent_eval(&self, f: &GenCombo, _k: i64) -> Result<FinSuppVector> {
        Ok(relabel(&f.scale(&self.zeta)))
    }

    fn has_backdoor(&self) -> bool {
        true
    }
}

/// `l^p_n` generated by `e_0, ..., e_{n-1}`; generators with index `>= n` are zero.
#[derive(Clone, Debug)]
pub struct Finite {
    lp: LpSpace,
    dim: u64,
}

impl Finite {
    pub fn new(p: PExponent, dim: u64) -> Self {
        Finite { lp: LpSpace::new(p), dim }
    }

    pub fn dim(&self) -> u64 {
        self.dim
    }

    fn truncate(&self, v: &GenCombo) -> FinSuppVector {
        FinSuppVector::from_pairs(v.iter().filter(|(n, _)| *n < self.dim).map(|(n, z)| (n, z.clone())))
    }
}

impl NormSpace<GenCombo> for Finite {
    fn exponent(&self) -> &PExponent {
        &self.lp.p
    }

    fn norm_pow_w(&self, v: &GenCombo, w: i64) -> DyadicInterval {
        self.lp.norm_pow_w(&self.truncate(v), w)
    }
}

impl Presentation for Finite {
    fn name(&self) -> String {
        format!("l^p_{} (p = {})", self.dim, self.lp.p)
    }

    fn descriptor(&self) -> PresentationDescriptor {
        PresentationDescriptor::Finite { dim: self.dim, p: Some(self.lp.p.to_string()) }
    }

    fn transparent_eval(&self, f: &GenCombo, _k: i64) -> Result<FinSuppVector> {
        Ok(self.truncate(f))
    }

    fn has_backdoor(&self) -> bool {
        true
    }
}

/// Hides the backdoor of another presentation.
#[derive(Clone)]
pub struct Opaque(pub SharedPresentation);

impl NormSpace<GenCombo> for Opaque {
    fn exponent(&self) -> &PExponent {
        self.0.exponent()
    }

    fn norm_pow_w(&self, v: &GenCombo, w: i64) -> DyadicInterval {
        self.0.norm_pow_w(v, w)
    }
}

impl Presentation for Opaque {
    fn name(&self) -> String {
        format!("opaque {}", self.0.name())
    }

    fn descriptor(&self) -> PresentationDescriptor {
        PresentationDescriptor::Opaque { inner: Box::new(self.0.descriptor()) }
    }
}

/// `d(v, w)` upper bound helper: enclosure of `||a - b||` in the presentation.
pub fn distance<P: Presentation + ?Sized>(pres: &P, a: &GenCombo, b: &GenCombo, k: i64) -> DyadicInterval {
    norm(pres, &(a - b), k)
}

/// True when `||f|| > 0` is certified at precision `k`.
pub fn certified_nonzero<P: Presentation + ?Sized>(pres: &P, f: &GenCombo, k: i64) -> bool {
    !f.is_zero() && crate::vectors::norm_pow(pres, f, k).lo() > &Dyadic::zero()
}
