//! Finitely supported vectors over the Gaussian rationals, `l^p` norms and the support calculus.
//!
//! The same sparse representation serves two roles: [`FinSuppVector`] holds coordinates with
//! respect to the standard basis, [`GenCombo`] holds coefficients of a formal combination of a
//! presentation's generators. Norm-based functionals are written against [`NormSpace`] so they
//! run unchanged over a transparent `l^p` and over an opaque norm oracle.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::marker::PhantomData;
use std::ops::{Add, Neg, Sub};

use num_rational::BigRational;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Result;
use crate::scalar::sigma::{lamperti_constant_w, refine_fallible, separated, sigma1_from_parts};
use crate::scalar::transcendental::{pow_iv, refine};
use crate::scalar::{abs_pow, DyadicInterval, GaussianRational, PExponent};

pub type Index = u64;

/// Marker for coordinates in the standard basis `e_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Coords {}

/// Marker for coefficients over a presentation's generators `f_j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gens {}

/// A sparse vector with no stored zeros.
pub struct Sparse<K> {
    entries: BTreeMap<Index, GaussianRational>,
    _kind: PhantomData<K>,
}

pub type FinSuppVector = Sparse<Coords>;
pub type GenCombo = Sparse<Gens>;

impl<K> Sparse<K> {
    pub fn zero() -> Self {
        Sparse { entries: BTreeMap::new(), _kind: PhantomData }
    }

    pub fn from_pairs<I: IntoIterator<Item = (Index, GaussianRational)>>(pairs: I) -> Self {
        let mut v = Self::zero();
        for (n, z) in pairs {
            let cur = v.get(n);
            v.set(n, &cur + &z);
        }
        v
    }

    /// `e_n` (or `f_n`).
    pub fn unit(n: Index) -> Self {
        Self::scaled_unit(n, GaussianRational::one())
    }

    pub fn scaled_unit(n: Index, z: GaussianRational) -> Self {
        let mut v = Self::zero();
        v.set(n, z);
        v
    }

    /// Real rational entries, for tests and fixtures.
    pub fn from_ratios(pairs: &[(Index, i64, i64)]) -> Self {
        Self::from_pairs(pairs.iter().map(|&(n, a, b)| (n, GaussianRational::from_ratio(a, b))))
    }

    pub fn get(&self, n: Index) -> GaussianRational {
        self.entries.get(&n).cloned().unwrap_or_else(GaussianRational::zero)
    }

    pub fn set(&mut self, n: Index, z: GaussianRational) {
        if z.is_zero() {
            self.entries.remove(&n);
        } else {
            self.entries.insert(n, z);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Index, &GaussianRational)> {
        self.entries.iter().map(|(n, z)| (*n, z))
    }

    pub fn support(&self) -> BTreeSet<Index> {
        self.entries.keys().copied().collect()
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn max_index(&self) -> Option<Index> {
        self.entries.keys().next_back().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scale(&self, z: &GaussianRational) -> Self {
        Self::from_pairs(self.iter().map(|(n, a)| (n, a * z)))
    }

    pub fn scale_rational(&self, q: &BigRational) -> Self {
        self.scale(&GaussianRational::real(q.clone()))
    }

    /// Keep only the coordinates in `set`.
    pub fn restrict(&self, set: &BTreeSet<Index>) -> Self {
        Self::from_pairs(self.iter().filter(|(n, _)| set.contains(n)).map(|(n, z)| (n, z.clone())))
    }

    /// Drop the coordinates in `set`.
    pub fn without(&self, set: &BTreeSet<Index>) -> Self {
        Self::from_pairs(self.iter().filter(|(n, _)| !set.contains(n)).map(|(n, z)| (n, z.clone())))
    }
}

impl<K> Clone for Sparse<K> {
    fn clone(&self) -> Self {
        Sparse { entries: self.entries.clone(), _kind: PhantomData }
    }
}

impl<K> PartialEq for Sparse<K> {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl<K> Eq for Sparse<K> {}

impl<K> Hash for Sparse<K> {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.entries.hash(state)
    }
}

impl<K> Default for Sparse<K> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<K> fmt::Debug for Sparse<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl<K> fmt::Display for Sparse<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.iter().map(|(n, z)| format!("({z})#{n}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl<'a, K> Add<&'a Sparse<K>> for &'a Sparse<K> {
    type Output = Sparse<K>;
    fn add(self, rhs: &Sparse<K>) -> Sparse<K> {
        let mut out = self.clone();
        for (n, z) in rhs.iter() {
            let cur = out.get(n);
            out.set(n, &cur + z);
        }
        out
    }
}

impl<'a, K> Sub<&'a Sparse<K>> for &'a Sparse<K> {
    type Output = Sparse<K>;
    fn sub(self, rhs: &Sparse<K>) -> Sparse<K> {
        let mut out = self.clone();
        for (n, z) in rhs.iter() {
            let cur = out.get(n);
            out.set(n, &cur - z);
        }
        out
    }
}

impl<K> Add for Sparse<K> {
    type Output = Sparse<K>;
    fn add(self, rhs: Sparse<K>) -> Sparse<K> {
        &self + &rhs
    }
}

impl<K> Sub for Sparse<K> {
    type Output = Sparse<K>;
    fn sub(self, rhs: Sparse<K>) -> Sparse<K> {
        &self - &rhs
    }
}

impl<K> Neg for &Sparse<K> {
    type Output = Sparse<K>;
    fn neg(self) -> Sparse<K> {
        Sparse::from_pairs(self.iter().map(|(n, z)| (n, -z)))
    }
}

impl<K> std::iter::Sum for Sparse<K> {
    fn sum<I: Iterator<Item = Sparse<K>>>(iter: I) -> Self {
        iter.fold(Sparse::zero(), |acc, v| &acc + &v)
    }
}

#[derive(Serialize, Deserialize)]
struct SparseRepr {
    entries: BTreeMap<Index, GaussianRational>,
}

impl<K> Serialize for Sparse<K> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SparseRepr { entries: self.entries.clone() }.serialize(s)
    }
}

impl<'de, K> Deserialize<'de> for Sparse<K> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = SparseRepr::deserialize(d)?;
        Ok(Sparse::from_pairs(repr.entries))
    }
}

/// A normed space in which vectors of type `V` live, known through `||v||^p` enclosures.
pub trait NormSpace<V>: Send + Sync {
    fn exponent(&self) -> &PExponent;

    /// Enclosure of `||v||^p` at working precision `w`.
    fn norm_pow_w(&self, v: &V, w: i64) -> DyadicInterval;
}

/// The transparent space `l^p` with vectors in standard coordinates.
#[derive(Clone, Debug)]
pub struct LpSpace {
    pub p: PExponent,
}

impl LpSpace {
    pub fn new(p: PExponent) -> Self {
        LpSpace { p }
    }
}

impl NormSpace<FinSuppVector> for LpSpace {
    fn exponent(&self) -> &PExponent {
        &self.p
    }

    fn norm_pow_w(&self, v: &FinSuppVector, w: i64) -> DyadicInterval {
        let extra = 64 - (v.support_len() as u64).leading_zeros() as i64;
        v.iter()
            .map(|(_, z)| crate::scalar::sigma::abs_pow_w(z, &self.p, w + extra + 2))
            .sum()
    }
}

/// Enclosure of `||v||^p` of width at most `2^-k`.
pub fn norm_pow<V, S: NormSpace<V> + ?Sized>(space: &S, v: &V, k: i64) -> DyadicInterval {
    refine(k, |w| space.norm_pow_w(v, w))
}

/// `||v||` at working precision `w`.
pub fn norm_w<V, S: NormSpace<V> + ?Sized>(space: &S, v: &V, w: i64) -> DyadicInterval {
    let np = space.norm_pow_w(v, 2 * w + 8);
    let p = space.exponent();
    if p.as_natural() == Some(1) {
        return np;
    }
    pow_iv(&np, &p.recip_enclosure(w + 8), w)
}

/// Enclosure of `||v||` of width at most `2^-k`.
pub fn norm<V, S: NormSpace<V> + ?Sized>(space: &S, v: &V, k: i64) -> DyadicInterval {
    refine(k, |w| norm_w(space, v, w))
}

/// `||f||_p` for a finitely supported vector.
pub fn norm_p(f: &FinSuppVector, p: &PExponent, k: i64) -> DyadicInterval {
    norm(&LpSpace::new(p.clone()), f, k)
}

/// `sigma_1(f, g)` from the four norms `||f||^p, ||g||^p, ||f-g||^p, ||f+g||^p`.
pub fn sigma1_w<K, S: NormSpace<Sparse<K>> + ?Sized>(space: &S, f: &Sparse<K>, g: &Sparse<K>, w: i64) -> DyadicInterval {
    let a = space.norm_pow_w(f, w);
    let b = space.norm_pow_w(g, w);
    let c = space.norm_pow_w(&(f - g), w);
    let d = space.norm_pow_w(&(f + g), w);
    sigma1_from_parts(&a, &b, &c, &d)
}

pub fn sigma1<K, S: NormSpace<Sparse<K>> + ?Sized>(space: &S, f: &Sparse<K>, g: &Sparse<K>, k: i64) -> DyadicInterval {
    refine(k, |w| sigma1_w(space, f, g, w + 4))
}

/// `sigma_1` on standard-coordinate vectors.
pub fn sigma1_vec(f: &FinSuppVector, g: &FinSuppVector, p: &PExponent, k: i64) -> DyadicInterval {
    sigma1(&LpSpace::new(p.clone()), f, g, k)
}

/// `sigma = c_p sigma_1` at working precision `w`; `None` when `c_p` is not yet separated.
pub fn sigma_w<K, S: NormSpace<Sparse<K>> + ?Sized>(space: &S, f: &Sparse<K>, g: &Sparse<K>, w: i64) -> Option<DyadicInterval> {
    let c = lamperti_constant_w(space.exponent(), w + 4)?;
    Some(&c * &sigma1_w(space, f, g, w + 4))
}

pub fn sigma<K, S: NormSpace<Sparse<K>> + ?Sized>(space: &S, f: &Sparse<K>, g: &Sparse<K>, k: i64) -> Result<DyadicInterval> {
    separated(space.exponent(), k)?;
    refine_fallible(k, |w| sigma_w(space, f, g, w).ok_or(crate::Error::PEqualsTwo))
}

pub fn is_disjointly_supported<K>(f: &Sparse<K>, g: &Sparse<K>) -> bool {
    let (small, large) = if f.support_len() <= g.support_len() { (f, g) } else { (g, f) };
    small.entries.keys().all(|n| !large.entries.contains_key(n))
}

/// `f <= g`: `f` agrees with `g` on the support of `f`.
pub fn precedes<K>(f: &Sparse<K>, g: &Sparse<K>) -> bool {
    f.iter().all(|(n, z)| g.entries.get(&n) == Some(z))
}

/// Atoms of the order: nonzero multiples of a single basis vector.
pub fn is_atom<K>(f: &Sparse<K>) -> bool {
    f.support_len() == 1
}

/// `|z|^p` enclosure for a single coordinate, used by coordinatewise procedures.
pub fn coord_pow(z: &GaussianRational, p: &PExponent, k: i64) -> DyadicInterval {
    abs_pow(z, p, k)
}
