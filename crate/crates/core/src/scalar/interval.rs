//! Closed intervals with dyadic endpoints.
//!
//! Ring operations are exact; anything that needs division or a
//! transcendental rounds its endpoints outward to a multiple of `2^-w`, so
//! every result encloses the exact value.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::dyadic::Dyadic;
use super::rational::format_rational;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyadicInterval {
    lo: Dyadic,
    hi: Dyadic,
}

impl DyadicInterval {
    pub fn new(lo: Dyadic, hi: Dyadic) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        DyadicInterval { lo, hi }
    }

    pub fn point(d: Dyadic) -> Self {
        DyadicInterval { lo: d.clone(), hi: d }
    }

    pub fn zero() -> Self {
        Self::point(Dyadic::zero())
    }

    pub fn one() -> Self {
        Self::point(Dyadic::one())
    }

    pub fn from_int(n: i64) -> Self {
        Self::point(Dyadic::from_int(n))
    }

    /// Tightest enclosure of `q` with endpoints on the `2^-w` grid (exact for dyadic `q`).
    pub fn from_rational(q: &BigRational, w: i64) -> Self {
        if let Some(d) = Dyadic::from_rational_exact(q) {
            return Self::point(d);
        }
        DyadicInterval {
            lo: Dyadic::floor_rational(q, w),
            hi: Dyadic::ceil_rational(q, w),
        }
    }

    /// `[c - r, c + r]`.
    pub fn around(c: &Dyadic, r: &Dyadic) -> Self {
        let r = r.abs();
        DyadicInterval { lo: c - &r, hi: c + &r }
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn width(&self) -> Dyadic {
        &self.hi - &self.lo
    }

    pub fn mid(&self) -> Dyadic {
        Dyadic::midpoint(&self.lo, &self.hi)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_exact_zero(&self) -> bool {
        self.lo.is_zero() && self.hi.is_zero()
    }

    /// True when the width is at most `2^-k`.
    pub fn width_at_most(&self, k: i64) -> bool {
        self.width() <= Dyadic::pow2(-k)
    }

    pub fn contains(&self, d: &Dyadic) -> bool {
        &self.lo <= d && d <= &self.hi
    }

    pub fn contains_rational(&self, q: &BigRational) -> bool {
        self.lo.to_rational() <= *q && *q <= self.hi.to_rational()
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn subset_of(&self, other: &DyadicInterval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn overlaps(&self, other: &DyadicInterval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Certainly strictly positive.
    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.hi.is_negative()
    }

    /// Every point of `self` is strictly below every point of `other`.
    pub fn certainly_lt(&self, other: &DyadicInterval) -> bool {
        self.hi < other.lo
    }

    pub fn certainly_le(&self, other: &DyadicInterval) -> bool {
        self.hi <= other.lo
    }

    pub fn hull(&self, other: &DyadicInterval) -> Self {
        DyadicInterval {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    pub fn intersect(&self, other: &DyadicInterval) -> Option<Self> {
        let lo = self.lo.clone().max(other.lo.clone());
        let hi = self.hi.clone().min(other.hi.clone());
        if lo <= hi {
            Some(DyadicInterval { lo, hi })
        } else {
            None
        }
    }

    pub fn abs(&self) -> Self {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            -self.clone()
        } else {
            DyadicInterval {
                lo: Dyadic::zero(),
                hi: self.hi.clone().max(self.lo.abs()),
            }
        }
    }

    /// Interval of `max(x, 0)`.
    pub fn clamp_nonneg(&self) -> Self {
        DyadicInterval {
            lo: self.lo.clone().max(Dyadic::zero()),
            hi: self.hi.clone().max(Dyadic::zero()),
        }
    }

    pub fn min(&self, other: &DyadicInterval) -> Self {
        DyadicInterval {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().min(other.hi.clone()),
        }
    }

    pub fn max(&self, other: &DyadicInterval) -> Self {
        DyadicInterval {
            lo: self.lo.clone().max(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    pub fn sqr(&self) -> Self {
        let a = self.abs();
        DyadicInterval { lo: &a.lo * &a.lo, hi: &a.hi * &a.hi }
    }

    pub fn scale_pow2(&self, e: i64) -> Self {
        DyadicInterval { lo: self.lo.shl(e), hi: self.hi.shl(e) }
    }

    /// Round endpoints outward onto the `2^-w` grid.
    pub fn round_out(&self, w: i64) -> Self {
        DyadicInterval { lo: self.lo.floor_to(w), hi: self.hi.ceil_to(w) }
    }

    /// Widen symmetrically by `r >= 0`.
    pub fn widen(&self, r: &Dyadic) -> Self {
        DyadicInterval { lo: &self.lo - r, hi: &self.hi + r }
    }

    /// `1 / self`; `None` when the interval meets zero.
    pub fn recip(&self, w: i64) -> Option<Self> {
        if self.contains_zero() {
            return None;
        }
        let one = BigRational::from_integer(1.into());
        let lo = &one / self.hi.to_rational();
        let hi = &one / self.lo.to_rational();
        Some(DyadicInterval {
            lo: Dyadic::floor_rational(&lo, w),
            hi: Dyadic::ceil_rational(&hi, w),
        })
    }

    pub fn div(&self, other: &DyadicInterval, w: i64) -> Option<Self> {
        if other.contains_zero() {
            return None;
        }
        let a = [self.lo.to_rational(), self.hi.to_rational()];
        let b = [other.lo.to_rational(), other.hi.to_rational()];
        let mut qs = Vec::with_capacity(4);
        for x in &a {
            for y in &b {
                qs.push(x / y);
            }
        }
        let lo = qs.iter().min().cloned().unwrap_or_else(BigRational::zero);
        let hi = qs.iter().max().cloned().unwrap_or_else(BigRational::zero);
        Some(DyadicInterval {
            lo: Dyadic::floor_rational(&lo, w),
            hi: Dyadic::ceil_rational(&hi, w),
        })
    }

    /// `self^n` for a natural exponent.
    pub fn powi(&self, n: u32) -> Self {
        if n == 0 {
            return Self::one();
        }
        if n % 2 == 0 {
            let a = self.abs();
            let mut lo = Dyadic::one();
            let mut hi = Dyadic::one();
            for _ in 0..n {
                lo = &lo * &a.lo;
                hi = &hi * &a.hi;
            }
            DyadicInterval { lo, hi }
        } else {
            let mut lo = Dyadic::one();
            let mut hi = Dyadic::one();
            for _ in 0..n {
                lo = &lo * &self.lo;
                hi = &hi * &self.hi;
            }
            DyadicInterval { lo, hi }
        }
    }

    pub fn lo_f64(&self) -> f64 {
        self.lo.to_f64()
    }

    pub fn hi_f64(&self) -> f64 {
        self.hi.to_f64()
    }

    pub fn mid_f64(&self) -> f64 {
        self.mid().to_f64()
    }
}

impl<'a> Add<&'a DyadicInterval> for &'a DyadicInterval {
    type Output = DyadicInterval;
    fn add(self, rhs: &DyadicInterval) -> DyadicInterval {
        DyadicInterval { lo: &self.lo + &rhs.lo, hi: &self.hi + &rhs.hi }
    }
}

impl<'a> Sub<&'a DyadicInterval> for &'a DyadicInterval {
    type Output = DyadicInterval;
    fn sub(self, rhs: &DyadicInterval) -> DyadicInterval {
        DyadicInterval { lo: &self.lo - &rhs.hi, hi: &self.hi - &rhs.lo }
    }
}

impl<'a> Mul<&'a DyadicInterval> for &'a DyadicInterval {
    type Output = DyadicInterval;
    fn mul(self, rhs: &DyadicInterval) -> DyadicInterval {
        if self.is_point() && rhs.is_point() {
            return DyadicInterval::point(&self.lo * &rhs.lo);
        }
        let c = [
            &self.lo * &rhs.lo,
            &self.lo * &rhs.hi,
            &self.hi * &rhs.lo,
            &self.hi * &rhs.hi,
        ];
        let lo = c.iter().min().cloned().unwrap_or_else(Dyadic::zero);
        let hi = c.iter().max().cloned().unwrap_or_else(Dyadic::zero);
        DyadicInterval { lo, hi }
    }
}

impl Add for DyadicInterval {
    type Output = DyadicInterval;
    fn add(self, rhs: DyadicInterval) -> DyadicInterval {
        &self + &rhs
    }
}

impl Sub for DyadicInterval {
    type Output = DyadicInterval;
    fn sub(self, rhs: DyadicInterval) -> DyadicInterval {
        &self - &rhs
    }
}

impl Mul for DyadicInterval {
    type Output = DyadicInterval;
    fn mul(self, rhs: DyadicInterval) -> DyadicInterval {
        &self * &rhs
    }
}

impl Neg for DyadicInterval {
    type Output = DyadicInterval;
    fn neg(self) -> DyadicInterval {
        DyadicInterval { lo: -self.hi, hi: -self.lo }
    }
}

impl std::iter::Sum for DyadicInterval {
    fn sum<I: Iterator<Item = DyadicInterval>>(iter: I) -> Self {
        iter.fold(DyadicInterval::zero(), |acc, x| &acc + &x)
    }
}

impl fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.12}, {:.12}]", self.lo.to_f64(), self.hi.to_f64())
    }
}

/// JSON form: exact endpoints as "num/den" strings plus decimal previews.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct IntervalReport {
    pub lo: String,
    pub hi: String,
    pub lo_approx: f64,
    pub hi_approx: f64,
}

impl From<&DyadicInterval> for IntervalReport {
    fn from(iv: &DyadicInterval) -> Self {
        IntervalReport {
            lo: format_rational(&iv.lo.to_rational()),
            hi: format_rational(&iv.hi.to_rational()),
            lo_approx: iv.lo.to_f64(),
            hi_approx: iv.hi.to_f64(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(a: i64, b: i64) -> DyadicInterval {
        DyadicInterval::new(Dyadic::from_int(a), Dyadic::from_int(b))
    }

    #[test]
    fn mul_signs() {
        let p = &iv(-2, 3) * &iv(-1, 4);
        assert_eq!(p, iv(-8, 12));
        assert_eq!(iv(-3, 2).sqr(), iv(0, 9));
        assert_eq!(iv(-3, 2).abs(), iv(0, 3));
    }

    #[test]
    fn recip_and_div_enclose() {
        let r = iv(3, 3).recip(20).unwrap();
        let third = BigRational::new(1.into(), 3.into());
        assert!(r.contains_rational(&third));
        assert!(r.width_at_most(20));
        assert!(iv(-1, 1).recip(10).is_none());
        let d = iv(1, 2).div(&iv(-4, -2), 10).unwrap();
        assert!(d.contains_rational(&BigRational::new((-1).into(), 1.into())));
        assert!(d.contains_rational(&BigRational::new((-1).into(), 4.into())));
    }

    #[test]
    fn odd_and_even_powers() {
        assert_eq!(iv(-2, 1).powi(3), iv(-8, 1));
        assert_eq!(iv(-2, 1).powi(2), iv(0, 4));
    }
}
