//! Dyadic rationals `m * 2^e` with exact ring operations and directed rounding.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// An exact dyadic rational `mant * 2^exp`, kept normalized (odd mantissa or zero).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn new(mant: BigInt, exp: i64) -> Self {
        let mut d = Dyadic { mant, exp };
        d.normalize();
        d
    }

    fn normalize(&mut self) {
        if self.mant.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mant >>= tz as usize;
            self.exp += tz as i64;
        }
    }

    pub fn zero() -> Self {
        Dyadic { mant: BigInt::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Dyadic { mant: BigInt::one(), exp: 0 }
    }

    pub fn from_int(n: i64) -> Self {
        Dyadic::new(BigInt::from(n), 0)
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Dyadic::new(n, 0)
    }

    /// `2^e`.
    pub fn pow2(e: i64) -> Self {
        Dyadic { mant: BigInt::one(), exp: e }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.mant.is_positive()
    }

    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Self {
        Dyadic { mant: self.mant.abs(), exp: self.exp }
    }

    /// Multiply by `2^e`.
    pub fn shl(&self, e: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        Dyadic { mant: self.mant.clone(), exp: self.exp + e }
    }

    /// Largest `n` with `2^n <= |self|`; `None` for zero.
    pub fn floor_log2(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.mant.bits() as i64 - 1 + self.exp)
        }
    }

    /// Round down to a multiple of `2^-w`.
    pub fn floor_to(&self, w: i64) -> Self {
        if self.exp >= -w {
            return self.clone();
        }
        let shift = (-w - self.exp) as usize;
        // floor division by 2^shift (arithmetic shift floors for negatives)
        let m = &self.mant >> shift;
        Dyadic::new(m, -w)
    }

    /// Round up to a multiple of `2^-w`.
    pub fn ceil_to(&self, w: i64) -> Self {
        if self.exp >= -w {
            return self.clone();
        }
        let shift = (-w - self.exp) as usize;
        let floor = &self.mant >> shift;
        let exact = &floor << shift == self.mant;
        let m = if exact { floor } else { floor + 1 };
        Dyadic::new(m, -w)
    }

    pub fn floor_rational(q: &BigRational, w: i64) -> Self {
        if let Some(d) = Dyadic::from_rational_exact(q) {
            if d.exp >= -w {
                return d;
            }
        }
        let scaled = scale_pow2(q.numer(), w);
        let (quo, _) = scaled.div_mod_floor(q.denom());
        Dyadic::new(quo, -w)
    }

    pub fn ceil_rational(q: &BigRational, w: i64) -> Self {
        -Dyadic::floor_rational(&-q, w)
    }

    /// Exact conversion when the denominator is a power of two.
    pub fn from_rational_exact(q: &BigRational) -> Option<Self> {
        let den = q.denom();
        if den.is_zero() {
            return None;
        }
        let tz = den.trailing_zeros().unwrap_or(0);
        if (den >> tz as usize).is_one() {
            Some(Dyadic::new(q.numer().clone(), -(tz as i64)))
        } else {
            None
        }
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mant << self.exp as usize)
        } else {
            BigRational::new(self.mant.clone(), BigInt::one() << (-self.exp) as usize)
        }
    }

    pub fn to_f64(&self) -> f64 {
        let bits = self.mant.bits() as i64;
        if bits > 60 {
            let drop = (bits - 60) as usize;
            let m = (&self.mant >> drop).to_f64().unwrap_or(f64::NAN);
            m * 2f64.powi((self.exp + drop as i64) as i32)
        } else {
            self.mant.to_f64().unwrap_or(f64::NAN) * 2f64.powi(self.exp as i32)
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Midpoint of two dyadics, exact.
    pub fn midpoint(a: &Dyadic, b: &Dyadic) -> Dyadic {
        (a + b).shl(-1)
    }
}

fn scale_pow2(n: &BigInt, w: i64) -> BigInt {
    if w >= 0 {
        n << w as usize
    } else {
        // floor toward -inf keeps the later floor division conservative
        n >> (-w) as usize
    }
}

fn align(a: &Dyadic, b: &Dyadic) -> (BigInt, BigInt, i64) {
    let e = a.exp.min(b.exp);
    let am = &a.mant << (a.exp - e) as usize;
    let bm = &b.mant << (b.exp - e) as usize;
    (am, bm, e)
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = align(self, other);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'a> Add<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let (a, b, e) = align(self, rhs);
        Dyadic::new(a + b, e)
    }
}

impl<'a> Sub<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        if rhs.is_zero() {
            return self.clone();
        }
        let (a, b, e) = align(self, rhs);
        Dyadic::new(a - b, e)
    }
}

impl<'a> Mul<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() || rhs.is_zero() {
            return Dyadic::zero();
        }
        Dyadic::new(&self.mant * &rhs.mant, self.exp + rhs.exp)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        &self + &rhs
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Dyadic) -> Dyadic {
        &self - &rhs
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: Dyadic) -> Dyadic {
        &self * &rhs
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { mant: -self.mant, exp: self.exp }
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { mant: -&self.mant, exp: self.exp }
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = self.to_rational();
        if q.is_integer() {
            write!(f, "{}", q.numer())
        } else {
            write!(f, "{}/{}", q.numer(), q.denom())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn rounding_brackets_rational() {
        let third = q(1, 3);
        let lo = Dyadic::floor_rational(&third, 10);
        let hi = Dyadic::ceil_rational(&third, 10);
        assert!(lo.to_rational() <= third && third <= hi.to_rational());
        assert_eq!(&hi - &lo, Dyadic::pow2(-10));
        let neg = q(-1, 3);
        let lo = Dyadic::floor_rational(&neg, 4);
        let hi = Dyadic::ceil_rational(&neg, 4);
        assert!(lo.to_rational() <= neg && neg <= hi.to_rational());
    }

    #[test]
    fn exact_dyadic_roundtrip() {
        let d = Dyadic::from_rational_exact(&q(3, 8)).unwrap();
        assert_eq!(d.to_rational(), q(3, 8));
        assert!(Dyadic::from_rational_exact(&q(1, 3)).is_none());
        assert_eq!(Dyadic::floor_rational(&q(3, 8), 1).to_rational(), q(0, 1));
        assert_eq!(Dyadic::ceil_rational(&q(3, 8), 1).to_rational(), q(1, 2));
    }

    #[test]
    fn ordering_and_arithmetic() {
        let a = Dyadic::new(3.into(), -2);
        let b = Dyadic::new(1.into(), -1);
        assert!(a > b);
        assert_eq!((&a - &b).to_rational(), q(1, 4));
        assert_eq!((&a * &b).to_rational(), q(3, 8));
        assert_eq!(a.floor_log2(), Some(-1));
        assert_eq!(a.floor_to(1).to_rational(), q(1, 2));
        assert_eq!(a.ceil_to(1).to_rational(), q(1, 1));
        assert_eq!((-a.clone()).floor_to(1).to_rational(), q(-1, 1));
    }
}
