//! The exponent `p >= 1` of the space.

use std::fmt;

use num_rational::BigRational;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::creal::CReal;
use super::dyadic::Dyadic;
use super::interval::DyadicInterval;
use super::rational::{format_rational, parse_rational, rat_int};
use super::transcendental::as_natural;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub enum PExponent {
    Rational(BigRational),
    /// A computable real certified to be at least 1 when constructed.
    Real(CReal),
}

impl PExponent {
    pub fn rational(q: BigRational) -> Result<Self> {
        if q < rat_int(1) {
            return Err(Error::InvalidInput(format!("exponent {} is below 1", format_rational(&q))));
        }
        Ok(PExponent::Rational(q))
    }

    pub fn from_ratio(n: i64, d: i64) -> Result<Self> {
        Self::rational(BigRational::new(n.into(), d.into()))
    }

    pub fn int(n: i64) -> Self {
        Self::from_ratio(n, 1).expect("integer exponent >= 1")
    }

    /// Accepts a real whose enclosure at precision `k` certifies `p >= 1`.
    pub fn real(x: CReal, k: i64) -> Result<Self> {
        if x.enclosure(k).lo() < &Dyadic::one() {
            return Err(Error::InvalidInput(format!("cannot certify {} >= 1", x.label())));
        }
        Ok(PExponent::Real(x))
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::rational(parse_rational(s)?)
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            PExponent::Rational(q) => Some(q),
            PExponent::Real(_) => None,
        }
    }

    /// `Some(n)` when `p` is a known natural number.
    pub fn as_natural(&self) -> Option<u32> {
        self.as_rational().and_then(as_natural)
    }

    /// Enclosure of `p`, width about `2^-w`.
    pub fn enclosure(&self, w: i64) -> DyadicInterval {
        match self {
            PExponent::Rational(q) => DyadicInterval::from_rational(q, w),
            PExponent::Real(x) => x.enclosure(w),
        }
    }

    /// Enclosure of `1/p`.
    pub fn recip_enclosure(&self, w: i64) -> DyadicInterval {
        match self {
            PExponent::Rational(q) => DyadicInterval::from_rational(&q.recip(), w),
            PExponent::Real(x) => x.enclosure(w + 2).recip(w).expect("p >= 1"),
        }
    }

    /// Compare with 2: `Some(Less)`/`Some(Greater)` once separated at precision `w`.
    pub fn cmp_two(&self, w: i64) -> Option<std::cmp::Ordering> {
        use std::cmp::Ordering;
        match self {
            PExponent::Rational(q) => Some(q.cmp(&rat_int(2))),
            PExponent::Real(_) => {
                let e = self.enclosure(w);
                let two = Dyadic::from_int(2);
                if e.hi() < &two {
                    Some(Ordering::Less)
                } else if e.lo() > &two {
                    Some(Ordering::Greater)
                } else {
                    None
                }
            }
        }
    }

    pub fn approx_f64(&self) -> f64 {
        self.enclosure(60).mid_f64()
    }
}

impl fmt::Display for PExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PExponent::Rational(q) => write!(f, "{}", format_rational(q)),
            PExponent::Real(x) => write!(f, "{}", x.label()),
        }
    }
}

impl PartialEq for PExponent {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (PExponent::Rational(a), PExponent::Rational(b)) => a == b,
            _ => false,
        }
    }
}

impl Serialize for PExponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PExponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        PExponent::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cmp::Ordering;

    #[test]
    fn validation_and_comparison() {
        assert!(PExponent::from_ratio(1, 2).is_err());
        let p = PExponent::parse("3/2").unwrap();
        assert_eq!(p.cmp_two(10), Some(Ordering::Less));
        assert_eq!(PExponent::int(4).as_natural(), Some(4));
        assert_eq!(p.as_natural(), None);
        let s = PExponent::real(CReal::sqrt(rat_int(5)), 10).unwrap();
        assert_eq!(s.cmp_two(10), Some(Ordering::Greater));
    }
}
