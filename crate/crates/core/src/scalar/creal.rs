//! Computable reals given by a rational approximation oracle.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;

use super::dyadic::Dyadic;
use super::interval::DyadicInterval;
use super::transcendental::refine;

type Approx = Arc<dyn Fn(i64) -> BigRational + Send + Sync>;

/// A real `x` given by `k -> q` with `|q - x| < 2^-k`. The oracle must be pure.
#[derive(Clone)]
pub struct CReal {
    approx: Approx,
    label: Arc<str>,
}

impl CReal {
    pub fn from_fn<F>(label: &str, f: F) -> Self
    where
        F: Fn(i64) -> BigRational + Send + Sync + 'static,
    {
        CReal { approx: Arc::new(f), label: label.into() }
    }

    pub fn constant(q: BigRational) -> Self {
        let label = super::rational::format_rational(&q);
        CReal::from_fn(&label, move |_| q.clone())
    }

    /// A real known through enclosures `w -> I(w)` whose widths shrink with `w`.
    pub fn from_enclosure<F>(label: &str, f: F) -> Self
    where
        F: Fn(i64) -> DyadicInterval + Send + Sync + 'static,
    {
        CReal::from_fn(label, move |k| refine(k + 1, &f).mid().to_rational())
    }

    /// `sqrt(q)` for `q >= 0` by integer square roots.
    pub fn sqrt(q: BigRational) -> Self {
        assert!(!q.is_negative(), "sqrt of a negative rational");
        let label = format!("sqrt({})", super::rational::format_rational(&q));
        CReal::from_fn(&label, move |k| {
            let s = k.max(0) + 1;
            let scaled = q.clone() * BigRational::from_integer(BigInt::from(1) << (2 * s) as usize);
            let r = scaled.floor().to_integer().sqrt();
            BigRational::new(r, BigInt::from(1) << s as usize)
        })
    }

    /// `q` with `|q - x| < 2^-k`.
    pub fn approx(&self, k: i64) -> BigRational {
        (self.approx)(k)
    }

    /// An enclosure of `x` of width at most `2^-(k-1)`.
    pub fn enclosure(&self, k: i64) -> DyadicInterval {
        let q = self.approx(k + 1);
        let r = Dyadic::pow2(-(k + 1));
        DyadicInterval::from_rational(&q, k + 4).widen(&r)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for CReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CReal({})", self.label)
    }
}

/// Largest-to-date approximation at precision `k` of a real, as an `f64` preview.
pub fn preview(x: &CReal) -> f64 {
    let q = x.approx(60);
    Dyadic::floor_rational(&q, 80).to_f64()
}
