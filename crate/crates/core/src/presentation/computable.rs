//! Vectors computable with respect to a presentation.

use std::fmt;
use std::sync::Arc;

use crate::scalar::GaussianRational;
use crate::vectors::GenCombo;

type Approx = Arc<dyn Fn(i64) -> GenCombo + Send + Sync>;

/// `k -> g_k` with `||target - g_k|| < 2^-k`. The approximator must be pure.
#[derive(Clone)]
pub struct ComputableVector {
    approx: Approx,
    label: Arc<str>,
}

impl ComputableVector {
    pub fn from_fn<F>(label: &str, f: F) -> Self
    where
        F: Fn(i64) -> GenCombo + Send + Sync + 'static,
    {
        ComputableVector { approx: Arc::new(f), label: label.into() }
    }

    pub fn constant(g: GenCombo) -> Self {
        let label = g.to_string();
        ComputableVector::from_fn(&label, move |_| g.clone())
    }

    pub fn approx(&self, k: i64) -> GenCombo {
        (self.approx)(k)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn add(&self, other: &ComputableVector) -> ComputableVector {
        let (a, b) = (self.clone(), other.clone());
        let label = format!("{} + {}", a.label, b.label);
        ComputableVector::from_fn(&label, move |k| &a.approx(k + 1) + &b.approx(k + 1))
    }

    pub fn sub(&self, other: &ComputableVector) -> ComputableVector {
        let (a, b) = (self.clone(), other.clone());
        let label = format!("{} - {}", a.label, b.label);
        ComputableVector::from_fn(&label, move |k| &a.approx(k + 1) - &b.approx(k + 1))
    }

    /// `z * v`.
    pub fn scale(&self, z: &GaussianRational) -> ComputableVector {
        let a = self.clone();
        let z = z.clone();
        // |z| <= 2^bits keeps the error of the scaled approximation below 2^-k
        let bits = bit_bound(&z);
        let label = format!("({z}) * ({})", a.label);
        ComputableVector::from_fn(&label, move |k| a.approx(k + bits).scale(&z))
    }
}

/// Some `b >= 0` with `|z| <= 2^b`.
pub fn bit_bound(z: &GaussianRational) -> i64 {
    let n2 = z.norm_sqr();
    let num_bits = n2.numer().bits() as i64;
    let den_bits = n2.denom().bits() as i64;
    ((num_bits - den_bits + 2) / 2 + 1).max(0)
}

impl fmt::Debug for ComputableVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComputableVector({})", self.label)
    }
}

/// `sum_{n >= 0} 2^-n e_n` over the standard basis; for any `p >= 1` truncating after
/// `n = k + 1` leaves a tail of norm at most `2^-(k+1)`.
pub fn tail_series() -> ComputableVector {
    ComputableVector::from_fn("sum 2^-n e_n", |k| {
        let last = (k + 1).max(0) as u64;
        GenCombo::from_pairs((0..=last).map(|n| (n, GaussianRational::real(crate::scalar::rational::rat_pow2(-(n as i64))))))
    })
}

/// The vector `v` itself, approximated at precision `k`.
pub fn vector_approx(v: &ComputableVector, k: i64) -> GenCombo {
    v.approx(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::Standard;
    use crate::scalar::{Dyadic, PExponent};
    use crate::vectors::norm;

    #[test]
    fn constant_and_tail() {
        let g = GenCombo::unit(2);
        let v = ComputableVector::constant(g.clone());
        assert_eq!(vector_approx(&v, 0), g);
        assert_eq!(vector_approx(&v, 40), g);
        let t = tail_series();
        let e = Standard::new(PExponent::int(1));
        // full sum has norm 2; truncation error sum_{n > k+1} 2^-n = 2^-(k+1)
        for k in [0, 3, 10] {
            let a = t.approx(k);
            let n = norm(&e, &a, 40);
            let err = &Dyadic::from_int(2) - n.lo();
            assert!(err < Dyadic::pow2(-k));
        }
        assert!(bit_bound(&GaussianRational::from_int(3)) >= 2);
    }
}
