//! The presentation `F` built from a c.e. set `C`:
//! `f_0 = (1 - gamma)^{1/p} e_0 + sum_n 2^{-c_n/p} e_{n+1}` and `f_{n+1} = e_{n+1}`.
//!
//! The norm oracle never needs gamma: with
//! `E_j = |a_0 2^{-c_{j-1}/p} + a_j|^p - |a_0|^p 2^{-c_{j-1}}` one has
//! `||sum a_j f_j||^p = |a_0|^p + sum_j E_j`, a finite computation.

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::ce::CeSet;
use super::descriptor::PresentationDescriptor;
use super::{norm_approx, relabel, Presentation};
use crate::error::{Error, Result};
use crate::scalar::sigma::{abs_pow_w, modsq_pow_w};
use crate::scalar::transcendental::pow_iv;
use crate::scalar::{Dyadic, DyadicInterval, GaussianRational, PExponent};
use crate::vectors::{FinSuppVector, GenCombo, NormSpace};

#[derive(Clone, Debug)]
pub struct Adversarial {
    p: PExponent,
    ce: CeSet,
}

/// Enclosure of `2^{-c/p}`.
pub fn two_pow_neg_over_p(c: u64, p: &PExponent, w: i64) -> DyadicInterval {
    if c == 0 {
        return DyadicInterval::one();
    }
    if let Some(n) = p.as_natural() {
        if c % n as u64 == 0 {
            return DyadicInterval::point(Dyadic::pow2(-((c / n as u64) as i64)));
        }
    }
    let e = &p.recip_enclosure(w + 16) * &DyadicInterval::from_int(c as i64);
    pow_iv(&DyadicInterval::point(Dyadic::pow2(-1)), &e, w)
}

impl Adversarial {
    pub fn new(ce: CeSet, p: PExponent) -> Self {
        Adversarial { p, ce }
    }

    pub fn ce(&self) -> &CeSet {
        &self.ce
    }

    pub fn p(&self) -> &PExponent {
        &self.p
    }

    /// A rational within `2^-k` of `||sum a_j f_j||`. With `strict`, fails when some `a_j`
    /// (`j >= 1`) needs `c_{j-1}` and the set has fewer elements.
    pub fn adversarial_norm(&self, coeffs: &GenCombo, k: i64, strict: bool) -> Result<BigRational> {
        if strict && !coeffs.get(0).is_zero() {
            let len = self.ce.len().unwrap_or(usize::MAX);
            if let Some(j) = coeffs.max_index() {
                if j >= 1 && (j - 1) as usize >= len {
                    return Err(Error::EnumerationStalled {
                        needed: j as usize,
                        found: len,
                        stage: self.ce.final_stage().unwrap_or(0),
                    });
                }
            }
        }
        Ok(norm_approx(self, coeffs, k))
    }

    /// Number of enumerated elements whose `f_0` tail must be kept so that the dropped part of
    /// `a_0 f_0` has norm below `2^-(k+1)`.
    fn tail_cutoff(&self, a0: &GaussianRational, min: usize, k: i64) -> usize {
        if let Some(len) = self.ce.len() {
            return len.max(min);
        }
        let a0_abs = crate::scalar::transcendental::sqrt_iv(&DyadicInterval::from_rational(&a0.norm_sqr(), 64), 32);
        let target = Dyadic::pow2(-(k + 1));
        let mut n = min;
        loop {
            let tail = DyadicInterval::from_rational(&self.ce.tail_mass(n), k + 40);
            let root = pow_iv(&tail, &self.p.recip_enclosure(k + 40), k + 40);
            if (a0_abs.hi() * root.hi()) < target {
                return n;
            }
            n += 1;
        }
    }
}

fn affine(a: &BigRational, x: &DyadicInterval, b: &BigRational, w: i64) -> DyadicInterval {
    &(&DyadicInterval::from_rational(a, w) * x) + &DyadicInterval::from_rational(b, w)
}

impl NormSpace<GenCombo> for Adversarial {
    fn exponent(&self) -> &PExponent {
        &self.p
    }

    fn norm_pow_w(&self, v: &GenCombo, w: i64) -> DyadicInterval {
        let a0 = v.get(0);
        let wp = w + 4 + (64 - (v.support_len() as u64).leading_zeros() as i64);
        if a0.is_zero() {
            return v.iter().map(|(_, z)| abs_pow_w(z, &self.p, wp)).sum();
        }
        let a0p = abs_pow_w(&a0, &self.p, wp + 8);
        let a0sq = a0.norm_sqr();
        let mut acc = a0p.clone();
        for (j, aj) in v.iter().filter(|(j, _)| *j >= 1) {
            let term = match self.ce.nth((j - 1) as usize) {
                None => abs_pow_w(aj, &self.p, wp),
                Some(c) => {
                    let x = two_pow_neg_over_p(c, &self.p, 2 * wp + 16);
                    let cross = (&a0 * &aj.conj()).re;
                    let x2 = x.sqr();
                    let m2 = &(&(&DyadicInterval::from_rational(&a0sq, 2 * wp + 16) * &x2)
                        + &(&DyadicInterval::from_rational(&cross, 2 * wp + 16) * &x).scale_pow2(1))
                        + &DyadicInterval::from_rational(&aj.norm_sqr(), 2 * wp + 16);
                    let pow = modsq_pow_w(&m2, &self.p, wp);
                    &pow - &a0p.scale_pow2(-(c as i64))
                }
            };
            acc = &acc + &term;
        }
        acc.clamp_nonneg()
    }
}

impl Presentation for Adversarial {
    fn name(&self) -> String {
        format!("F (p = {}, C = {:?})", self.p, self.ce.spec())
    }

    fn descriptor(&self) -> PresentationDescriptor {
        PresentationDescriptor::Adversarial { p: Some(self.p.to_string()), ce: self.ce.spec().clone() }
    }

    fn transparent_eval(&self, f: &GenCombo, k: i64) -> Result<FinSuppVector> {
        let a0 = f.get(0);
        if a0.is_zero() {
            return Ok(relabel(f));
        }
        let m = f.max_index().unwrap_or(0) as usize;
        let n_tail = self.tail_cutoff(&a0, m, k);
        let count = 1 + m.max(n_tail);
        let d = k + 4 + (64 - (count as u64).leading_zeros() as i64);
        let one_minus_gamma = BigRational::one() - self.ce.gamma();
        let mut w = d + 16;
        loop {
            let mut coords: Vec<(u64, DyadicInterval, DyadicInterval)> = Vec::with_capacity(count);
            let r = pow_iv(
                &DyadicInterval::from_rational(&one_minus_gamma, 2 * w),
                &self.p.recip_enclosure(w + 8),
                w,
            );
            let zero = BigRational::zero();
            coords.push((0, affine(&a0.re, &r, &zero, w), affine(&a0.im, &r, &zero, w)));
            for j in 1..count as u64 {
                let aj = f.get(j);
                let c = if (j as usize) <= n_tail { self.ce.nth((j - 1) as usize) } else { None };
                if let Some(c) = c {
                    let x = two_pow_neg_over_p(c, &self.p, w);
                    coords.push((j, affine(&a0.re, &x, &aj.re, w), affine(&a0.im, &x, &aj.im, w)));
                } else if !aj.is_zero() {
                    coords.push((
                        j,
                        DyadicInterval::from_rational(&aj.re, w),
                        DyadicInterval::from_rational(&aj.im, w),
                    ));
                }
            }
            let limit = Dyadic::pow2(-d);
            if coords.iter().all(|(_, re, im)| re.width() <= limit && im.width() <= limit) {
                return Ok(FinSuppVector::from_pairs(coords.into_iter().map(|(j, re, im)| {
                    (j, GaussianRational::new(re.mid().to_rational(), im.mid().to_rational()))
                })));
            }
            if w > crate::scalar::transcendental::MAX_WORKING_PRECISION {
                return Err(Error::BudgetExhausted("transparent evaluation precision".into()));
            }
            w *= 2;
        }
    }

    fn has_backdoor(&self) -> bool {
        true
    }
}
