//! `|z|^p`, the Lamperti functionals `sigma_1`, `sigma = c_p sigma_1` and the objective `f_p`.

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::{One, Signed};

use super::dyadic::Dyadic;
use super::exponent::PExponent;
use super::interval::DyadicInterval;
use super::rational::{rat_int, GaussianRational};
use super::transcendental::{pow_iv, rational_powi, refine, sincos_pi, sqrt_iv};
use crate::error::{Error, Result};

const MAX_SEPARATION_PRECISION: i64 = 1024;

/// Like [`refine`] for evaluators that can fail.
pub fn refine_fallible<F>(k: i64, f: F) -> Result<DyadicInterval>
where
    F: Fn(i64) -> Result<DyadicInterval>,
{
    let mut w = k.max(0) + 16;
    loop {
        let iv = f(w)?;
        if iv.width_at_most(k + 1) {
            return Ok(iv.round_out(k + 2));
        }
        if w >= super::transcendental::MAX_WORKING_PRECISION {
            return Ok(iv);
        }
        w *= 2;
    }
}

/// `m^(p/2)` for an enclosure `m` of a squared modulus.
pub fn modsq_pow_w(m: &DyadicInterval, p: &PExponent, w: i64) -> DyadicInterval {
    let m = m.clamp_nonneg();
    if m.hi().is_zero() {
        return DyadicInterval::zero();
    }
    if m.is_point() && *m.lo() == Dyadic::one() {
        return DyadicInterval::one();
    }
    if let Some(n) = p.as_natural() {
        if n % 2 == 0 {
            return m.powi(n / 2);
        }
        if n == 1 {
            return sqrt_iv(&m, w + 2);
        }
    }
    let half_p = p.enclosure(w + 8).scale_pow2(-1);
    pow_iv(&m, &half_p, w)
}

/// `|z|^p` at working precision `w`.
pub fn abs_pow_w(z: &GaussianRational, p: &PExponent, w: i64) -> DyadicInterval {
    if z.is_zero() {
        return DyadicInterval::zero();
    }
    let n2 = z.norm_sqr();
    if n2.is_one() {
        return DyadicInterval::one();
    }
    if let Some(n) = p.as_natural() {
        if z.is_real() {
            return DyadicInterval::from_rational(&rational_powi(&z.re.abs(), n), w);
        }
        if n % 2 == 0 {
            return DyadicInterval::from_rational(&rational_powi(&n2, n / 2), w);
        }
    }
    if z.is_real() && p.as_rational().is_some_and(|q| q.is_one()) {
        return DyadicInterval::from_rational(&z.re.abs(), w);
    }
    let m = DyadicInterval::from_rational(&n2, 2 * w + 8);
    modsq_pow_w(&m, p, w)
}

/// Enclosure of `|z|^p` of width at most `2^-k`.
pub fn abs_pow(z: &GaussianRational, p: &PExponent, k: i64) -> DyadicInterval {
    refine(k, |w| abs_pow_w(z, p, w))
}

/// `|2(a + b) - (c + d)|` for the four powers `|z|^p, |w|^p, |z-w|^p, |z+w|^p`.
pub fn sigma1_from_parts(a: &DyadicInterval, b: &DyadicInterval, c: &DyadicInterval, d: &DyadicInterval) -> DyadicInterval {
    (&(a + b).scale_pow2(1) - &(c + d)).abs()
}

/// `2(a + b) - (c + d)` without the absolute value.
pub fn lamperti_defect_from_parts(
    a: &DyadicInterval,
    b: &DyadicInterval,
    c: &DyadicInterval,
    d: &DyadicInterval,
) -> DyadicInterval {
    &(a + b).scale_pow2(1) - &(c + d)
}

fn scalar_parts(z: &GaussianRational, v: &GaussianRational, p: &PExponent, w: i64) -> [DyadicInterval; 4] {
    [
        abs_pow_w(z, p, w),
        abs_pow_w(v, p, w),
        abs_pow_w(&(z - v), p, w),
        abs_pow_w(&(z + v), p, w),
    ]
}

pub fn sigma1_scalar_w(z: &GaussianRational, v: &GaussianRational, p: &PExponent, w: i64) -> DyadicInterval {
    let [a, b, c, d] = scalar_parts(z, v, p, w);
    sigma1_from_parts(&a, &b, &c, &d)
}

pub fn sigma1_scalar(z: &GaussianRational, v: &GaussianRational, p: &PExponent, k: i64) -> DyadicInterval {
    refine(k, |w| sigma1_scalar_w(z, v, p, w))
}

/// `2|z|^p + 2|w|^p - |z+w|^p - |z-w|^p`.
pub fn lamperti_defect(z: &GaussianRational, v: &GaussianRational, p: &PExponent, k: i64) -> DyadicInterval {
    refine(k, |w| {
        let [a, b, c, d] = scalar_parts(z, v, p, w);
        lamperti_defect_from_parts(&a, &b, &c, &d)
    })
}

/// Enclosure of `c_p` at working precision `w`, `None` while `4 - 2 sqrt(2)^p` still meets 0.
pub fn lamperti_constant_w(p: &PExponent, w: i64) -> Option<DyadicInterval> {
    if p.as_rational().is_some_and(|q| *q == rat_int(2)) {
        return None;
    }
    let two_half_p = modsq_pow_w(&DyadicInterval::from_int(2), p, w + 8);
    let den = (&DyadicInterval::from_int(4) - &two_half_p.scale_pow2(1)).abs();
    den.recip(w)
}

/// Enclosure of `c_p = |4 - 2 sqrt(2)^p|^-1` of width at most `2^-k`.
pub fn lamperti_constant(p: &PExponent, k: i64) -> Result<DyadicInterval> {
    separated(p, k)?;
    refine_fallible(k, |w| lamperti_constant_w(p, w).ok_or(Error::PEqualsTwo))
}

/// Fails with `PEqualsTwo` unless `p` is certified different from 2.
pub fn separated(p: &PExponent, k: i64) -> Result<Ordering> {
    let mut w = k.max(0) + 16;
    loop {
        match p.cmp_two(w) {
            Some(Ordering::Equal) => return Err(Error::PEqualsTwo),
            Some(o) => return Ok(o),
            None if w >= MAX_SEPARATION_PRECISION => return Err(Error::PEqualsTwo),
            None => w *= 2,
        }
    }
}

/// `sigma(z, w) = c_p sigma_1(z, w)` at working precision `w`.
pub fn sigma_scalar_w(z: &GaussianRational, v: &GaussianRational, p: &PExponent, w: i64) -> Result<DyadicInterval> {
    let c = lamperti_constant_w(p, w + 4).ok_or(Error::PEqualsTwo)?;
    Ok(&c * &sigma1_scalar_w(z, v, p, w + 4))
}

pub fn sigma_scalar(z: &GaussianRational, v: &GaussianRational, p: &PExponent, k: i64) -> Result<DyadicInterval> {
    separated(p, k)?;
    refine_fallible(k, |w| sigma_scalar_w(z, v, p, w))
}

/// `f_p(theta, t)` with `theta = theta_over_pi * pi`; the sign is flipped for `p > 2`.
pub fn lamperti_objective(theta_over_pi: &BigRational, t: &BigRational, p: &PExponent, k: i64) -> Result<DyadicInterval> {
    if *t < rat_int(1) {
        return Err(Error::InvalidInput("the objective is defined for t >= 1".into()));
    }
    let side = separated(p, k)?;
    let tz = GaussianRational::real(t.clone());
    Ok(refine(k, |w| {
        let (_, cos) = sincos_pi(theta_over_pi, w + 8);
        let tt = DyadicInterval::from_rational(t, w + 8);
        let tc2 = (&tt * &cos).scale_pow2(1);
        let t2 = DyadicInterval::from_rational(&(t * t), w + 8);
        let base = &DyadicInterval::one() + &t2;
        let plus = modsq_pow_w(&(&base + &tc2), p, w + 4);
        let minus = modsq_pow_w(&(&base - &tc2), p, w + 4);
        let tp = abs_pow_w(&tz, p, w + 4);
        let two = DyadicInterval::from_int(2);
        let val = &(&two + &tp.scale_pow2(1)) - &(&plus + &minus);
        if side == Ordering::Greater {
            -val
        } else {
            val
        }
    }))
}

/// `min(|z|^p, |w|^p)`.
pub fn min_pow(z: &GaussianRational, v: &GaussianRational, p: &PExponent, k: i64) -> DyadicInterval {
    abs_pow(z, p, k).min(&abs_pow(v, p, k))
}
