//! Outward-rounded enclosures of exp, ln, sqrt, powers, pi and sin/cos of rational multiples of pi.
//!
//! Every function takes an absolute working precision `w` (bits after the binary point).
//! Results are always sound; their width is only roughly `2^-w`, so callers that need a
//! guaranteed width go through [`refine`].

use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::dyadic::Dyadic;
use super::interval::DyadicInterval;

pub const MAX_WORKING_PRECISION: i64 = 1 << 14;

/// Re-evaluate `f` at increasing working precision until the width is at most `2^-k`,
/// then round the endpoints onto the `2^-(k+2)` grid.
///
/// If the precision cap is reached the last (still sound) enclosure is returned.
pub fn refine<F>(k: i64, f: F) -> DyadicInterval
where
    F: Fn(i64) -> DyadicInterval,
{
    let mut w = k.max(0) + 16;
    loop {
        let iv = f(w);
        if iv.width_at_most(k + 1) {
            return iv.round_out(k + 2);
        }
        if w >= MAX_WORKING_PRECISION {
            return iv;
        }
        w *= 2;
    }
}

fn div_int_floor(d: &Dyadic, n: u64, w: i64) -> Dyadic {
    let shift = d.exponent() + w;
    let m = if shift >= 0 {
        d.mantissa() << shift as usize
    } else {
        d.mantissa() >> (-shift) as usize
    };
    Dyadic::new(m.div_floor(&BigInt::from(n)), -w)
}

fn div_int_ceil(d: &Dyadic, n: u64, w: i64) -> Dyadic {
    -div_int_floor(&-d, n, w)
}

/// `x / n` rounded outward to the `2^-w` grid.
pub fn div_int(x: &DyadicInterval, n: u64, w: i64) -> DyadicInterval {
    DyadicInterval::new(div_int_floor(x.lo(), n, w), div_int_ceil(x.hi(), n, w))
}

fn mag_bound(x: &DyadicInterval) -> Dyadic {
    x.lo().abs().max(x.hi().abs())
}

fn widen_mag(x: &DyadicInterval, r: &DyadicInterval) -> DyadicInterval {
    x.widen(&mag_bound(r))
}

/// exp(x) for a point `x`.
pub fn exp_point(x: &Dyadic, w: i64) -> DyadicInterval {
    if x.is_zero() {
        return DyadicInterval::one();
    }
    let lg = x.floor_log2().unwrap_or(0);
    let s = (lg + 11).max(0);
    let r = x.shl(-s);
    let mag_bits = if x.is_positive() { (x.to_f64() * std::f64::consts::LOG2_E).ceil() as i64 + 1 } else { 0 };
    let wp = w.max(0) + s + mag_bits + 16;
    let rp = DyadicInterval::point(r);
    let mut sum = DyadicInterval::one();
    let mut term = DyadicInterval::one();
    let mut n = 1u64;
    loop {
        term = div_int(&(&term * &rp), n, wp);
        sum = &sum + &term;
        n += 1;
        if mag_bound(&term) <= Dyadic::pow2(-wp) {
            break;
        }
    }
    // tail after the last term is dominated by a geometric series with ratio < 2^-10
    sum = widen_mag(&sum, &term);
    for _ in 0..s {
        sum = sum.sqr().round_out(wp);
    }
    sum
}

pub fn exp_iv(x: &DyadicInterval, w: i64) -> DyadicInterval {
    if x.is_point() {
        return exp_point(x.lo(), w);
    }
    DyadicInterval::new(exp_point(x.lo(), w).lo().clone(), exp_point(x.hi(), w).hi().clone())
}

/// atanh(y) for a point `|y| <= 1/3`.
fn atanh_point(y: &Dyadic, wp: i64) -> DyadicInterval {
    if y.is_zero() {
        return DyadicInterval::zero();
    }
    let yp = DyadicInterval::point(y.clone());
    let y2 = yp.sqr().round_out(wp + 4);
    let mut pow = yp.clone();
    let mut sum = yp;
    let mut n = 1u64;
    loop {
        pow = (&pow * &y2).round_out(wp + 4);
        let term = div_int(&pow, 2 * n + 1, wp + 4);
        sum = &sum + &term;
        n += 1;
        if mag_bound(&pow) <= Dyadic::pow2(-wp - 4) {
            break;
        }
    }
    // remaining terms sum to at most |pow| * y^2 / (1 - y^2) <= |pow|
    widen_mag(&sum, &pow)
}

fn atanh_iv(y: &DyadicInterval, wp: i64) -> DyadicInterval {
    DyadicInterval::new(atanh_point(y.lo(), wp).lo().clone(), atanh_point(y.hi(), wp).hi().clone())
}

struct ConstCache(Mutex<Option<(i64, DyadicInterval)>>);

impl ConstCache {
    fn get(&self, w: i64, compute: impl Fn(i64) -> DyadicInterval) -> DyadicInterval {
        let mut guard = self.0.lock().unwrap_or_else(|e| e.into_inner());
        if let Some((cw, iv)) = guard.as_ref() {
            if *cw >= w {
                return iv.round_out(w + 2);
            }
        }
        let cw = ((w + 2).max(64) as u64).next_power_of_two() as i64;
        let iv = compute(cw);
        *guard = Some((cw, iv.clone()));
        iv.round_out(w + 2)
    }
}

fn ln2_cache() -> &'static ConstCache {
    static C: OnceLock<ConstCache> = OnceLock::new();
    C.get_or_init(|| ConstCache(Mutex::new(None)))
}

fn pi_cache() -> &'static ConstCache {
    static C: OnceLock<ConstCache> = OnceLock::new();
    C.get_or_init(|| ConstCache(Mutex::new(None)))
}

/// ln 2 = 2 atanh(1/3).
pub fn ln2(w: i64) -> DyadicInterval {
    ln2_cache().get(w, |wp| {
        let third = DyadicInterval::from_rational(&BigRational::new(1.into(), 3.into()), wp + 8);
        atanh_iv(&third, wp + 8).scale_pow2(1)
    })
}

fn atan_point(x: &Dyadic, wp: i64) -> DyadicInterval {
    let xp = DyadicInterval::point(x.clone());
    let x2 = xp.sqr().round_out(wp + 4);
    let mut pow = xp.clone();
    let mut sum = xp;
    let mut n = 1u64;
    loop {
        pow = (&pow * &x2).round_out(wp + 4);
        let term = div_int(&pow, 2 * n + 1, wp + 4);
        sum = if n % 2 == 1 { &sum - &term } else { &sum + &term };
        n += 1;
        if mag_bound(&pow) <= Dyadic::pow2(-wp - 4) {
            break;
        }
    }
    widen_mag(&sum, &pow)
}

/// pi = 16 atan(1/5) - 4 atan(1/239).
pub fn pi(w: i64) -> DyadicInterval {
    pi_cache().get(w, |wp| {
        let at = |d: i64| {
            let x = DyadicInterval::from_rational(&BigRational::new(1.into(), d.into()), wp + 10);
            DyadicInterval::new(atan_point(x.lo(), wp + 10).lo().clone(), atan_point(x.hi(), wp + 10).hi().clone())
        };
        &at(5).scale_pow2(4) - &at(239).scale_pow2(2)
    })
}

/// ln(x) for a point `x > 0`.
pub fn ln_point(x: &Dyadic, w: i64) -> DyadicInterval {
    assert!(x.is_positive(), "ln of a non-positive number");
    if *x == Dyadic::one() {
        return DyadicInterval::zero();
    }
    let mut e = x.floor_log2().unwrap_or(0);
    let mut m = x.shl(-e);
    if &m * &m > Dyadic::from_int(2) {
        m = m.shl(-1);
        e += 1;
    }
    let ebits = 64 - e.unsigned_abs().leading_zeros() as i64;
    let wp = w.max(0) + ebits + 8;
    let one = Dyadic::one();
    let num = DyadicInterval::point(&m - &one);
    let den = DyadicInterval::point(&m + &one);
    let y = num.div(&den, wp + 4).expect("m + 1 > 0");
    let lnm = atanh_iv(&y, wp).scale_pow2(1);
    let el = &ln2(wp) * &DyadicInterval::from_int(e);
    (&el + &lnm).round_out(wp)
}

/// ln(x) for an interval with positive lower end.
pub fn ln_iv(x: &DyadicInterval, w: i64) -> DyadicInterval {
    if x.is_point() {
        return ln_point(x.lo(), w);
    }
    DyadicInterval::new(ln_point(x.lo(), w).lo().clone(), ln_point(x.hi(), w).hi().clone())
}

fn isqrt_floor(d: &Dyadic, w: i64) -> Dyadic {
    if !d.is_positive() {
        return Dyadic::zero();
    }
    // floor(sqrt(d * 2^(2w))) * 2^-w
    let shift = d.exponent() + 2 * w;
    let m = if shift >= 0 {
        d.mantissa() << shift as usize
    } else {
        d.mantissa() >> (-shift) as usize
    };
    Dyadic::new(m.sqrt(), -w)
}

fn isqrt_ceil(d: &Dyadic, w: i64) -> Dyadic {
    let f = isqrt_floor(d, w);
    if &f * &f == *d {
        f
    } else {
        &f + &Dyadic::pow2(-w)
    }
}

pub fn sqrt_iv(x: &DyadicInterval, w: i64) -> DyadicInterval {
    DyadicInterval::new(isqrt_floor(x.lo(), w), isqrt_ceil(x.hi(), w))
}

/// `x^p` for `x >= 0` (negative parts are clamped) and `p > 0`.
pub fn pow_iv(x: &DyadicInterval, p: &DyadicInterval, w: i64) -> DyadicInterval {
    let x = x.clamp_nonneg();
    if x.hi().is_zero() {
        return DyadicInterval::zero();
    }
    let top = x.hi().to_f64().max(1.0).log2() * p.hi().to_f64().max(1.0);
    let wp = w.max(0) + top.ceil().max(0.0) as i64 + 12;
    let upper = {
        let prod = p * &ln_point(x.hi(), wp);
        exp_point(prod.hi(), wp).hi().clone()
    };
    let lower = if x.lo().is_positive() {
        let prod = p * &ln_point(x.lo(), wp);
        exp_point(prod.lo(), wp).lo().clone().max(Dyadic::zero())
    } else {
        Dyadic::zero()
    };
    DyadicInterval::new(lower, upper).round_out(w + 4)
}

fn sin_point(x: &Dyadic, wp: i64) -> DyadicInterval {
    let xp = DyadicInterval::point(x.clone());
    let x2 = xp.sqr().round_out(wp + 4);
    let mut term = xp.clone();
    let mut sum = xp;
    let mut n = 1u64;
    loop {
        term = div_int(&(&term * &x2).round_out(wp + 4), (2 * n) * (2 * n + 1), wp + 4);
        sum = if n % 2 == 1 { &sum - &term } else { &sum + &term };
        n += 1;
        if mag_bound(&term) <= Dyadic::pow2(-wp - 4) {
            break;
        }
    }
    widen_mag(&sum, &term)
}

fn cos_point(x: &Dyadic, wp: i64) -> DyadicInterval {
    let xp = DyadicInterval::point(x.clone());
    let x2 = xp.sqr().round_out(wp + 4);
    let mut term = DyadicInterval::one();
    let mut sum = DyadicInterval::one();
    let mut n = 1u64;
    loop {
        term = div_int(&(&term * &x2).round_out(wp + 4), (2 * n - 1) * (2 * n), wp + 4);
        sum = if n % 2 == 1 { &sum - &term } else { &sum + &term };
        n += 1;
        if mag_bound(&term) <= Dyadic::pow2(-wp - 4) {
            break;
        }
    }
    widen_mag(&sum, &term)
}

/// `(sin(t*pi), cos(t*pi))` for `t` in `[0, 1/4]`.
fn sincos_small(t: &BigRational, w: i64) -> (DyadicInterval, DyadicInterval) {
    if t.is_zero() {
        return (DyadicInterval::zero(), DyadicInterval::one());
    }
    let wp = w + 8;
    let tiv = DyadicInterval::from_rational(t, wp + 4);
    let x = (&tiv * &pi(wp + 4)).round_out(wp + 4);
    let x = x.clamp_nonneg();
    let s = DyadicInterval::new(sin_point(x.lo(), wp).lo().clone(), sin_point(x.hi(), wp).hi().clone());
    let c = DyadicInterval::new(cos_point(x.hi(), wp).lo().clone(), cos_point(x.lo(), wp).hi().clone());
    (s, c)
}

/// `(sin(q*pi), cos(q*pi))` with exact argument reduction on the rational `q`.
pub fn sincos_pi(q: &BigRational, w: i64) -> (DyadicInterval, DyadicInterval) {
    let two = BigRational::from_integer(2.into());
    let one = BigRational::from_integer(1.into());
    let half = BigRational::new(1.into(), 2.into());
    let quarter = BigRational::new(1.into(), 4.into());
    let mut t = q - (q / &two).floor() * &two;
    let mut sin_sign = false;
    let mut cos_sign = false;
    if t >= one {
        t -= &one;
        sin_sign = !sin_sign;
        cos_sign = !cos_sign;
    }
    if t > half {
        t = &one - &t;
        cos_sign = !cos_sign;
    }
    let (mut s, mut c) = if t > quarter {
        let (s, c) = sincos_small(&(&half - &t), w);
        (c, s)
    } else {
        sincos_small(&t, w)
    };
    if sin_sign {
        s = -s;
    }
    if cos_sign {
        c = -c;
    }
    (s, c)
}

/// Exact `x^n` for rational `x`.
pub fn rational_powi(x: &BigRational, n: u32) -> BigRational {
    let mut acc = BigRational::from_integer(1.into());
    for _ in 0..n {
        acc *= x;
    }
    acc
}

/// Integer value of `q` when it is a natural number.
pub fn as_natural(q: &BigRational) -> Option<u32> {
    if q.is_integer() && !q.is_negative() {
        let n = q.numer();
        if n.bits() < 32 {
            return u32::try_from(n.clone()).ok();
        }
    }
    None
}
