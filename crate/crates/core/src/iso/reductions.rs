//! Oracle reductions for the adversarial presentation `F` of a c.e. set `C`: the set computes
//! `e_0` (hence the identity map) with respect to `F`, and anything computing a unimodular multiple
//! of `e_0` recovers `(1 - gamma)^{-1/p}`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::presentation::{two_pow_neg_over_p, Certainty, ComputableVector, OracleAdapter, OracleMode};
use crate::scalar::transcendental::{pow_iv, sqrt_iv};
use crate::scalar::{format_rational, rat_pow2, Dyadic, DyadicInterval, GaussianRational, PExponent};
use crate::vectors::GenCombo;

/// `(1 - gamma)^{-1/p}` at precision `w`, from an upper or exact value of gamma.
fn inverse_root(gamma: &BigRational, p: &PExponent, w: i64) -> Result<DyadicInterval> {
    let base = BigRational::one() - gamma;
    if !base.is_positive() {
        return Err(Error::InvalidInput(format!("gamma bound {} is not below 1", format_rational(gamma))));
    }
    let x = DyadicInterval::from_rational(&base, w + 16);
    Ok(pow_iv(&x, &-p.recip_enclosure(w + 16), w))
}

/// An integer `M > (1 - gamma)^{-1/p}`, from the oracle's upper bound on gamma.
pub fn scale_bound(oracle: &OracleAdapter, p: &PExponent) -> Result<(BigRational, Certainty)> {
    let (gamma, certainty) = oracle.gamma_upper();
    let iv = inverse_root(&gamma, p, 32)?;
    let m = iv.hi().to_rational().floor() + BigRational::one();
    Ok((m, certainty))
}

fn enumerated(oracle: &OracleAdapter, n: usize) -> Option<u64> {
    match oracle.mode {
        OracleMode::Transparent => oracle.ce.nth(n),
        OracleMode::Staged { budget } => oracle.ce.stage(budget).get(n).copied(),
    }
}

fn bits(q: &BigRational) -> i64 {
    (q.abs().ceil().to_integer().bits() as i64).max(1)
}

#[derive(Clone, Debug, Serialize)]
pub struct E0Approx {
    /// Within `2^-k` of `e_0`.
    pub g: GenCombo,
    pub k: i64,
    pub n1: u64,
    pub q1: String,
    pub m_bound: String,
    pub certainty: Certainty,
}

/// `g = q_1 [f_0 - sum_{n=1}^{N_1-1} 2^{-c_{n-1}/p} f_n]` with `||e_0 - g|| < 2^-k`.
pub fn compute_e0_wrt_f(oracle: &OracleAdapter, p: &PExponent, k: i64) -> Result<E0Approx> {
    let (m, _) = scale_bound(oracle, p)?;
    // the construction below is run one bit finer; rational coefficients use the other half
    let kk = k.max(0) + 1;
    let p_up = p.approx_f64().ceil() as u32;
    // eps = 2^{-(kk p + 1)/p} >= 2^-(kk+1), and the tail target eps / (eps + M) is at least this over M + 1
    let eps_lo = rat_pow2(-(kk + 1));
    let ratio = &eps_lo / (&m + BigRational::one());
    let mass = crate::scalar::transcendental::rational_powi(&ratio, p_up);
    let t = {
        let mut t = 0u64;
        while rat_pow2(-(t as i64)) > mass {
            t += 1;
        }
        t
    };
    let (prefix, certainty) = oracle.prefix_covering(t);
    if !certainty.is_exact() {
        return Err(Error::Provisional(format!("cannot certify that every element of C up to {t} has appeared")));
    }
    let n1 = (prefix.len() as u64 + 1).max(3);
    let gamma = oracle.gamma_upper().0;
    let q1 = inverse_root(&gamma, p, kk + 4)?.mid().to_rational();
    let w = kk + 4 + bits(&(&m + BigRational::one())) + 64 - n1.leading_zeros() as i64;
    let mut inner = GenCombo::unit(0);
    for n in 1..n1 {
        if let Some(c) = enumerated(oracle, (n - 1) as usize) {
            let a = two_pow_neg_over_p(c, p, w).mid().to_rational();
            inner.set(n, GaussianRational::real(-a));
        }
    }
    let g = inner.scale(&GaussianRational::real(q1.clone()));
    Ok(E0Approx { g, k, n1, q1: format_rational(&q1), m_bound: format_rational(&m), certainty })
}

/// `e_0` with respect to `F` as a computable vector.
pub fn e0_vector(oracle: &OracleAdapter, p: &PExponent) -> Result<ComputableVector> {
    compute_e0_wrt_f(oracle, p, 0)?;
    let oracle = oracle.clone();
    let p = p.clone();
    Ok(ComputableVector::from_fn("e_0 over F", move |k| compute_e0_wrt_f(&oracle, &p, k).expect("certified at k = 0").g))
}

/// `|alpha_0|` read off an approximation of `lambda e_0` (`|lambda| = 1`), within `2^-k` of
/// `(1 - gamma)^{-1/p}`, given `q0 >= (1 - gamma)^{-1/p}`.
pub fn recover_scale_from_atom(v: &ComputableVector, q0: &BigRational, k: i64) -> BigRational {
    // 2^-k' <= q0 2^-(k+1), so |alpha_0| is within 2^-(k+1); the modulus takes the other half
    let floor = Dyadic::floor_rational(q0, 64).floor_log2().unwrap_or(0);
    let k_prime = k + 1 - floor;
    let a0 = v.approx(k_prime).get(0);
    if a0.im == BigRational::from_integer(BigInt::from(0)) {
        return a0.re.abs();
    }
    sqrt_iv(&DyadicInterval::from_rational(&a0.norm_sqr(), k + 8), k + 2).mid().to_rational()
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityMap {
    /// `e_j` with respect to `F`, each within `2^-k`.
    pub vectors: Vec<GenCombo>,
    pub e0: Option<E0Approx>,
    pub certainty: Certainty,
}

/// `e_0, ..., e_{n-1}` with respect to `F`: `e_0` from the oracle, `e_j = f_j` otherwise.
pub fn identity_reduction(oracle: &OracleAdapter, p: &PExponent, n: usize, k: i64) -> Result<IdentityMap> {
    if n == 0 {
        return Ok(IdentityMap { vectors: Vec::new(), e0: None, certainty: Certainty::Exact });
    }
    let e0 = compute_e0_wrt_f(oracle, p, k)?;
    let mut vectors = vec![e0.g.clone()];
    vectors.extend((1..n as u64).map(GenCombo::unit));
    Ok(IdentityMap { vectors, certainty: e0.certainty, e0: Some(e0) })
}
