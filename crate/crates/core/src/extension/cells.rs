//! Splitting generators into pairwise disjoint cells with nothing but the norm oracle.
//!
//! Disjointness is read off `sigma_1`, and coefficients come from minimizing the convex map
//! `beta -> ||r - beta c||`. The decisions (skip, peel, split, open) are recorded once and replayed
//! at higher precision, so the cell structure never changes while the coefficients converge.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::presentation::Presentation;
use crate::scalar::rational::rat_pow2;
use crate::scalar::{Dyadic, GaussianRational, PExponent};
use crate::vectors::{norm, norm_pow, sigma1, GenCombo};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Move {
    /// Certified disjoint from the cell.
    Skip,
    /// `r <- r - beta c` with `r - beta c` disjoint from `c`.
    Peel,
    /// `c <- c - alpha r` with the result disjoint from `r`, and `r` becomes a new cell.
    Split,
}

/// Precision knobs for one run of the plan.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Tolerance {
    /// Coefficients are located to about `2^-t`.
    pub t: i64,
    /// `sigma_1` below `2^-tau` counts as disjoint.
    pub tau: i64,
}

impl Tolerance {
    pub fn new(t: i64) -> Self {
        Tolerance { t, tau: t - 16 }
    }

    fn eval_bits(&self, p: &PExponent) -> i64 {
        (p.approx_f64().ceil() as i64) * (self.t + 4) + 16
    }
}

fn ceil_log2(q: &BigRational) -> i64 {
    let mut e = 0;
    while &rat_pow2(e) < q {
        e += 1;
    }
    e
}

/// Minimizer of a convex function on `[-2^b, 2^b]` by slope bisection, then the shortest dyadic
/// whose value is indistinguishable from the minimum.
fn line_min(f: impl Fn(&BigRational) -> BigRational, b: i64, t: i64, slack: &BigRational) -> BigRational {
    let (mut lo, mut hi) = (-rat_pow2(b), rat_pow2(b));
    let h = rat_pow2(-(t + 2));
    let width = rat_pow2(-t);
    while &hi - &lo > width {
        let m = (&lo + &hi) / BigRational::from_integer(2.into());
        if f(&(&m + &h)) < f(&m) {
            lo = m;
        } else {
            hi = m;
        }
    }
    let best = (&lo + &hi) / BigRational::from_integer(2.into());
    let target = f(&best) + slack;
    for j in 0..=t {
        let scale = rat_pow2(j);
        let cand = (&best * &scale).round() / &scale;
        if f(&cand) <= target {
            return cand;
        }
    }
    best
}

/// `argmin_beta ||r - beta c||` by two sweeps of coordinate bisection over the real and imaginary
/// parts. Exact after one sweep when `r - beta* c` is disjoint from `c`.
pub(crate) fn argmin_coef<P: Presentation + ?Sized>(pres: &P, r: &GenCombo, c: &GenCombo, tol: Tolerance) -> GaussianRational {
    let p = pres.exponent();
    let w = tol.eval_bits(p);
    let f = |z: &GaussianRational| norm_pow(pres, &(r - &c.scale(z)), w).mid().to_rational();
    let rn = norm(pres, r, 8).hi().to_rational();
    let cn = norm(pres, c, 24).lo().to_rational();
    if cn.is_zero() {
        return GaussianRational::zero();
    }
    // ||beta c|| <= ||r|| + ||r - beta c|| <= 2 ||r|| at the minimum
    let b = ceil_log2(&(rn * BigRational::from_integer(2.into()) / cn + BigRational::one()));
    let slack = Dyadic::pow2(-(w - 4)).to_rational();
    let mut z = GaussianRational::zero();
    for _ in 0..2 {
        let im = z.im.clone();
        let re = line_min(|x| f(&GaussianRational::new(x.clone(), im.clone())), b, tol.t, &slack);
        let im = line_min(|y| f(&GaussianRational::new(re.clone(), y.clone())), b, tol.t, &slack);
        z = GaussianRational::new(re, im);
    }
    z
}

fn disjoint<P: Presentation + ?Sized>(pres: &P, a: &GenCombo, b: &GenCombo, tol: Tolerance) -> bool {
    if a.is_zero() || b.is_zero() {
        return true;
    }
    sigma1(pres, a, b, tol.tau + 4).hi() < &Dyadic::pow2(-tol.tau)
}

fn negligible<P: Presentation + ?Sized>(pres: &P, v: &GenCombo, tol: Tolerance) -> bool {
    v.is_zero() || norm(pres, v, tol.tau + 4).mid() < Dyadic::pow2(-tol.tau)
}

fn decide_move<P: Presentation + ?Sized>(
    pres: &P,
    r: &GenCombo,
    c: &GenCombo,
    allow_split: bool,
    tol: Tolerance,
) -> Result<(Move, Option<GaussianRational>)> {
    if disjoint(pres, r, c, tol) {
        return Ok((Move::Skip, None));
    }
    let beta = argmin_coef(pres, r, c, tol);
    if disjoint(pres, &(r - &c.scale(&beta)), c, tol) {
        return Ok((Move::Peel, Some(beta)));
    }
    if !allow_split {
        return Err(Error::BudgetExhausted("value is not a sum of parts of the cell".into()));
    }
    let alpha = argmin_coef(pres, c, r, tol);
    if disjoint(pres, &(c - &r.scale(&alpha)), r, tol) {
        return Ok((Move::Split, Some(alpha)));
    }
    Err(Error::BudgetExhausted("cell and vector overlap without either refining the other".into()))
}

/// Runs `r` against the cells in order, deciding each move (or following `script`). Returns the
/// moves, the coefficient peeled off each visited cell, and what is left of `r`.
fn absorb<P: Presentation + ?Sized>(
    pres: &P,
    cells: &mut Vec<GenCombo>,
    mut r: GenCombo,
    script: Option<&[Move]>,
    allow_split: bool,
    tol: Tolerance,
) -> Result<(Vec<Move>, Vec<GaussianRational>, GenCombo)> {
    let mut moves = Vec::new();
    let mut coefs = Vec::new();
    let count = script.map_or(cells.len(), |s| s.len());
    for i in 0..count {
        let (mv, known) = match script {
            Some(s) => (s[i], None),
            None => decide_move(pres, &r, &cells[i], allow_split, tol).map_err(|e| match e {
                Error::BudgetExhausted(m) => Error::BudgetExhausted(format!("cell {i}: {m}")),
                e => e,
            })?,
        };
        moves.push(mv);
        match mv {
            Move::Skip => coefs.push(GaussianRational::zero()),
            Move::Peel => {
                let beta = known.unwrap_or_else(|| argmin_coef(pres, &r, &cells[i], tol));
                r = &r - &cells[i].scale(&beta);
                coefs.push(beta);
            }
            Move::Split => {
                let alpha = known.unwrap_or_else(|| argmin_coef(pres, &cells[i], &r, tol));
                cells[i] = &cells[i] - &r.scale(&alpha);
                cells.push(r);
                coefs.push(GaussianRational::zero());
                r = GenCombo::zero();
                break;
            }
        }
    }
    Ok((moves, coefs, r))
}

/// The recorded decisions for generators `f_0..f_J` and for the values to be decomposed.
#[derive(Clone, Debug)]
pub(crate) struct CellPlan {
    gen_moves: Vec<(Vec<Move>, bool)>,
    value_moves: Vec<Vec<Move>>,
}

/// Cells and the coefficients of each decomposed value over them.
#[derive(Clone, Debug)]
pub(crate) struct CellRun {
    pub cells: Vec<GenCombo>,
    /// `coefs[v][i]`: coefficient of cell `i` in value `v` (zero when skipped).
    pub coefs: Vec<Vec<GaussianRational>>,
    pub residuals: Vec<GenCombo>,
}

impl CellPlan {
    /// Decides the plan for generators `0..=j_max` and then the given values.
    pub fn decide<P: Presentation + ?Sized>(pres: &P, j_max: u64, values: &[GenCombo], tol: Tolerance) -> Result<(CellPlan, CellRun)> {
        let mut cells = Vec::new();
        let mut gen_moves = Vec::new();
        for j in 0..=j_max {
            let (moves, _, r) = absorb(pres, &mut cells, GenCombo::unit(j), None, true, tol)?;
            let open = !negligible(pres, &r, tol);
            if open {
                cells.push(r);
            }
            gen_moves.push((moves, open));
        }
        let mut value_moves = Vec::new();
        let mut coefs = Vec::new();
        let mut residuals = Vec::new();
        for v in values {
            let (moves, c, r) = absorb(pres, &mut cells, v.clone(), None, false, tol)?;
            value_moves.push(moves);
            coefs.push(pad(c, cells.len()));
            residuals.push(r);
        }
        Ok((CellPlan { gen_moves, value_moves }, CellRun { cells, coefs, residuals }))
    }

    /// Replays the decisions at tolerance `tol`.
    pub fn replay<P: Presentation + ?Sized>(&self, pres: &P, values: &[GenCombo], tol: Tolerance) -> Result<CellRun> {
        let mut cells = Vec::new();
        for (j, (moves, open)) in self.gen_moves.iter().enumerate() {
            let (_, _, r) = absorb(pres, &mut cells, GenCombo::unit(j as u64), Some(moves), true, tol)?;
            if *open {
                cells.push(r);
            }
        }
        let mut coefs = Vec::new();
        let mut residuals = Vec::new();
        for (v, moves) in values.iter().zip(&self.value_moves) {
            let (_, c, r) = absorb(pres, &mut cells, v.clone(), Some(moves), false, tol)?;
            coefs.push(pad(c, cells.len()));
            residuals.push(r);
        }
        Ok(CellRun { cells, coefs, residuals })
    }

    pub fn operations(&self) -> usize {
        self.gen_moves.iter().map(|(m, _)| m.len() + 1).sum::<usize>() + self.value_moves.iter().map(Vec::len).sum::<usize>()
    }
}

fn pad(mut c: Vec<GaussianRational>, n: usize) -> Vec<GaussianRational> {
    c.resize(n, GaussianRational::zero());
    c
}

/// `|z|` rounded up to a rational.
pub(crate) fn modulus_upper(z: &GaussianRational) -> BigRational {
    let n2 = z.norm_sqr();
    if n2.is_zero() {
        return n2;
    }
    let s = crate::scalar::transcendental::sqrt_iv(&crate::scalar::DyadicInterval::from_rational(&n2, 64), 32);
    s.hi().to_rational().abs()
}
