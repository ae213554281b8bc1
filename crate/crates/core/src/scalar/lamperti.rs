//! Randomized certification of the sharpened Lamperti inequality and grid sweeps of `f_p`.

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dyadic::Dyadic;
use super::exponent::PExponent;
use super::interval::{DyadicInterval, IntervalReport};
use super::rational::{rat, GaussianRational};
use super::sigma::{lamperti_defect, lamperti_objective, min_pow, separated, sigma_scalar};
use crate::error::Result;
use crate::par::{self, ExecMode};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PairFailure {
    pub z: GaussianRational,
    pub w: GaussianRational,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LampertiReport {
    pub p: String,
    pub pairs: usize,
    pub strict: usize,
    pub equal: usize,
    pub sign_checked: usize,
    pub failures: Vec<PairFailure>,
}

impl LampertiReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.strict + self.equal == self.pairs && self.sign_checked == self.pairs
    }
}

#[derive(Clone, Debug)]
pub struct LampertiConfig {
    pub pairs: usize,
    pub seed: u64,
    /// Width at which `min <= sigma` must be separated.
    pub k_strict: i64,
    /// Equality tolerance exponent used when separation fails.
    pub k_equal: i64,
    pub mode: ExecMode,
}

impl Default for LampertiConfig {
    fn default() -> Self {
        LampertiConfig { pairs: 1000, seed: 0x5eed, k_strict: 30, k_equal: 40, mode: ExecMode::default() }
    }
}

fn random_scalar(rng: &mut ChaCha8Rng) -> GaussianRational {
    let part = |rng: &mut ChaCha8Rng| {
        if rng.gen_bool(0.2) {
            rat(0, 1)
        } else {
            rat(rng.gen_range(-24..=24), rng.gen_range(1..=12))
        }
    };
    GaussianRational::new(part(rng), part(rng))
}

/// Deterministic pairs, mixing generic draws with the structured cases
/// (`w = 0`, `w = z`, `w = i z`, `w = -z`) where the inequality is tight or trivial.
pub fn sample_pairs(n: usize, seed: u64) -> Vec<(GaussianRational, GaussianRational)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let z = random_scalar(&mut rng);
            let w = match rng.gen_range(0..10) {
                0 => GaussianRational::zero(),
                1 => z.clone(),
                2 => &z * &GaussianRational::i(),
                3 => -&z,
                _ => random_scalar(&mut rng),
            };
            (z, w)
        })
        .collect()
}

fn check_pair(z: &GaussianRational, w: &GaussianRational, p: &PExponent, below_two: bool, cfg: &LampertiConfig) -> (Option<bool>, bool, Option<String>) {
    let m = min_pow(z, w, p, cfg.k_strict);
    let s = match sigma_scalar(z, w, p, cfg.k_strict) {
        Ok(s) => s,
        Err(e) => return (None, false, Some(e.to_string())),
    };
    let mut verdict = None;
    let mut reason = None;
    if m.hi() <= s.lo() {
        verdict = Some(true);
    } else {
        let ke = cfg.k_equal + 2;
        let m = min_pow(z, w, p, ke);
        let s = sigma_scalar(z, w, p, ke).expect("separated above");
        let gap = (s.hi() - m.lo()).max(m.hi() - s.lo());
        if m.hi() <= s.lo() {
            verdict = Some(true);
        } else if gap <= Dyadic::pow2(-cfg.k_equal) {
            verdict = Some(false);
        } else {
            reason = Some(format!("min {m} not below sigma {s}"));
        }
    }
    let d = lamperti_defect(z, w, p, cfg.k_strict);
    let sign_ok = if below_two { !d.is_negative() } else { !d.is_positive() };
    if !sign_ok {
        reason = Some(format!("sign claim fails: defect {d}"));
    }
    (verdict, sign_ok, reason)
}

/// Certify `min(|z|^p, |w|^p) <= sigma(z, w)` and the sign of the Lamperti defect on random pairs.
pub fn lamperti_check(p: &PExponent, cfg: &LampertiConfig) -> Result<LampertiReport> {
    let below_two = separated(p, 16)? == std::cmp::Ordering::Less;
    let pairs = sample_pairs(cfg.pairs, cfg.seed);
    let results = par::map(cfg.mode, &pairs, |(z, w)| check_pair(z, w, p, below_two, cfg));
    let mut report = LampertiReport {
        p: p.to_string(),
        pairs: pairs.len(),
        strict: 0,
        equal: 0,
        sign_checked: 0,
        failures: Vec::new(),
    };
    for ((z, w), (verdict, sign_ok, reason)) in pairs.iter().zip(results) {
        match verdict {
            Some(true) => report.strict += 1,
            Some(false) => report.equal += 1,
            None => {}
        }
        if sign_ok {
            report.sign_checked += 1;
        }
        if let Some(reason) = reason {
            report.failures.push(PairFailure { z: z.clone(), w: w.clone(), reason });
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GridReport {
    pub p: String,
    pub theta_steps: u32,
    pub t_steps: u32,
    pub points: usize,
    /// `theta = theta_index * pi / theta_steps`.
    pub argmin_theta_index: u32,
    /// `t = 1 + t_index / t_denominator`.
    pub argmin_t_index: u32,
    pub t_denominator: u32,
    pub minimum: IntervalReport,
    pub expected: IntervalReport,
}

#[derive(Clone, Debug)]
pub struct GridConfig {
    pub theta_steps: u32,
    pub t_denominator: u32,
    pub t_max: u32,
    pub k: i64,
    pub mode: ExecMode,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { theta_steps: 64, t_denominator: 16, t_max: 8, k: 24, mode: ExecMode::default() }
    }
}

/// Enclosure of `|4 - 2 sqrt(2)^p|`, the value of `f_p` at `(pi/2, 1)`.
pub fn lamperti_gap(p: &PExponent, k: i64) -> Result<DyadicInterval> {
    lamperti_objective(&rat(1, 2), &rat(1, 1), p, k)
}

/// Evaluate `f_p` on `theta in [0, pi]`, `t in [1, t_max]` and report the smallest value.
///
/// Ties are broken by the smaller midpoint, then by grid order.
pub fn lamperti_grid(p: &PExponent, cfg: &GridConfig) -> Result<GridReport> {
    separated(p, cfg.k)?;
    let t_count = (cfg.t_max - 1) * cfg.t_denominator;
    let points: Vec<(u32, u32)> = (0..=cfg.theta_steps)
        .flat_map(|j| (0..=t_count).map(move |i| (j, i)))
        .collect();
    let values = par::map(cfg.mode, &points, |&(j, i)| {
        let theta = rat(j as i64, cfg.theta_steps as i64);
        let t = BigRational::from_integer(1.into()) + rat(i as i64, cfg.t_denominator as i64);
        lamperti_objective(&theta, &t, p, cfg.k)
    });
    let mut best: Option<(usize, DyadicInterval)> = None;
    for (idx, v) in values.into_iter().enumerate() {
        let v = v?;
        let better = match &best {
            None => true,
            Some((_, b)) => v.mid() < b.mid(),
        };
        if better {
            best = Some((idx, v));
        }
    }
    let (idx, min) = best.expect("grid is non-empty");
    let (j, i) = points[idx];
    Ok(GridReport {
        p: p.to_string(),
        theta_steps: cfg.theta_steps,
        t_steps: t_count,
        points: points.len(),
        argmin_theta_index: j,
        argmin_t_index: i,
        t_denominator: cfg.t_denominator,
        minimum: (&min).into(),
        expected: (&lamperti_gap(p, cfg.k)?).into(),
    })
}
