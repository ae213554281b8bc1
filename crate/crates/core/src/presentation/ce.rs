//! Computably enumerable sets given by stage enumerators, and oracle adapters over them.

use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::rational::rat_pow2;

/// How a c.e. set is enumerated.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CeSpec {
    /// A finite set; `stages[t]` is `S_t`. Without stages everything appears at stage 0.
    Explicit {
        elements: Vec<u64>,
        #[serde(default)]
        stages: Vec<Vec<u64>>,
    },
    /// `{start, start + step, ...}`; stage `t` holds the elements `<= t`.
    Arithmetic { start: u64, step: u64 },
}

/// A c.e. set `C` with `0 not in C`, with its one-to-one enumeration `c_0, c_1, ...`
/// in order of first appearance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CeSet {
    spec: CeSpec,
    /// Explicit sets: the enumeration and the stage at which each element appears.
    order: Vec<(u64, u64)>,
}

impl CeSet {
    pub fn new(spec: CeSpec) -> Result<Self> {
        let order = match &spec {
            CeSpec::Explicit { elements, stages } => {
                let all: BTreeSet<u64> = elements.iter().copied().collect();
                if all.len() != elements.len() {
                    return Err(Error::InvalidInput("repeated element in c.e. set".into()));
                }
                let mut stages = stages.clone();
                if stages.last().map(|s| s.iter().copied().collect::<BTreeSet<_>>()) != Some(all.clone()) {
                    stages.push(elements.clone());
                }
                let mut order = Vec::new();
                let mut seen = BTreeSet::new();
                for (t, stage) in stages.iter().enumerate() {
                    let set: BTreeSet<u64> = stage.iter().copied().collect();
                    if !seen.is_subset(&set) {
                        return Err(Error::InvalidInput(format!("stage {t} drops an enumerated element")));
                    }
                    if !set.is_subset(&all) {
                        return Err(Error::InvalidInput(format!("stage {t} has elements outside the set")));
                    }
                    for &c in stage {
                        if seen.insert(c) {
                            order.push((c, t as u64));
                        }
                    }
                }
                order
            }
            CeSpec::Arithmetic { step, .. } => {
                if *step == 0 {
                    return Err(Error::InvalidInput("arithmetic c.e. set needs step >= 1".into()));
                }
                Vec::new()
            }
        };
        let set = CeSet { spec, order };
        if set.contains(0) {
            return Err(Error::ZeroInC);
        }
        Ok(set)
    }

    pub fn explicit(elements: &[u64]) -> Result<Self> {
        CeSet::new(CeSpec::Explicit { elements: elements.to_vec(), stages: Vec::new() })
    }

    pub fn explicit_staged(elements: &[u64], stages: &[&[u64]]) -> Result<Self> {
        CeSet::new(CeSpec::Explicit {
            elements: elements.to_vec(),
            stages: stages.iter().map(|s| s.to_vec()).collect(),
        })
    }

    pub fn arithmetic(start: u64, step: u64) -> Result<Self> {
        CeSet::new(CeSpec::Arithmetic { start, step })
    }

    pub fn spec(&self) -> &CeSpec {
        &self.spec
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.spec, CeSpec::Explicit { .. })
    }

    /// Number of elements, `None` for infinite sets.
    pub fn len(&self) -> Option<usize> {
        match self.spec {
            CeSpec::Explicit { .. } => Some(self.order.len()),
            CeSpec::Arithmetic { .. } => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// Exact membership (these stand-in sets are decidable).
    pub fn contains(&self, c: u64) -> bool {
        match &self.spec {
            CeSpec::Explicit { .. } => self.order.iter().any(|&(x, _)| x == c),
            CeSpec::Arithmetic { start, step } => c >= *start && (c - start) % step == 0,
        }
    }

    /// `c_n`, if the set has more than `n` elements.
    pub fn nth(&self, n: usize) -> Option<u64> {
        match &self.spec {
            CeSpec::Explicit { .. } => self.order.get(n).map(|&(c, _)| c),
            CeSpec::Arithmetic { start, step } => Some(start + step * n as u64),
        }
    }

    /// `c_0, ..., c_{n-1}`, shorter when the set is finite.
    pub fn prefix(&self, n: usize) -> Vec<u64> {
        (0..n).map_while(|i| self.nth(i)).collect()
    }

    /// Like [`prefix`](Self::prefix), failing when fewer than `n` elements exist by `stage_budget`.
    pub fn enumerate_up_to(&self, n: usize, stage_budget: u64) -> Result<Vec<u64>> {
        let got = self.stage(stage_budget);
        if got.len() >= n {
            Ok(got[..n].to_vec())
        } else {
            Err(Error::EnumerationStalled { needed: n, found: got.len(), stage: stage_budget })
        }
    }

    /// `S_t` in enumeration order.
    pub fn stage(&self, t: u64) -> Vec<u64> {
        match &self.spec {
            CeSpec::Explicit { .. } => self.order.iter().filter(|&&(_, s)| s <= t).map(|&(c, _)| c).collect(),
            CeSpec::Arithmetic { start, step } => {
                if t < *start {
                    Vec::new()
                } else {
                    (0..=(t - start) / step).map(|i| start + step * i).collect()
                }
            }
        }
    }

    /// The first stage at which the enumeration is complete, for finite sets.
    pub fn final_stage(&self) -> Option<u64> {
        match self.spec {
            CeSpec::Explicit { .. } => Some(self.order.iter().map(|&(_, s)| s).max().unwrap_or(0)),
            CeSpec::Arithmetic { .. } => None,
        }
    }

    /// `gamma = sum_{c in C} 2^-c`, exact.
    pub fn gamma(&self) -> BigRational {
        match &self.spec {
            CeSpec::Explicit { .. } => self.order.iter().map(|&(c, _)| rat_pow2(-(c as i64))).sum(),
            CeSpec::Arithmetic { start, step } => {
                rat_pow2(-(*start as i64)) / (BigRational::one() - rat_pow2(-(*step as i64)))
            }
        }
    }

    /// `sum_{c in S_t} 2^-c`, a lower bound for gamma that converges from below.
    pub fn gamma_lower(&self, t: u64) -> BigRational {
        self.stage(t).iter().map(|&c| rat_pow2(-(c as i64))).sum()
    }

    /// `sum_{n >= m} 2^-c_n`, exact.
    pub fn tail_mass(&self, m: usize) -> BigRational {
        match &self.spec {
            CeSpec::Explicit { .. } => {
                self.order.iter().skip(m).map(|&(c, _)| rat_pow2(-(c as i64))).sum()
            }
            CeSpec::Arithmetic { step, .. } => {
                let c = self.nth(m).expect("infinite");
                rat_pow2(-(c as i64)) / (BigRational::one() - rat_pow2(-(*step as i64)))
            }
        }
    }
}

/// Whether an answer is final or only valid relative to a stage budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Certainty {
    Exact,
    Provisional { stage: u64 },
}

impl Certainty {
    pub fn and(self, other: Certainty) -> Certainty {
        match (self, other) {
            (Certainty::Exact, c) | (c, Certainty::Exact) => c,
            (Certainty::Provisional { stage: a }, Certainty::Provisional { stage: b }) => {
                Certainty::Provisional { stage: a.min(b) }
            }
        }
    }

    pub fn is_exact(self) -> bool {
        self == Certainty::Exact
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum OracleMode {
    /// Exact membership; only available for decidable stand-in sets.
    Transparent,
    /// Answers relative to the enumeration at stage `budget`.
    Staged { budget: u64 },
}

/// Membership and gamma queries about a c.e. set, playing the role of an oracle.
#[derive(Clone, Debug)]
pub struct OracleAdapter {
    pub ce: CeSet,
    pub mode: OracleMode,
}

/// Slack added to a staged lower bound for gamma when an upper bound is needed.
pub const STAGED_GAMMA_SLACK_EXP: i64 = 8;

impl OracleAdapter {
    pub fn transparent(ce: CeSet) -> Self {
        OracleAdapter { ce, mode: OracleMode::Transparent }
    }

    pub fn staged(ce: CeSet, budget: u64) -> Self {
        OracleAdapter { ce, mode: OracleMode::Staged { budget } }
    }

    /// Exact when transparent or when the staged budget has reached a finite set's final stage.
    pub fn certainty(&self) -> Certainty {
        match self.mode {
            OracleMode::Transparent => Certainty::Exact,
            OracleMode::Staged { budget } => match self.ce.final_stage() {
                Some(f) if budget >= f => Certainty::Exact,
                _ => Certainty::Provisional { stage: budget },
            },
        }
    }

    /// Membership; a positive staged answer is always final.
    pub fn member(&self, c: u64) -> (bool, Certainty) {
        match self.mode {
            OracleMode::Transparent => (self.ce.contains(c), Certainty::Exact),
            OracleMode::Staged { budget } => {
                if self.ce.stage(budget).contains(&c) {
                    (true, Certainty::Exact)
                } else {
                    (false, self.certainty())
                }
            }
        }
    }

    /// Upper bound on gamma: exact when transparent, staged lower bound plus `2^-8` otherwise.
    pub fn gamma_upper(&self) -> (BigRational, Certainty) {
        match self.mode {
            OracleMode::Transparent => (self.ce.gamma(), Certainty::Exact),
            OracleMode::Staged { budget } => {
                let c = self.certainty();
                let lower = self.ce.gamma_lower(budget);
                if c.is_exact() {
                    (lower, c)
                } else {
                    (lower + rat_pow2(-STAGED_GAMMA_SLACK_EXP), c)
                }
            }
        }
    }

    /// Enumerated elements `c_0..` visible to this adapter, with the number of them that are
    /// certainly all the elements `<= threshold`.
    ///
    /// Returns the shortest prefix of the enumeration containing every element of `C` that is
    /// at most `threshold`, together with the certainty of that claim.
    pub fn prefix_covering(&self, threshold: u64) -> (Vec<u64>, Certainty) {
        let below: Vec<u64> = (1..=threshold).filter(|&c| self.member(c).0).collect();
        let visible = match self.mode {
            OracleMode::Transparent => None,
            OracleMode::Staged { budget } => Some(self.ce.stage(budget)),
        };
        let mut prefix = Vec::new();
        let mut remaining: BTreeSet<u64> = below.into_iter().collect();
        let mut n = 0usize;
        while !remaining.is_empty() {
            let c = match &visible {
                None => self.ce.nth(n),
                Some(v) => v.get(n).copied(),
            };
            let Some(c) = c else { break };
            remaining.remove(&c);
            prefix.push(c);
            n += 1;
        }
        (prefix, self.certainty())
    }
}

/// Sum over `c > t` of `2^-c`, the most mass that elements above `t` can carry.
pub fn mass_above(t: u64) -> BigRational {
    if t == u64::MAX {
        BigRational::zero()
    } else {
        rat_pow2(-(t as i64))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn enumeration_and_gamma() {
        let c = CeSet::explicit_staged(&[1, 3], &[&[3], &[1, 3]]).unwrap();
        assert_eq!(c.prefix(5), vec![3, 1]);
        assert_eq!(c.gamma(), rat(5, 8));
        assert_eq!(c.gamma_lower(0), rat(1, 8));
        assert_eq!(c.final_stage(), Some(1));
        assert!(matches!(c.enumerate_up_to(2, 0), Err(Error::EnumerationStalled { .. })));
        let a = CeSet::arithmetic(2, 3).unwrap();
        assert_eq!(a.prefix(3), vec![2, 5, 8]);
        assert_eq!(a.gamma(), rat(1, 4) / (rat(1, 1) - rat(1, 8)));
        assert_eq!(a.stage(7), vec![2, 5]);
        assert_eq!(CeSet::explicit(&[0, 2]), Err(Error::ZeroInC));
        assert_eq!(CeSet::arithmetic(0, 1), Err(Error::ZeroInC));
    }

    #[test]
    fn staged_answers_are_provisional() {
        let c = CeSet::explicit_staged(&[1, 3], &[&[1], &[1, 3]]).unwrap();
        let o = OracleAdapter::staged(c.clone(), 0);
        assert_eq!(o.member(1), (true, Certainty::Exact));
        assert_eq!(o.member(3), (false, Certainty::Provisional { stage: 0 }));
        assert_eq!(OracleAdapter::staged(c.clone(), 1).member(3), (true, Certainty::Exact));
        let t = OracleAdapter::transparent(c);
        assert_eq!(t.gamma_upper(), (rat(5, 8), Certainty::Exact));
        let (pre, cert) = t.prefix_covering(10);
        assert_eq!(pre, vec![1, 3]);
        assert!(cert.is_exact());
    }
}
