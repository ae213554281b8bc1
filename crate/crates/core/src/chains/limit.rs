//! Chain limits `g = inf phi[chain]`.
//!
//! Along a chain `||phi(nu) - g||^p = ||phi(nu)||^p - ||g||^p`, so once `||g||^p` is known a deep
//! enough node approximates `g`. Finding `||g||^p` is the oracle's job: a terminal node gives it
//! outright, an exact oracle lets the source report it, and otherwise the answer is provisional.

use num_traits::Zero;
use serde::Serialize;

use super::bounds::q_value;
use super::partition::{find_anm_child, Chain, ChainBudget};
use super::source::DisintegrationSource;
use crate::error::{Error, Result};
use crate::presentation::{Certainty, OracleAdapter};
use crate::scalar::{rat_pow2, IntervalReport};
use crate::tree::TreeNode;
use crate::vectors::{norm_pow, GenCombo};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LimitStatus {
    Exact,
    Provisional,
    Zero,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainLimit {
    pub chain: usize,
    /// The node whose value stands in for `g`.
    pub node: TreeNode,
    pub g: GenCombo,
    pub norm_pow: IntervalReport,
    pub status: LimitStatus,
    pub certainty: Certainty,
}

fn finish(src: &dyn DisintegrationSource, chain: usize, node: TreeNode, k: i64, status: LimitStatus, certainty: Certainty) -> ChainLimit {
    let g = if status == LimitStatus::Zero { GenCombo::zero() } else { src.value(&node, k + 2) };
    let np = norm_pow(&**src.presentation(), &g, k + 2);
    ChainLimit { chain, node, norm_pow: IntervalReport::from(&np), g, status, certainty }
}

/// `g` within `2^-k`, continuing the chain below its last node along almost norm-maximizing
/// children when needed.
pub fn chain_limit(src: &dyn DisintegrationSource, chain: &Chain, oracle: &OracleAdapter, k: i64, budget: &ChainBudget) -> Result<ChainLimit> {
    let last = chain.nodes.last().ok_or_else(|| Error::InvalidInput("empty chain".into()))?.clone();
    if src.is_terminal(&last) {
        return Ok(finish(src, chain.id, last, k, LimitStatus::Exact, Certainty::Exact));
    }
    let certainty = oracle.certainty();
    let known = if certainty.is_exact() { src.chain_infimum(&last) } else { None };
    let Some(inf) = known else {
        let mut nu = last;
        for _ in 0..budget.max_depth {
            if src.is_terminal(&nu) {
                break;
            }
            nu = find_anm_child(src, &nu, budget)?.child;
        }
        let stage = match certainty {
            Certainty::Provisional { stage } => stage,
            Certainty::Exact => budget.stage,
        };
        return Ok(finish(src, chain.id, nu, k, LimitStatus::Provisional, Certainty::Provisional { stage }));
    };
    if inf.is_zero() {
        return Ok(finish(src, chain.id, last, k, LimitStatus::Zero, certainty));
    }
    // ||phi(nu) - g|| < 2^-(k+1) once ||phi(nu)||^p - ||g||^p < 2^-(k+1)p
    let p_up = src.presentation().exponent().approx_f64().ceil() as i64;
    let t = (p_up * (k + 1)).max(0) as u64 + 2;
    let target = rat_pow2(-(p_up * (k + 1)));
    let mut nu = last;
    for _ in 0..=budget.max_depth {
        let upper = q_value(src, &nu, t) + rat_pow2(-(t as i64 + 1));
        if src.is_terminal(&nu) || upper - &inf < target {
            return Ok(finish(src, chain.id, nu, k, LimitStatus::Exact, certainty));
        }
        nu = find_anm_child(src, &nu, budget)?.child;
    }
    Err(Error::BudgetExhausted(format!("chain {} not within 2^-{k} of its limit after {} steps", chain.id, budget.max_depth)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::partition::partition_chains;
    use crate::chains::source::{dyadic_fixture, FnSource};
    use crate::presentation::{CeSet, SharedPresentation, Standard};
    use crate::scalar::{GaussianRational, PExponent};
    use std::sync::Arc;

    fn e1() -> SharedPresentation {
        Arc::new(Standard::new(PExponent::int(1)))
    }

    fn oracle() -> OracleAdapter {
        OracleAdapter::transparent(CeSet::explicit(&[1]).unwrap())
    }

    #[test]
    fn terminal_chain_is_its_last_value() {
        let src = dyadic_fixture(e1());
        let part = partition_chains(&src, &ChainBudget { stage: 3, ..Default::default() }).unwrap();
        let g = chain_limit(&src, &part.chains[0], &oracle(), 10, &ChainBudget::default()).unwrap();
        assert_eq!(g.g, GenCombo::unit(0));
        assert_eq!(g.status, LimitStatus::Exact);
    }

    /// `(0)^l -> sum_{i > l} 2^-i e_i` with the tail past depth 40 folded into one coordinate, and
    /// `(0)^{l-1} 1 -> 2^-l e_l`; optionally every chain value also carries `a e_0`.
    fn tail_chain(atom: Option<GaussianRational>) -> FnSource {
        let depth = 40u64;
        let a0 = atom.clone();
        FnSource {
            pres: e1(),
            enumerate: Arc::new(move |t| {
                let d = t.min(depth) as usize;
                (1..=d).map(|l| TreeNode::new(&vec![0; l])).chain((1..=d).map(|l| {
                    let mut p = vec![0; l - 1];
                    p.push(1);
                    TreeNode::new(&p)
                })).collect()
            }),
            value: Arc::new(move |nu, _| {
                let l = nu.len() as u64;
                let on_chain = nu.path().iter().all(|&x| x == 0);
                let tail = |from: u64| {
                    let mut v = GenCombo::from_pairs((from..=depth).map(|i| (i, GaussianRational::real(rat_pow2(-(i as i64))))));
                    v.set(depth + 1, GaussianRational::real(rat_pow2(-(depth as i64))));
                    v
                };
                let mut v = if !on_chain {
                    GenCombo::scaled_unit(l, GaussianRational::real(rat_pow2(-(l as i64))))
                } else {
                    tail(l + 1)
                };
                if on_chain {
                    if let Some(a) = &a0 {
                        v.set(0, a.clone());
                    }
                }
                v
            }),
            terminal: Arc::new(move |nu| nu.len() as u64 >= depth || nu.last() == Some(1)),
            infimum: Some(Arc::new(move |nu| {
                nu.path().iter().all(|&x| x == 0).then(|| atom.as_ref().map_or_else(num_rational::BigRational::zero, |a| a.norm_sqr()))
            })),
        }
    }

    #[test]
    fn vanishing_chain_is_zero() {
        let src = tail_chain(None);
        let part = partition_chains(&src, &ChainBudget { stage: 3, ..Default::default() }).unwrap();
        let g = chain_limit(&src, &part.chains[0], &oracle(), 8, &ChainBudget::default()).unwrap();
        assert_eq!(g.status, LimitStatus::Zero);
        assert!(g.g.is_zero());
    }

    #[test]
    fn atom_chain_converges() {
        // the infimum hook reports |a|^2, which is |a|^p for a = 1 and p = 1
        let src = tail_chain(Some(GaussianRational::one()));
        let part = partition_chains(&src, &ChainBudget { stage: 3, ..Default::default() }).unwrap();
        let g = chain_limit(&src, &part.chains[0], &oracle(), 8, &ChainBudget::default()).unwrap();
        assert_eq!(g.status, LimitStatus::Exact);
        let err = crate::vectors::norm(&*e1(), &(&g.g - &GenCombo::unit(0)), 20);
        assert!(err.hi() < &crate::scalar::Dyadic::pow2(-8));
        let staged = OracleAdapter::staged(CeSet::arithmetic(1, 1).unwrap(), 4);
        let p = chain_limit(&src, &part.chains[0], &staged, 8, &ChainBudget::default()).unwrap();
        assert_eq!(p.status, LimitStatus::Provisional);
    }
}
