//! Almost norm-maximizing children and the partition of a disintegration into chains.

use std::collections::BTreeMap;

use serde::Serialize;

use super::bounds::{node_bounds, stage_bounds, BoundsReport};
use super::source::DisintegrationSource;
use crate::error::{Error, Result};
use crate::par::{self, ExecMode};
use crate::scalar::format_rational;
use crate::tree::TreeNode;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ChainBudget {
    /// Enumeration stage whose nodes are partitioned.
    pub stage: u64,
    /// Largest stage the child search may reach.
    pub max_stage: u64,
    /// Longest walk below a chain's last node when approximating its limit.
    pub max_depth: usize,
    pub mode: ExecMode,
}

impl Default for ChainBudget {
    fn default() -> Self {
        ChainBudget { stage: 8, max_stage: 64, max_depth: 32, mode: ExecMode::default() }
    }
}

/// An almost norm-maximizing child and the stage at which it was certified.
#[derive(Clone, Debug, Serialize)]
pub struct AnmChild {
    pub parent: TreeNode,
    pub child: TreeNode,
    pub stage: u64,
    /// `m-bar` over the children seen at `stage`.
    pub m_bar: String,
    /// Every sibling has `||phi||^p` at most `||phi(child)||^p + 2^-slack_exp`.
    pub slack_exp: i64,
    /// The enumeration was complete, so no trigger was needed.
    pub complete: bool,
}

/// Searches stages `t >= |mu| + 2` until `M(mu,t) - Sigma^-(mu^+_t,t) < m-bar(mu^+_t,t)`, then
/// returns the lexicographically least maximizer of `m(.,t)`.
pub fn find_anm_child(src: &dyn DisintegrationSource, mu: &TreeNode, budget: &ChainBudget) -> Result<AnmChild> {
    if src.is_terminal(mu) {
        return Err(Error::NonterminalRequired(mu.to_string()));
    }
    let start = mu.len() as u64 + 2;
    for t in start..=budget.max_stage.max(start) {
        let kids = src.enumerated(t).children(mu);
        if kids.is_empty() {
            continue;
        }
        let b = stage_bounds(src, &kids, t, ExecMode::Sequential);
        let complete = src.final_stage().is_some_and(|f| t >= f);
        let fires = complete || node_bounds(src, mu, t).big_m - b.sigma_minus() < b.m_bar();
        if fires {
            let best = b.argmax().expect("children are enumerated");
            return Ok(AnmChild {
                parent: mu.clone(),
                child: best.node.clone(),
                stage: t,
                m_bar: format_rational(&b.m_bar()),
                slack_exp: t as i64,
                complete,
            });
        }
    }
    Err(Error::BudgetExhausted(format!("no trigger for {mu} up to stage {}", budget.max_stage)))
}

#[derive(Clone, Debug, Serialize)]
pub struct Chain {
    pub id: usize,
    pub nodes: Vec<TreeNode>,
    pub bounds: Vec<BoundsReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainPartition {
    pub stage: u64,
    pub chains: Vec<Chain>,
    pub anm: Vec<AnmChild>,
    /// Nodes in enumeration order with the stage each first appeared.
    pub log: Vec<(TreeNode, u64)>,
    #[serde(skip)]
    assignment: BTreeMap<TreeNode, usize>,
}

impl ChainPartition {
    pub fn chain_of(&self, nu: &TreeNode) -> Option<usize> {
        self.assignment.get(nu).copied()
    }

    pub fn len(&self) -> usize {
        self.chains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }
}

/// Partitions the nodes enumerated by `budget.stage`. The root opens chain 0, a node's almost
/// norm-maximizing child joins its chain and every other child opens a fresh chain, in
/// enumeration order.
pub fn partition_chains(src: &dyn DisintegrationSource, budget: &ChainBudget) -> Result<ChainPartition> {
    let mut first: BTreeMap<TreeNode, u64> = BTreeMap::new();
    for t in 0..=budget.stage {
        for n in src.enumerated(t).nodes() {
            first.entry(n.clone()).or_insert(t);
        }
    }
    let tree = src.enumerated(budget.stage);
    let inner: Vec<TreeNode> =
        tree.nodes().filter(|n| !tree.children(n).is_empty() && !src.is_terminal(n)).cloned().collect();
    let anm: Vec<AnmChild> = par::map(budget.mode, &inner, |mu| find_anm_child(src, mu, budget)).into_iter().collect::<Result<_>>()?;
    for a in &anm {
        first.entry(a.child.clone()).or_insert(a.stage);
    }
    let mut log: Vec<(TreeNode, u64)> = first.into_iter().collect();
    log.sort_by(|a, b| (a.1, &a.0).cmp(&(b.1, &b.0)));
    let heir: BTreeMap<&TreeNode, &TreeNode> = anm.iter().map(|a| (&a.parent, &a.child)).collect();

    let mut assignment = BTreeMap::new();
    let mut members: Vec<Vec<TreeNode>> = Vec::new();
    for (nu, _) in &log {
        let id = match nu.parent() {
            None => None,
            Some(parent) => (heir.get(&parent) == Some(&nu)).then(|| assignment[&parent]),
        };
        let id = id.unwrap_or_else(|| {
            members.push(Vec::new());
            members.len() - 1
        });
        assignment.insert(nu.clone(), id);
        members[id].push(nu.clone());
    }
    let all: Vec<TreeNode> = log.iter().map(|(n, _)| n.clone()).collect();
    let bounds = stage_bounds(src, &all, budget.stage, budget.mode);
    let chains = members
        .into_iter()
        .enumerate()
        .map(|(id, nodes)| Chain {
            id,
            bounds: nodes.iter().map(|n| BoundsReport::from(bounds.get(n).expect("bounded"))).collect(),
            nodes,
        })
        .collect();
    Ok(ChainPartition { stage: budget.stage, chains, anm, log, assignment })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::source::{dyadic_fixture, FiniteSource};
    use crate::presentation::{SharedPresentation, Standard};
    use crate::scalar::PExponent;
    use crate::tree::ComboMap;
    use crate::vectors::GenCombo;
    use std::sync::Arc;

    fn e1() -> SharedPresentation {
        Arc::new(Standard::new(PExponent::int(1)))
    }

    fn n(p: &[u64]) -> TreeNode {
        TreeNode::new(p)
    }

    #[test]
    fn dyadic_root_prefers_first_child() {
        let src = dyadic_fixture(e1());
        let a = find_anm_child(&src, &TreeNode::root(), &ChainBudget::default()).unwrap();
        assert_eq!(a.child, n(&[0]));
        assert!(!a.complete);
    }

    #[test]
    fn dyadic_partition() {
        let src = dyadic_fixture(e1());
        let part = partition_chains(&src, &ChainBudget { stage: 5, ..Default::default() }).unwrap();
        assert_eq!(part.chains[0].nodes, vec![TreeNode::root(), n(&[0])]);
        for i in 1..=5u64 {
            assert_eq!(part.chains[i as usize].nodes, vec![n(&[i])]);
        }
    }

    #[test]
    fn ties_go_to_least_node() {
        let m = ComboMap::from_pairs([(n(&[0]), GenCombo::unit(1)), (n(&[1]), GenCombo::unit(0))]).unwrap();
        let src = FiniteSource::summed(e1(), m);
        assert_eq!(find_anm_child(&src, &TreeNode::root(), &ChainBudget::default()).unwrap().child, n(&[0]));
    }

    #[test]
    fn terminal_is_refused() {
        let src = dyadic_fixture(e1());
        assert!(matches!(find_anm_child(&src, &n(&[2]), &ChainBudget::default()), Err(Error::NonterminalRequired(_))));
    }

    #[test]
    fn single_branch_is_one_chain() {
        let m = ComboMap::from_pairs([
            (n(&[0]), GenCombo::from_ratios(&[(0, 1, 1), (1, 1, 1)])),
            (n(&[0, 0]), GenCombo::from_ratios(&[(0, 1, 1), (1, 1, 1)])),
        ])
        .unwrap();
        let part = partition_chains(&FiniteSource::summed(e1(), m), &ChainBudget::default()).unwrap();
        assert_eq!(part.len(), 1);
        assert_eq!(part.chain_of(&n(&[0, 0])), Some(0));
    }
}
