//! Stage-bounded norm accounting: `q(nu,t)` within `2^-(t+1)` of `||phi(nu)||^p` and the bounds
//! derived from it.

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use super::source::DisintegrationSource;
use crate::par::{self, ExecMode};
use crate::scalar::{format_rational, rat_pow2};
use crate::tree::TreeNode;
use crate::vectors::{norm, norm_pow};

/// Bounds for one node at stage `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeBounds {
    pub node: TreeNode,
    pub q: BigRational,
    /// `max(q - 2^-(t+1), 0)`
    pub m: BigRational,
    /// `q + 2^-(t+1)`
    pub big_m: BigRational,
}

#[derive(Clone, Debug)]
pub struct StageBounds {
    pub t: u64,
    pub entries: Vec<NodeBounds>,
}

impl StageBounds {
    /// `Sigma^-(X,t)`, a lower bound for the sum of `||phi(nu)||^p` over the nodes.
    pub fn sigma_minus(&self) -> BigRational {
        self.entries.iter().map(|e| e.m.clone()).sum()
    }

    /// `m-bar(X,t)`, a lower bound for the largest `||phi(nu)||^p`.
    pub fn m_bar(&self) -> BigRational {
        self.entries.iter().map(|e| e.m.clone()).max().unwrap_or_else(BigRational::zero)
    }

    /// Lexicographically least node maximizing `m`.
    pub fn argmax(&self) -> Option<&NodeBounds> {
        let best = self.m_bar();
        self.entries.iter().filter(|e| e.m == best).min_by(|a, b| a.node.cmp(&b.node))
    }

    pub fn get(&self, nu: &TreeNode) -> Option<&NodeBounds> {
        self.entries.iter().find(|e| &e.node == nu)
    }
}

/// Serializable view of one node's bounds.
#[derive(Clone, Debug, Serialize)]
pub struct BoundsReport {
    pub node: TreeNode,
    pub m: String,
    pub big_m: String,
}

impl From<&NodeBounds> for BoundsReport {
    fn from(b: &NodeBounds) -> Self {
        BoundsReport { node: b.node.clone(), m: format_rational(&b.m), big_m: format_rational(&b.big_m) }
    }
}

fn ceil_log2(x: f64) -> i64 {
    if x <= 1.0 {
        0
    } else {
        x.log2().ceil() as i64
    }
}

/// A rational within `2^-(t+1)` of `||phi(nu)||^p`.
pub fn q_value(src: &dyn DisintegrationSource, nu: &TreeNode, t: u64) -> BigRational {
    let pres = src.presentation();
    let t = t as i64;
    let p = pres.exponent().approx_f64();
    // |a^p - b^p| <= p B^{p-1} |a - b| with B bounding both norms
    let rough = src.value(nu, t + 3);
    let big_b = norm(&**pres, &rough, 4).hi().to_f64() + 1.0;
    let k = t + 3 + ceil_log2(p) + ((p - 1.0).max(0.0) * ceil_log2(big_b) as f64).ceil() as i64;
    let v = src.value(nu, k);
    norm_pow(&**pres, &v, t + 3).mid().to_rational()
}

pub fn node_bounds(src: &dyn DisintegrationSource, nu: &TreeNode, t: u64) -> NodeBounds {
    let q = q_value(src, nu, t);
    let slack = rat_pow2(-(t as i64 + 1));
    let m = (&q - &slack).max(BigRational::zero());
    let big_m = &q + &slack;
    NodeBounds { node: nu.clone(), q, m, big_m }
}

/// Bounds for every node of `nodes` at stage `t`, evaluated in parallel.
pub fn stage_bounds(src: &dyn DisintegrationSource, nodes: &[TreeNode], t: u64, mode: ExecMode) -> StageBounds {
    StageBounds { t, entries: par::map(mode, nodes, |nu| node_bounds(src, nu, t)) }
}
