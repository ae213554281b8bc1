//! Nodes of `omega^{<omega}` and finite subtrees.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite sequence of naturals; the empty sequence is the root.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TreeNode(pub Vec<u64>);

impl TreeNode {
    pub fn root() -> Self {
        TreeNode(Vec::new())
    }

    pub fn new(path: &[u64]) -> Self {
        TreeNode(path.to_vec())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    /// `|nu|`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn path(&self) -> &[u64] {
        &self.0
    }

    /// `nu^-`; the root has no parent.
    pub fn parent(&self) -> Option<TreeNode> {
        if self.is_root() {
            None
        } else {
            Some(TreeNode(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    /// `nu ^ (n)`.
    pub fn child(&self, n: u64) -> TreeNode {
        let mut v = self.0.clone();
        v.push(n);
        TreeNode(v)
    }

    pub fn last(&self) -> Option<u64> {
        self.0.last().copied()
    }

    /// `self ⊆ other`.
    pub fn is_prefix_of(&self, other: &TreeNode) -> bool {
        other.0.starts_with(&self.0)
    }

    /// `self ⊂ other`, strictly.
    pub fn is_proper_prefix_of(&self, other: &TreeNode) -> bool {
        self.0.len() < other.0.len() && self.is_prefix_of(other)
    }

    pub fn comparable(&self, other: &TreeNode) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    /// Proper prefixes, root first.
    pub fn ancestors(&self) -> impl Iterator<Item = TreeNode> + '_ {
        (0..self.0.len()).map(|l| TreeNode(self.0[..l].to_vec()))
    }

    /// The map key form, e.g. `[0,1]`.
    pub fn key(&self) -> String {
        serde_json::to_string(&self.0).expect("vector of integers serializes")
    }

    pub fn parse_key(s: &str) -> Result<Self> {
        serde_json::from_str::<Vec<u64>>(s)
            .map(TreeNode)
            .map_err(|e| Error::Parse(format!("tree node key {s:?}: {e}")))
    }
}

impl fmt::Display for TreeNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_root() {
            return write!(f, "()");
        }
        let parts: Vec<String> = self.0.iter().map(|n| n.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A finite prefix-closed set of nodes containing the root.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteTree {
    nodes: BTreeSet<TreeNode>,
}

impl Default for FiniteTree {
    fn default() -> Self {
        FiniteTree::root_only()
    }
}

impl FiniteTree {
    /// `{∅}`.
    pub fn root_only() -> Self {
        FiniteTree { nodes: BTreeSet::from([TreeNode::root()]) }
    }

    /// Fails unless the nodes together with the root are prefix-closed.
    pub fn new<I: IntoIterator<Item = TreeNode>>(nodes: I) -> Result<Self> {
        let mut set: BTreeSet<TreeNode> = nodes.into_iter().collect();
        set.insert(TreeNode::root());
        for n in &set {
            if let Some(par) = n.parent() {
                if !set.contains(&par) {
                    return Err(Error::InvalidInput(format!("node {n} is present but its parent {par} is not")));
                }
            }
        }
        Ok(FiniteTree { nodes: set })
    }

    /// The smallest tree containing the given nodes.
    pub fn closure<I: IntoIterator<Item = TreeNode>>(nodes: I) -> Self {
        let mut set = BTreeSet::from([TreeNode::root()]);
        for n in nodes {
            set.extend(n.ancestors());
            set.insert(n);
        }
        FiniteTree { nodes: set }
    }

    pub fn contains(&self, n: &TreeNode) -> bool {
        self.nodes.contains(n)
    }

    /// `#S`, counting the root.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// All nodes in lexicographic order (root first).
    pub fn nodes(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes.iter()
    }

    /// `S - {∅}`.
    pub fn non_root(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes.iter().filter(|n| !n.is_root())
    }

    /// `nu^+_S`.
    pub fn children(&self, nu: &TreeNode) -> Vec<TreeNode> {
        let depth = nu.len() + 1;
        self.nodes
            .range(nu.clone()..)
            .take_while(|n| nu.is_prefix_of(n))
            .filter(|n| n.len() == depth)
            .cloned()
            .collect()
    }

    pub fn is_terminal(&self, nu: &TreeNode) -> bool {
        self.children(nu).is_empty()
    }

    pub fn insert(&mut self, nu: TreeNode) -> Result<()> {
        match nu.parent() {
            Some(par) if !self.nodes.contains(&par) => {
                Err(Error::InvalidInput(format!("cannot add {nu}: parent {par} missing")))
            }
            _ => {
                self.nodes.insert(nu);
                Ok(())
            }
        }
    }

    pub fn is_subtree_of(&self, other: &FiniteTree) -> bool {
        self.nodes.is_subset(&other.nodes)
    }

    /// Largest last label in the tree, if any non-root node exists.
    pub fn max_label(&self) -> Option<u64> {
        self.non_root().filter_map(|n| n.last()).max()
    }

    pub fn max_depth(&self) -> usize {
        self.nodes.iter().map(|n| n.len()).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(p: &[u64]) -> TreeNode {
        TreeNode::new(p)
    }

    #[test]
    fn node_relations() {
        assert!(n(&[0]).is_proper_prefix_of(&n(&[0, 1])));
        assert!(!n(&[0]).is_proper_prefix_of(&n(&[0])));
        assert!(!n(&[0]).comparable(&n(&[1, 0])));
        assert!(TreeNode::root().is_prefix_of(&n(&[3])));
        assert_eq!(n(&[0, 2]).parent(), Some(n(&[0])));
        assert_eq!(n(&[0, 2]).key(), "[0,2]");
        assert_eq!(TreeNode::parse_key("[0, 2]").unwrap(), n(&[0, 2]));
        assert_eq!(n(&[0, 2]).to_string(), "(0,2)");
    }

    #[test]
    fn trees() {
        assert!(FiniteTree::new([n(&[0, 0])]).is_err());
        let t = FiniteTree::new([n(&[0]), n(&[0, 0]), n(&[1]), n(&[0, 1])]).unwrap();
        assert_eq!(t.len(), 5);
        assert_eq!(t.children(&TreeNode::root()), vec![n(&[0]), n(&[1])]);
        assert_eq!(t.children(&n(&[0])), vec![n(&[0, 0]), n(&[0, 1])]);
        assert!(t.is_terminal(&n(&[1])));
        assert_eq!(FiniteTree::closure([n(&[2, 5])]).len(), 3);
        assert_eq!(t.max_label(), Some(1));
    }
}
