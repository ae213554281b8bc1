//! Tree-indexed maps `S - {∅} -> l^p` and their JSON form.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::node::{FiniteTree, TreeNode};
use crate::error::{Error, Result};
use crate::vectors::{Coords, Gens, Sparse};

/// A map on the non-root nodes of a finite tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeMap<K> {
    tree: FiniteTree,
    values: BTreeMap<TreeNode, Sparse<K>>,
}

/// Values in standard coordinates.
pub type TransparentMap = TreeMap<Coords>;
/// Values as rational combinations of a presentation's generators.
pub type ComboMap = TreeMap<Gens>;

impl<K> Default for TreeMap<K> {
    fn default() -> Self {
        TreeMap::empty()
    }
}

impl<K> TreeMap<K> {
    /// The empty map on `{∅}`.
    pub fn empty() -> Self {
        TreeMap { tree: FiniteTree::root_only(), values: BTreeMap::new() }
    }

    /// Fails unless every non-root node of `tree` is mapped and nothing else is.
    pub fn new(tree: FiniteTree, values: BTreeMap<TreeNode, Sparse<K>>) -> Result<Self> {
        if values.contains_key(&TreeNode::root()) {
            return Err(Error::InvalidInput("the root is not in the domain".into()));
        }
        for n in values.keys() {
            if !tree.contains(n) {
                return Err(Error::InvalidInput(format!("value given for {n}, which is not in the tree")));
            }
        }
        if let Some(n) = tree.non_root().find(|n| !values.contains_key(*n)) {
            return Err(Error::InvalidInput(format!("node {n} has no value")));
        }
        Ok(TreeMap { tree, values })
    }

    /// Builds the tree from the mapped nodes; they must be prefix-closed.
    pub fn from_pairs<I: IntoIterator<Item = (TreeNode, Sparse<K>)>>(pairs: I) -> Result<Self> {
        let values: BTreeMap<TreeNode, Sparse<K>> = pairs.into_iter().collect();
        let tree = FiniteTree::new(values.keys().cloned())?;
        TreeMap::new(tree, values)
    }

    pub fn tree(&self) -> &FiniteTree {
        &self.tree
    }

    pub fn get(&self, nu: &TreeNode) -> Option<&Sparse<K>> {
        self.values.get(nu)
    }

    /// Value at `nu`, panicking when `nu` is not in the domain.
    pub fn at(&self, nu: &TreeNode) -> &Sparse<K> {
        self.values.get(nu).unwrap_or_else(|| panic!("{nu} is not in the domain"))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TreeNode, &Sparse<K>)> {
        self.values.iter()
    }

    pub fn domain(&self) -> Vec<TreeNode> {
        self.values.keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Adds a node whose parent is already present.
    pub fn insert(&mut self, nu: TreeNode, v: Sparse<K>) -> Result<()> {
        if nu.is_root() {
            return Err(Error::InvalidInput("the root is not in the domain".into()));
        }
        self.tree.insert(nu.clone())?;
        self.values.insert(nu, v);
        Ok(())
    }

    /// Replaces the value at an existing node.
    pub fn set(&mut self, nu: &TreeNode, v: Sparse<K>) -> Result<()> {
        match self.values.get_mut(nu) {
            Some(slot) => {
                *slot = v;
                Ok(())
            }
            None => Err(Error::InvalidInput(format!("{nu} is not in the domain"))),
        }
    }

    /// `psi|_{S - {∅}}` for a subtree `S`.
    pub fn restrict(&self, sub: &FiniteTree) -> Result<Self> {
        if !sub.is_subtree_of(&self.tree) {
            return Err(Error::InvalidInput("restriction to a tree that is not a subtree".into()));
        }
        let values = sub.non_root().map(|n| (n.clone(), self.values[n].clone())).collect();
        Ok(TreeMap { tree: sub.clone(), values })
    }

    /// `self ∪ other|_{dom(other) - dom(self)}`.
    pub fn union_keep_left(&self, other: &TreeMap<K>) -> Result<Self> {
        let mut values = other.values.clone();
        for (n, v) in &self.values {
            values.insert(n.clone(), v.clone());
        }
        TreeMap::from_pairs(values)
    }

    /// True when `other` is defined wherever `self` is, with equal values.
    pub fn is_extended_by(&self, other: &TreeMap<K>) -> bool {
        self.values.iter().all(|(n, v)| other.values.get(n) == Some(v))
    }

    pub fn map_values<L, F: Fn(&TreeNode, &Sparse<K>) -> Sparse<L>>(&self, f: F) -> TreeMap<L> {
        TreeMap {
            tree: self.tree.clone(),
            values: self.values.iter().map(|(n, v)| (n.clone(), f(n, v))).collect(),
        }
    }

    /// Pointwise difference on a common domain.
    pub fn sub(&self, other: &TreeMap<K>) -> Result<Self> {
        if self.tree != other.tree {
            return Err(Error::InvalidInput("difference of maps on different trees".into()));
        }
        Ok(self.map_values(|n, v| v - &other.values[n]))
    }

    /// `psi(nu) - sum_{nu' in nu^+} psi(nu')`.
    pub fn summation_defect(&self, nu: &TreeNode) -> Sparse<K> {
        let kids: Sparse<K> = self.tree.children(nu).iter().map(|c| self.values[c].clone()).sum();
        &self.values[nu] - &kids
    }

    /// Non-root nonterminal nodes.
    pub fn inner_nodes(&self) -> Vec<TreeNode> {
        self.tree.non_root().filter(|n| !self.tree.is_terminal(n)).cloned().collect()
    }

    /// Pairs `(nu, nu')` with `nu ⊂ nu'`, both non-root.
    pub fn nested_pairs(&self) -> Vec<(TreeNode, TreeNode)> {
        let nodes = self.domain();
        let mut out = Vec::new();
        for a in &nodes {
            for b in &nodes {
                if a.is_proper_prefix_of(b) {
                    out.push((a.clone(), b.clone()));
                }
            }
        }
        out
    }

    /// Unordered incomparable pairs of non-root nodes.
    pub fn incomparable_pairs(&self) -> Vec<(TreeNode, TreeNode)> {
        let nodes = self.domain();
        let mut out = Vec::new();
        for (i, a) in nodes.iter().enumerate() {
            for b in &nodes[i + 1..] {
                if !a.comparable(b) {
                    out.push((a.clone(), b.clone()));
                }
            }
        }
        out
    }
}

#[derive(Deserialize)]
struct TreeMapRepr<V> {
    tree: Vec<TreeNode>,
    map: BTreeMap<String, V>,
}

/// Map entries in node order rather than key-string order.
struct NodeKeyed<'a, K>(&'a BTreeMap<TreeNode, Sparse<K>>);

impl<K> Serialize for NodeKeyed<'_, K> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_map(self.0.iter().map(|(n, v)| (n.key(), v)))
    }
}

impl<K> Serialize for TreeMap<K> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("TreeMap", 2)?;
        st.serialize_field("tree", &self.tree.non_root().collect::<Vec<_>>())?;
        st.serialize_field("map", &NodeKeyed(&self.values))?;
        st.end()
    }
}

impl<'de, K> Deserialize<'de> for TreeMap<K> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = TreeMapRepr::<Sparse<K>>::deserialize(d)?;
        let tree = FiniteTree::new(repr.tree.into_iter().filter(|n| !n.is_root())).map_err(D::Error::custom)?;
        let mut values = BTreeMap::new();
        for (k, v) in repr.map {
            values.insert(TreeNode::parse_key(&k).map_err(D::Error::custom)?, v);
        }
        TreeMap::new(tree, values).map_err(D::Error::custom)
    }
}
