//! Disintegrations as the chain machinery sees them: nodes enumerated by stage, values to any
//! precision.

use std::sync::Arc;

use num_rational::BigRational;

use crate::extension::StagedDisintegration;
use crate::presentation::SharedPresentation;
use crate::scalar::rat_pow2;
use crate::tree::{ComboMap, FiniteTree, TreeNode};
use crate::vectors::GenCombo;

pub trait DisintegrationSource: Send + Sync {
    fn presentation(&self) -> &SharedPresentation;

    /// Nodes enumerated by stage `t`: prefix closed, root included, growing in `t`.
    fn enumerated(&self, t: u64) -> FiniteTree;

    /// First stage after which the enumeration stops growing, if there is one.
    fn final_stage(&self) -> Option<u64>;

    /// True when `nu` has no children at any stage.
    fn is_terminal(&self, nu: &TreeNode) -> bool;

    /// `phi(nu)` within `2^-k`.
    fn value(&self, nu: &TreeNode, k: i64) -> GenCombo;

    /// `||inf phi[chain]||^p` for the almost norm-maximizing chain through `nu`, when the source
    /// knows it exactly.
    fn chain_infimum(&self, _nu: &TreeNode) -> Option<BigRational> {
        None
    }
}

/// A finite map with its root value. With `gradual`, a node is enumerated at the stage equal to
/// the largest label on its path.
pub struct FiniteSource {
    pres: SharedPresentation,
    map: ComboMap,
    root: GenCombo,
    gradual: bool,
}

impl FiniteSource {
    pub fn new(pres: SharedPresentation, map: ComboMap, root: GenCombo) -> Self {
        FiniteSource { pres, map, root, gradual: false }
    }

    /// Root value the sum of the first level.
    pub fn summed(pres: SharedPresentation, map: ComboMap) -> Self {
        let root = map.tree().children(&TreeNode::root()).iter().map(|n| map.at(n).clone()).sum();
        FiniteSource::new(pres, map, root)
    }

    pub fn gradual(mut self) -> Self {
        self.gradual = true;
        self
    }

    /// The normalized map of a staged build.
    pub fn from_staged(d: &StagedDisintegration, pres: SharedPresentation) -> Self {
        FiniteSource::new(pres, d.psi.clone(), d.psi_root.clone())
    }

    /// The last stage of a staged build, before normalization.
    pub fn from_last_stage(d: &StagedDisintegration, pres: SharedPresentation) -> Self {
        FiniteSource::summed(pres, d.stages.last().expect("at least one stage").phi_hat.clone())
    }

    pub fn map(&self) -> &ComboMap {
        &self.map
    }

    fn stage_of(nu: &TreeNode) -> u64 {
        nu.path().iter().copied().max().unwrap_or(0)
    }
}

impl DisintegrationSource for FiniteSource {
    fn presentation(&self) -> &SharedPresentation {
        &self.pres
    }

    fn enumerated(&self, t: u64) -> FiniteTree {
        if !self.gradual {
            return self.map.tree().clone();
        }
        FiniteTree::closure(self.map.tree().nodes().filter(|n| Self::stage_of(n) <= t).cloned())
    }

    fn final_stage(&self) -> Option<u64> {
        if self.gradual {
            Some(self.map.tree().max_label().unwrap_or(0))
        } else {
            Some(0)
        }
    }

    fn is_terminal(&self, nu: &TreeNode) -> bool {
        self.map.tree().is_terminal(nu)
    }

    fn value(&self, nu: &TreeNode, _k: i64) -> GenCombo {
        if nu.is_root() {
            self.root.clone()
        } else {
            self.map.at(nu).clone()
        }
    }
}

type Enumerate = dyn Fn(u64) -> Vec<TreeNode> + Send + Sync;
type Value = dyn Fn(&TreeNode, i64) -> GenCombo + Send + Sync;
type Predicate = dyn Fn(&TreeNode) -> bool + Send + Sync;
type Infimum = dyn Fn(&TreeNode) -> Option<BigRational> + Send + Sync;

/// A possibly infinite disintegration given by closures.
#[derive(Clone)]
pub struct FnSource {
    pub pres: SharedPresentation,
    pub enumerate: Arc<Enumerate>,
    pub value: Arc<Value>,
    pub terminal: Arc<Predicate>,
    pub infimum: Option<Arc<Infimum>>,
}

impl DisintegrationSource for FnSource {
    fn presentation(&self) -> &SharedPresentation {
        &self.pres
    }

    fn enumerated(&self, t: u64) -> FiniteTree {
        FiniteTree::closure((self.enumerate)(t))
    }

    fn final_stage(&self) -> Option<u64> {
        None
    }

    fn is_terminal(&self, nu: &TreeNode) -> bool {
        (self.terminal)(nu)
    }

    fn value(&self, nu: &TreeNode, k: i64) -> GenCombo {
        (self.value)(nu, k)
    }

    fn chain_infimum(&self, nu: &TreeNode) -> Option<BigRational> {
        self.infimum.as_ref().and_then(|f| f(nu))
    }
}

/// `phi(root) = sum_n 2^-n e_n`, `phi((n)) = 2^-n e_n`, with `(n)` enumerated at stage `n`.
/// Over `pres` the generators play the part of `e_n`, so it is a disintegration for the standard
/// presentation.
pub fn dyadic_fixture(pres: SharedPresentation) -> FnSource {
    FnSource {
        pres,
        enumerate: Arc::new(|t| (0..=t).map(|n| TreeNode::new(&[n])).collect()),
        value: Arc::new(|nu, k| match nu.last() {
            Some(n) => GenCombo::scaled_unit(n, crate::scalar::GaussianRational::real(rat_pow2(-(n as i64)))),
            // the tail past m has norm at most 2^-m for p >= 1
            None => GenCombo::from_pairs(
                (0..=(k.max(0) as u64 + 1)).map(|n| (n, crate::scalar::GaussianRational::real(rat_pow2(-(n as i64))))),
            ),
        }),
        terminal: Arc::new(|nu| !nu.is_root()),
        infimum: None,
    }
}
