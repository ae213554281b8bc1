//! Distance to the set `H_{phi,S'}` of strong reverse-order homomorphisms extending `phi`, and the
//! coordinatewise projection onto it.

use std::collections::BTreeSet;

use super::map::{TransparentMap, TreeMap};
use super::node::{FiniteTree, TreeNode};
use super::sigma::{hom_violation, sigma_tree, tree_norm, tree_norm_pow};
use crate::error::{Error, Result};
use crate::scalar::sigma::{abs_pow_w, modsq_pow_w};
use crate::scalar::transcendental::{pow_iv, refine};
use crate::scalar::{DyadicInterval, GaussianRational, PExponent};
use crate::vectors::{FinSuppVector, Index, LpSpace, NormSpace, Sparse};

/// `S ⊆ S'` and every non-root node of `S'` extends a non-root node of `S`. When `S = {∅}` nothing
/// is fixed and the condition is dropped.
pub fn check_hypothesis(s: &FiniteTree, s_prime: &FiniteTree) -> Result<()> {
    if !s.is_subtree_of(s_prime) {
        return Err(Error::InvalidInput("the smaller tree is not contained in the larger one".into()));
    }
    if s.len() == 1 {
        return Ok(());
    }
    for nu in s_prime.non_root() {
        if !nu.ancestors().skip(1).chain(std::iter::once(nu.clone())).any(|m| s.contains(&m)) {
            return Err(Error::HypothesisViolated(format!("{nu} extends no non-root node of the smaller tree")));
        }
    }
    Ok(())
}

fn require_hom(phi: &TransparentMap) -> Result<()> {
    match hom_violation(phi) {
        Some(w) => Err(Error::NotAPartialDisintegration(format!("{w:?}"))),
        None => Ok(()),
    }
}

fn two_pow_p(p: &PExponent, k: i64) -> DyadicInterval {
    refine(k, |w| modsq_pow_w(&DyadicInterval::from_int(4), p, w))
}

/// Encloses `||phi - psi|_{S-{∅}}||^p + 2^p sigma(phi ∪ psi|_{S'-S})`, which bounds
/// `d(psi, H_{phi,S'})^p` when every non-root node of `S'` extends one of `S`.
pub fn distance_bound<K, S>(phi: &TreeMap<K>, psi: &TreeMap<K>, space: &S, k: i64) -> Result<DyadicInterval>
where
    K: Send + Sync,
    S: NormSpace<Sparse<K>> + ?Sized,
{
    check_hypothesis(phi.tree(), psi.tree())?;
    let kk = k + 8;
    let near = tree_norm_pow(&psi.restrict(phi.tree())?.sub(phi)?, space, kk);
    let psi0 = phi.union_keep_left(psi)?;
    let sigma = sigma_tree(&psi0, space, kk)?;
    Ok(&near + &(&two_pow_p(space.exponent(), kk) * &sigma))
}

/// `sigma-hat(psi_0)(n)`: the coordinate-`n` share of `sigma(psi_0)` with every `sigma` replaced by
/// the min of the two `p`-th powers.
pub fn sigma_hat(psi0: &TransparentMap, p: &PExponent, n: Index, w: i64) -> DyadicInterval {
    let coord = |nu: &TreeNode| psi0.at(nu).get(n);
    let mut acc = DyadicInterval::zero();
    for (a, b) in psi0.incomparable_pairs() {
        let (x, y) = (coord(&a), coord(&b));
        if x.is_zero() || y.is_zero() {
            continue;
        }
        acc = &acc + &abs_pow_w(&x, p, w).min(&abs_pow_w(&y, p, w));
    }
    for (a, b) in psi0.nested_pairs() {
        let (x, y) = (coord(&a), coord(&b));
        if y.is_zero() || x == y {
            continue;
        }
        acc = &acc + &abs_pow_w(&(&y - &x), p, w).min(&abs_pow_w(&y, p, w));
    }
    acc
}

fn certified_above(x: &GaussianRational, s: impl Fn(i64) -> DyadicInterval, p: &PExponent, k: i64) -> bool {
    let mut w = k + 16;
    while w <= k + 256 {
        let a = abs_pow_w(x, p, w);
        let t = s(w);
        if a.certainly_lt(&t) || a.certainly_le(&t) {
            return false;
        }
        if t.certainly_lt(&a) {
            return true;
        }
        w *= 2;
    }
    false
}

/// Projects `psi` onto `H_{phi,S'}` coordinate by coordinate.
///
/// A coordinate of a new node is kept (copied from the parent's new value) when its `p`-th power
/// certainly exceeds `sigma-hat`; it is zeroed otherwise, and also whenever a node of `S`
/// incomparable with the new node already uses that coordinate. That second clause keeps the output
/// disjoint from `phi` on incomparable nodes without loosening `|psi - psi_1|^p <= 2^p sigma-hat`.
pub fn project_to_strong_hom(phi: &TransparentMap, psi: &TransparentMap, p: &PExponent, k: i64) -> Result<TransparentMap> {
    check_hypothesis(phi.tree(), psi.tree())?;
    require_hom(phi)?;
    let psi0 = phi.union_keep_left(psi)?;
    let mut out = phi.clone();
    for nu in psi.domain() {
        if phi.tree().contains(&nu) {
            continue;
        }
        let parent = nu.parent().expect("non-root node");
        let blocked: BTreeSet<Index> = phi
            .iter()
            .filter(|(m, _)| !m.comparable(&nu))
            .flat_map(|(_, v)| v.support())
            .collect();
        let mut v = FinSuppVector::zero();
        for (n, x) in psi.at(&nu).iter() {
            if blocked.contains(&n) || !certified_above(x, |w| sigma_hat(&psi0, p, n, w), p, k) {
                continue;
            }
            let z = if parent.is_root() { x.clone() } else { out.at(&parent).get(n) };
            v.set(n, z);
        }
        out.insert(nu, v)?;
    }
    Ok(out)
}

/// Exact `d(psi, H_{phi,S'})` when `S'` adds a single node to `S`; the hypothesis on `S'` is not
/// needed. The minimization decouples over coordinates of the free node.
pub fn exact_distance_single_free_node(
    phi: &TransparentMap,
    psi: &TransparentMap,
    p: &PExponent,
    k: i64,
) -> Result<DyadicInterval> {
    if !phi.tree().is_subtree_of(psi.tree()) {
        return Err(Error::InvalidInput("the smaller tree is not contained in the larger one".into()));
    }
    let free: Vec<TreeNode> = psi.domain().into_iter().filter(|n| !phi.tree().contains(n)).collect();
    let [nu] = free.as_slice() else {
        return Err(Error::InvalidInput(format!("expected one free node, found {}", free.len())));
    };
    require_hom(phi)?;
    let space = LpSpace::new(p.clone());
    let fixed = tree_norm(&psi.restrict(phi.tree())?.sub(phi)?, &space, k + 2);
    let parent = nu.parent().expect("non-root node");
    let blocked: BTreeSet<Index> =
        phi.iter().filter(|(m, _)| !m.comparable(nu)).flat_map(|(_, v)| v.support()).collect();
    let y = psi.at(nu).clone();
    let cost_w = |w: i64| -> DyadicInterval {
        y.iter()
            .map(|(n, x)| {
                if blocked.contains(&n) {
                    abs_pow_w(x, p, w)
                } else if parent.is_root() {
                    DyadicInterval::zero()
                } else {
                    let a = phi.at(&parent).get(n);
                    abs_pow_w(x, p, w).min(&abs_pow_w(&(x - &a), p, w))
                }
            })
            .sum()
    };
    let free_part = refine(k + 2, |w| {
        let c = cost_w(2 * w + 8);
        if c.hi().is_zero() {
            return DyadicInterval::zero();
        }
        pow_iv(&c, &p.recip_enclosure(w + 8), w)
    });
    Ok(fixed.max(&free_part).round_out(k + 1))
}
