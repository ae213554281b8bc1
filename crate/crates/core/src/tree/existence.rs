//! The classical extension: every partial disintegration extends to one whose success index is
//! at least `N_0`, built in standard coordinates.

use serde::Serialize;

use super::map::TransparentMap;
use super::node::TreeNode;
use super::sigma::{validate_transparent, Verdict};
use super::success::{generators_transparent, success_index, SearchBudget, SuccessIndex};
use crate::error::{Error, Result};
use crate::presentation::Presentation;
use crate::scalar::Dyadic;
use crate::vectors::{norm_p, FinSuppVector, Index};

#[derive(Clone, Debug, Serialize)]
pub struct ExistenceReport {
    pub psi: TransparentMap,
    /// Every generator `f_j` (`j < N_0`) and every value of `phi` lies within `2^-(N_0+1)` of
    /// `<e_0, ..., e_{N_1}>`.
    pub n1: Index,
    /// New nodes are `nu_k ^ (k + offset)`; the offset is `#S` unless that collides with a label.
    pub label_offset: u64,
    pub success: SuccessIndex,
}

fn tail(v: &FinSuppVector, n1: Index) -> FinSuppVector {
    FinSuppVector::from_pairs(v.iter().filter(|(n, _)| *n > n1).map(|(n, z)| (n, z.clone())))
}

/// Extends `phi` by atoms `phi(nu_k) · e_k` (or `e_k` when no node carries `k`) for `k <= N_1`.
pub fn extend_existence<P: Presentation + ?Sized>(
    phi: &TransparentMap,
    n0: u32,
    pres: &P,
    budget: &SearchBudget,
) -> Result<ExistenceReport> {
    if let Verdict::CertifiedNo { witness } = validate_transparent(phi) {
        return Err(Error::NotAPartialDisintegration(format!("{witness:?}")));
    }
    let p = pres.exponent().clone();
    let gens = generators_transparent(pres, n0, n0 as i64 + 2)?;
    let mut vectors: Vec<&FinSuppVector> = gens.iter().map(|g| &g.vector).collect();
    vectors.extend(phi.iter().map(|(_, v)| v));
    let limit = Dyadic::pow2(-(n0 as i64 + 1));
    let top = vectors.iter().filter_map(|v| v.max_index()).max().unwrap_or(0);
    let n1 = (0..=top)
        .find(|&n1| vectors.iter().all(|v| norm_p(&tail(v, n1), &p, n0 as i64 + 8).hi() < &limit))
        .unwrap_or(top);

    let deepest = |k: Index| -> Option<TreeNode> {
        phi.iter().filter(|(_, v)| !v.get(k).is_zero()).map(|(n, _)| n.clone()).max_by_key(|n| n.len())
    };
    let plan: Vec<(Index, Option<TreeNode>)> = (0..=n1)
        .map(|k| (k, deepest(k)))
        .filter(|(_, nu)| match nu {
            None => true,
            Some(nu) => phi.at(nu).support_len() >= 2,
        })
        .collect();
    let size = phi.tree().len() as u64;
    let collides = plan.iter().any(|(k, nu)| {
        let base = nu.clone().unwrap_or_else(TreeNode::root);
        phi.tree().contains(&base.child(k + size))
    });
    let label_offset = if collides { size.max(phi.tree().max_label().map_or(0, |m| m + 1)) } else { size };

    let mut psi = phi.clone();
    for (k, nu) in plan {
        let (node, value) = match nu {
            None => (TreeNode::root().child(k + label_offset), FinSuppVector::unit(k)),
            Some(nu) => (nu.child(k + label_offset), FinSuppVector::scaled_unit(k, phi.at(&nu).get(k))),
        };
        psi.insert(node, value)?;
    }
    let success = success_index(&psi, &crate::vectors::LpSpace::new(p), &gens, n0, budget);
    Ok(ExistenceReport { psi, n1, label_offset, success })
}
