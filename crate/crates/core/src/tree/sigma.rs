//! `||psi||_S`, the functional `sigma(psi)` and validation of partial disintegrations.

use serde::Serialize;

use super::map::{TransparentMap, TreeMap};
use super::node::TreeNode;
use crate::error::Result;
use crate::par::{self, ExecMode};
use crate::scalar::sigma::{lamperti_constant_w, refine_fallible, separated};
use crate::scalar::DyadicInterval;
use crate::vectors::{is_disjointly_supported, norm, norm_pow, precedes, sigma1_w, NormSpace, Sparse};

/// `max_nu ||psi(nu)||`, with the empty max taken as 0.
pub fn tree_norm<K, S>(psi: &TreeMap<K>, space: &S, k: i64) -> DyadicInterval
where
    K: Send + Sync,
    S: NormSpace<Sparse<K>> + ?Sized,
{
    psi.iter().map(|(_, v)| norm(space, v, k)).fold(DyadicInterval::zero(), |acc, x| acc.max(&x))
}

/// `max_nu ||psi(nu)||^p`, the empty max again 0.
pub fn tree_norm_pow<K, S>(psi: &TreeMap<K>, space: &S, k: i64) -> DyadicInterval
where
    K: Send + Sync,
    S: NormSpace<Sparse<K>> + ?Sized,
{
    psi.iter().map(|(_, v)| norm_pow(space, v, k)).fold(DyadicInterval::zero(), |acc, x| acc.max(&x))
}

/// The pairs entering `sigma(psi)`: incomparable pairs `(f, g)` and nested pairs
/// `(psi(nu') - psi(nu), psi(nu'))` for `nu ⊂ nu'`.
fn sigma_pairs<K>(psi: &TreeMap<K>) -> Vec<(Sparse<K>, Sparse<K>)> {
    let mut out: Vec<(Sparse<K>, Sparse<K>)> =
        psi.incomparable_pairs().into_iter().map(|(a, b)| (psi.at(&a).clone(), psi.at(&b).clone())).collect();
    for (a, b) in psi.nested_pairs() {
        let (fa, fb) = (psi.at(&a), psi.at(&b));
        out.push((fb - fa, fb.clone()));
    }
    out
}

/// Enclosure of `sigma(psi)` at working precision `w`; `None` while `c_p` is unresolved.
pub fn sigma_tree_w<K, S>(mode: ExecMode, psi: &TreeMap<K>, space: &S, w: i64) -> Option<DyadicInterval>
where
    K: Send + Sync,
    S: NormSpace<Sparse<K>> + ?Sized,
{
    let pairs = sigma_pairs(psi);
    let extra = 64 - (pairs.len() as u64).leading_zeros() as i64 + 4;
    let c = lamperti_constant_w(space.exponent(), w + extra)?;
    let terms = par::map(mode, &pairs, |(f, g)| sigma1_w(space, f, g, w + extra));
    let total: DyadicInterval = terms.into_iter().sum();
    Some(&c * &total)
}

/// Enclosure of `sigma(psi)` of width at most `2^-k`, from norm queries only.
pub fn sigma_tree<K, S>(psi: &TreeMap<K>, space: &S, k: i64) -> Result<DyadicInterval>
where
    K: Send + Sync,
    S: NormSpace<Sparse<K>> + ?Sized,
{
    sigma_tree_with(ExecMode::default(), psi, space, k)
}

pub fn sigma_tree_with<K, S>(mode: ExecMode, psi: &TreeMap<K>, space: &S, k: i64) -> Result<DyadicInterval>
where
    K: Send + Sync,
    S: NormSpace<Sparse<K>> + ?Sized,
{
    separated(space.exponent(), k)?;
    if psi.len() < 2 {
        return Ok(DyadicInterval::zero());
    }
    refine_fallible(k, |w| sigma_tree_w(mode, psi, space, w).ok_or(crate::Error::PEqualsTwo))
}

/// Why a map fails to be a partial disintegration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    ZeroValue { node: TreeNode },
    NotInjective { a: TreeNode, b: TreeNode },
    NotDisjoint { a: TreeNode, b: TreeNode },
    NotBelow { ancestor: TreeNode, node: TreeNode },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    CertifiedYes,
    CertifiedNo { witness: Witness },
    Undecided { reason: String },
}

impl Verdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, Verdict::CertifiedYes)
    }

    pub fn is_no(&self) -> bool {
        matches!(self, Verdict::CertifiedNo { .. })
    }
}

/// First violation of the strong reverse-order homomorphism clauses, by exact support checks.
pub fn hom_violation(psi: &TransparentMap) -> Option<Witness> {
    for (a, b) in psi.nested_pairs() {
        if !precedes(psi.at(&b), psi.at(&a)) {
            return Some(Witness::NotBelow { ancestor: a, node: b });
        }
    }
    for (a, b) in psi.incomparable_pairs() {
        if !is_disjointly_supported(psi.at(&a), psi.at(&b)) {
            return Some(Witness::NotDisjoint { a, b });
        }
    }
    None
}

/// Exact check in standard coordinates: nonzero values, order-reversing into `≼`, disjoint on
/// incomparable nodes, injective.
pub fn validate_transparent(psi: &TransparentMap) -> Verdict {
    if let Some((n, _)) = psi.iter().find(|(_, v)| v.is_zero()) {
        return Verdict::CertifiedNo { witness: Witness::ZeroValue { node: n.clone() } };
    }
    if let Some(w) = hom_violation(psi) {
        return Verdict::CertifiedNo { witness: w };
    }
    let nodes = psi.domain();
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            if psi.at(a) == psi.at(b) {
                return Verdict::CertifiedNo { witness: Witness::NotInjective { a: a.clone(), b: b.clone() } };
            }
        }
    }
    Verdict::CertifiedYes
}

enum Check {
    Pass,
    Fail(Witness),
    Open(String),
}

/// Validation through norm enclosures at precision `k`: a clause passes when its `sigma_1`
/// enclosure is exactly 0, fails when it is certified positive, and is left open otherwise.
pub fn validate_partial_disintegration<K, S>(psi: &TreeMap<K>, space: &S, k: i64) -> Verdict
where
    K: Send + Sync,
    S: NormSpace<Sparse<K>> + ?Sized,
{
    let mut checks: Vec<Check> = Vec::new();
    for (n, v) in psi.iter() {
        let e = norm_pow(space, v, k);
        checks.push(if e.is_exact_zero() {
            Check::Fail(Witness::ZeroValue { node: n.clone() })
        } else if e.is_positive() {
            Check::Pass
        } else {
            Check::Open(format!("norm of {n} not separated from 0"))
        });
    }
    let sigma_check = |f: &Sparse<K>, g: &Sparse<K>, fail: Witness, what: String| {
        let s = crate::scalar::sigma::refine_fallible(k, |w| Ok(sigma1_w(space, f, g, w)))
            .unwrap_or_else(|_| DyadicInterval::zero());
        if s.is_exact_zero() {
            Check::Pass
        } else if s.is_positive() {
            Check::Fail(fail)
        } else {
            Check::Open(what)
        }
    };
    for (a, b) in psi.nested_pairs() {
        let (fa, fb) = (psi.at(&a), psi.at(&b));
        let w = Witness::NotBelow { ancestor: a.clone(), node: b.clone() };
        checks.push(sigma_check(&(fb - fa), fb, w, format!("order clause for {a} ⊂ {b}")));
    }
    for (a, b) in psi.incomparable_pairs() {
        let w = Witness::NotDisjoint { a: a.clone(), b: b.clone() };
        checks.push(sigma_check(psi.at(&a), psi.at(&b), w, format!("disjointness of {a}, {b}")));
    }
    let nodes = psi.domain();
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            let d = norm_pow(space, &(psi.at(a) - psi.at(b)), k);
            checks.push(if d.is_exact_zero() {
                Check::Fail(Witness::NotInjective { a: a.clone(), b: b.clone() })
            } else if d.is_positive() {
                Check::Pass
            } else {
                Check::Open(format!("{a}, {b} not separated"))
            });
        }
    }
    let mut open = None;
    for c in checks {
        match c {
            Check::Fail(w) => return Verdict::CertifiedNo { witness: w },
            Check::Open(r) if open.is_none() => open = Some(r),
            _ => {}
        }
    }
    match open {
        Some(reason) => Verdict::Undecided { reason: format!("{reason} at precision {k}") },
        None => Verdict::CertifiedYes,
    }
}
