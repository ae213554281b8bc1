//! Staged disintegration: `phi_hat_0 = {(0) -> f_j0}`, each next stage an approximate extension
//! of the last, and the normalized map read off the final stage.

use serde::Serialize;

use super::approx::{approximate_extend, ComputableMap, ExtendBudget};
use super::ball::{certify_ball, BallCertificate, RationalBall};
use crate::error::{Error, Result};
use crate::presentation::{certified_nonzero, SharedPresentation};
use crate::scalar::sigma::separated;
use crate::scalar::{Dyadic, GaussianRational};
use crate::tree::{ComboMap, FiniteTree, TreeNode};
use crate::vectors::{norm, GenCombo};

/// One stage: `phi_hat_n` and the radius `2^-k_n` of its certified ball.
#[derive(Clone, Debug, Serialize)]
pub struct Stage {
    pub n: u32,
    pub phi_hat: ComboMap,
    pub k: i64,
    pub certificate: BallCertificate,
    pub trace: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StagedDisintegration {
    pub j0: u64,
    pub stages: Vec<Stage>,
    /// The normalized map on the last domain, root included.
    pub psi: ComboMap,
    pub psi_root: GenCombo,
    /// Each value of `psi` is within `2^-precision` of the normalized limit.
    pub precision: i64,
}

impl StagedDisintegration {
    pub fn domain(&self, n: usize) -> &FiniteTree {
        self.stages[n].phi_hat.tree()
    }

    /// `phi_{n,t} = phi_hat_{n+t}|_{S_n}`.
    pub fn phi_nt(&self, n: usize, t: usize) -> Result<ComboMap> {
        let stage = self
            .stages
            .get(n + t)
            .ok_or_else(|| Error::InvalidInput(format!("stage {} of {}", n + t, self.stages.len())))?;
        stage.phi_hat.restrict(self.domain(n))
    }

    /// The best available approximation of `phi_n`, within `2^-k_n` of the limit.
    pub fn limit(&self, n: usize) -> Result<(ComboMap, i64)> {
        let last = self.stages.len() - 1;
        Ok((self.phi_nt(n, last.saturating_sub(n))?, self.stages[n].k))
    }
}

fn first_nonzero(pres: &SharedPresentation, budget: &ExtendBudget) -> Result<u64> {
    (0..=budget.max_generator)
        .find(|&j| certified_nonzero(&**pres, &GenCombo::unit(j), 32))
        .ok_or_else(|| Error::BudgetExhausted(format!("no generator up to {} is certified nonzero", budget.max_generator)))
}

/// `psi(nu) = 2^-nu(0) ||phi((nu(0)))||^-1 phi(nu)` and `psi(root)` the sum over the first level.
fn normalize(phi: &ComboMap, pres: &SharedPresentation, w: i64) -> Result<(ComboMap, GenCombo)> {
    let mut scales = std::collections::BTreeMap::new();
    for top in phi.tree().children(&TreeNode::root()) {
        let nrm = norm(&**pres, phi.at(&top), w + 8).mid();
        if !nrm.is_positive() {
            return Err(Error::NotAPartialDisintegration(format!("{top} has norm 0")));
        }
        let label = top.last().expect("first-level node");
        let c = Dyadic::pow2(-(label as i64)).to_rational() / nrm.to_rational();
        scales.insert(top, GaussianRational::real(c));
    }
    let psi = phi.map_values(|nu, v| v.scale(&scales[&TreeNode::new(&nu.path()[..1])]));
    let root = phi.tree().children(&TreeNode::root()).iter().map(|t| psi.at(t).clone()).sum();
    Ok((psi, root))
}

/// Builds `phi_hat_0, ..., phi_hat_{n_target}` and the normalized map of the last stage.
pub fn build_disintegration(pres: &SharedPresentation, n_target: u32, budget: &ExtendBudget) -> Result<StagedDisintegration> {
    separated(pres.exponent(), 32)?;
    let j0 = first_nonzero(pres, budget)?;
    let phi0 = ComboMap::from_pairs([(TreeNode::new(&[0]), GenCombo::unit(j0))])?;
    let mut trace = Vec::new();
    let mut first = None;
    for k in 2..64 {
        let cert = certify_ball(&RationalBall::dyadic(phi0.clone(), k), &ComboMap::empty(), 0, 0, &**pres, &budget.search);
        trace.push(cert.trace_line(&phi0));
        if cert.all_granted() {
            first = Some((k, cert));
            break;
        }
    }
    let (k0, cert0) = first.ok_or_else(|| Error::BudgetExhausted(format!("no certified ball around f_{j0}")))?;
    let mut stages = vec![Stage { n: 0, phi_hat: phi0, k: k0, certificate: cert0, trace }];
    for n in 0..n_target {
        let prev = stages.last().expect("at least one stage");
        let x = approximate_extend(&ComputableMap::from_combos(&prev.phi_hat), n + 1, prev.k + 1, pres, budget)?;
        stages.push(Stage { n: n + 1, phi_hat: x.center, k: x.radius_exp, certificate: x.certificate, trace: x.trace });
    }
    let last = stages.last().expect("at least one stage");
    let precision = last.k + 8;
    let (psi, psi_root) = normalize(&last.phi_hat, pres, precision)?;
    Ok(StagedDisintegration { j0, stages, psi, psi_root, precision })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::Standard;
    use crate::scalar::PExponent;
    use crate::vectors::sigma1;
    use std::sync::Arc;

    #[test]
    fn target_zero_is_first_generator() {
        let e: SharedPresentation = Arc::new(Standard::new(PExponent::int(1)));
        let d = build_disintegration(&e, 0, &ExtendBudget::default()).unwrap();
        assert_eq!(d.j0, 0);
        assert_eq!(d.stages.len(), 1);
        assert_eq!(d.stages[0].phi_hat.at(&TreeNode::new(&[0])), &GenCombo::unit(0));
    }

    #[test]
    fn p_two_is_refused() {
        let e: SharedPresentation = Arc::new(Standard::new(PExponent::int(2)));
        assert!(matches!(build_disintegration(&e, 1, &ExtendBudget::default()), Err(Error::PEqualsTwo)));
    }

    #[test]
    fn standard_stages_are_monotone() {
        let e: SharedPresentation = Arc::new(Standard::new(PExponent::parse("3/2").unwrap()));
        let d = build_disintegration(&e, 3, &ExtendBudget::default()).unwrap();
        for n in 0..3 {
            assert!(d.domain(n).is_subtree_of(d.domain(n + 1)));
            assert!(d.domain(n).len() < d.domain(n + 1).len());
            assert!(d.stages[n + 1].k > d.stages[n].k);
            let diff = d.phi_nt(n, 1).unwrap().sub(&d.phi_nt(n, 0).unwrap()).unwrap();
            let bound = Dyadic::pow2(-(d.stages[n].k + 1));
            assert!(crate::tree::tree_norm(&diff, &*e, 40).hi() < &bound);
        }
        let tops = d.psi.tree().children(&TreeNode::root());
        for (i, a) in tops.iter().enumerate() {
            let want = Dyadic::pow2(-(a.last().unwrap() as i64)).to_f64();
            assert!((norm(&*e, d.psi.at(a), 30).mid().to_f64() - want).abs() < 1e-6);
            for b in &tops[i + 1..] {
                assert!(sigma1(&*e, d.psi.at(a), d.psi.at(b), 30).hi() < &Dyadic::pow2(-20));
            }
        }
    }
}
