//! Isometry synthesis: disintegration, chain partition, chain limits, nonzero filter and
//! normalization, giving disjointly supported unit vectors `u_j` that generate the space.

use num_rational::BigRational;
use serde::Serialize;

use crate::chains::{chain_limit, partition_chains, ChainBudget, ChainLimit, FiniteSource, LimitStatus};
use crate::error::{Error, Result};
use crate::extension::{build_disintegration, ExtendBudget};
use crate::par;
use crate::presentation::{bit_bound, Certainty, ComputableVector, OracleAdapter, SharedPresentation};
use crate::scalar::transcendental::{ln2, ln_iv};
use crate::scalar::{Dyadic, DyadicInterval, GaussianRational, IntervalReport};
use crate::tree::{generators_combo, success_index, ComboMap, SearchBudget, TreeNode};
use crate::vectors::{norm, sigma1, FinSuppVector, GenCombo};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SynthBudget {
    pub extend: ExtendBudget,
    pub chains: ChainBudget,
    /// Largest number of extension stages tried.
    pub max_stages: u32,
    /// Chain limits are computed within `2^-k`.
    pub k: i64,
}

impl Default for SynthBudget {
    fn default() -> Self {
        SynthBudget { extend: ExtendBudget::default(), chains: ChainBudget::default(), max_stages: 16, k: 16 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct UnitVector {
    pub chain: usize,
    pub node: TreeNode,
    /// `u` within `2^-precision`.
    pub approx: GenCombo,
    pub norm: IntervalReport,
    #[serde(skip)]
    pub u: ComputableVector,
}

#[derive(Clone, Debug, Serialize)]
pub struct GenerationWitness {
    pub generator: u64,
    pub beta: Vec<(usize, GaussianRational)>,
    /// Upper bound on `||f_j - sum beta u||`.
    pub distance: IntervalReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct LedgerEntry {
    pub what: String,
    pub precision: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct IsometryApprox {
    pub presentation: String,
    pub stages: u32,
    pub vectors: Vec<UnitVector>,
    pub precision: i64,
    /// Largest `|  ||u_j|| - 1 |` bound.
    pub unit_defect: IntervalReport,
    /// Largest pairwise `sigma_1` enclosure.
    pub sigma1_max: Option<IntervalReport>,
    pub generation: Vec<GenerationWitness>,
    /// Largest `N'` with `d(f_j, span u) < 2^-N'` for every `j < N'`.
    pub achieved: u32,
    pub limits: Vec<ChainLimit>,
    pub certainty: Certainty,
    pub ledger: Vec<LedgerEntry>,
}

impl IsometryApprox {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn all_granted(&self, n: usize) -> bool {
        self.len() >= n && self.achieved as usize >= n
    }
}

/// `g / ||g||` as a computable vector.
pub fn normalized(pres: &SharedPresentation, g: &GenCombo, label: &str) -> Result<ComputableVector> {
    let rough = norm(&**pres, g, 8);
    if !rough.lo().is_positive() {
        let fine = norm(&**pres, g, 64);
        if !fine.lo().is_positive() {
            return Err(Error::InvalidInput(format!("{label} is not certified nonzero")));
        }
    }
    let pres = pres.clone();
    let g = g.clone();
    let lower_bits = -norm(&*pres, &g, 64).lo().floor_log2().unwrap_or(0);
    Ok(ComputableVector::from_fn(label, move |k| {
        // | ||g||/a - 1 | <= width / a < 2^-k
        let n = norm(&*pres, &g, k + 2 + lower_bits.max(0));
        let a = n.mid().to_rational();
        g.scale(&GaussianRational::real(BigRational::from_integer(1.into()) / a))
    }))
}

fn unit_vectors(pres: &SharedPresentation, limits: &[ChainLimit], k: i64) -> Result<Vec<UnitVector>> {
    limits
        .iter()
        .filter(|l| l.status != LimitStatus::Zero && !l.g.is_zero())
        .map(|l| {
            let u = normalized(pres, &l.g, &format!("u[chain {}]", l.chain))?;
            let approx = u.approx(k);
            let nrm = norm(&**pres, &approx, k);
            Ok(UnitVector { chain: l.chain, node: l.node.clone(), norm: IntervalReport::from(&nrm), approx, u })
        })
        .collect()
}

fn generation(pres: &SharedPresentation, vectors: &[UnitVector], n: u32, k: i64, search: &SearchBudget) -> (Vec<GenerationWitness>, u32) {
    if vectors.is_empty() {
        return (Vec::new(), 0);
    }
    let flat = ComboMap::from_pairs(vectors.iter().enumerate().map(|(i, v)| (TreeNode::new(&[i as u64]), v.approx.clone())))
        .expect("flat tree");
    let found = success_index(&flat, &**pres, &generators_combo(n), n, search);
    let slack = Dyadic::pow2(-k);
    let (witnesses, bounds): (Vec<GenerationWitness>, Vec<Dyadic>) = found
        .witnesses
        .iter()
        .enumerate()
        .map(|(j, w)| {
            let beta: Vec<(usize, GaussianRational)> =
                w.beta.iter().map(|(nu, b)| (nu.last().expect("flat") as usize, b.clone())).collect();
            let combo: GenCombo = beta.iter().map(|(i, b)| vectors[*i].approx.scale(b)).sum();
            let d = norm(&**pres, &(&GenCombo::unit(j as u64) - &combo), k);
            // the approximations of u are within 2^-k; |beta_i| <= 2^bits
            let mass: i64 = beta.iter().map(|(_, b)| 1i64 << bit_bound(b).min(40)).sum();
            let d = d.widen(&(&slack * &Dyadic::from_int(mass)));
            (GenerationWitness { generator: j as u64, beta, distance: IntervalReport::from(&d) }, d.hi().clone())
        })
        .unzip();
    let mut achieved = 0;
    for m in 1..=n {
        if bounds.len() >= m as usize && bounds[..m as usize].iter().all(|b| b < &Dyadic::pow2(-(m as i64))) {
            achieved = m;
        } else {
            break;
        }
    }
    (witnesses, achieved)
}

/// Synthesizes `u_0, ..., u_{n-1}`, adding extension stages until `n` nonzero chain limits
/// generate `f_0, ..., f_{n-1}` to within `2^-n`.
pub fn synthesize_isometry(pres: &SharedPresentation, n: usize, budget: &SynthBudget, oracle: &OracleAdapter) -> Result<IsometryApprox> {
    let k = budget.k;
    let mut last_err = None;
    for stages in (n.saturating_sub(2) as u32).max(1)..=budget.max_stages {
        let d = build_disintegration(pres, stages, &budget.extend)?;
        let src = FiniteSource::from_staged(&d, pres.clone());
        let chains = ChainBudget { stage: 0, ..budget.chains };
        let part = partition_chains(&src, &chains)?;
        let limits: Vec<ChainLimit> =
            par::map(budget.chains.mode, &part.chains, |c| chain_limit(&src, c, oracle, k, &chains)).into_iter().collect::<Result<_>>()?;
        let mut vectors = unit_vectors(pres, &limits, k)?;
        if vectors.len() < n {
            last_err = Some(Error::BudgetExhausted(format!("{} nonzero chain limits after {stages} stages", vectors.len())));
            continue;
        }
        vectors.truncate(n);
        let (generation, achieved) = generation(pres, &vectors, n as u32, k, &budget.extend.search);
        if (achieved as usize) < n {
            last_err = Some(Error::BudgetExhausted(format!("generation certified to {achieved} after {stages} stages")));
            continue;
        }
        let one = DyadicInterval::one();
        let unit_defect = vectors
            .iter()
            .map(|v| (&norm(&**pres, &v.approx, k + 4) - &one).abs().widen(&Dyadic::pow2(-k)))
            .reduce(|a, b| a.max(&b))
            .unwrap_or_else(DyadicInterval::zero);
        let mut sigma_max: Option<DyadicInterval> = None;
        for (i, a) in vectors.iter().enumerate() {
            for b in &vectors[i + 1..] {
                let s = sigma1(&**pres, &a.approx, &b.approx, k);
                sigma_max = Some(sigma_max.map_or(s.clone(), |m| m.max(&s)));
            }
        }
        let certainty = limits.iter().fold(Certainty::Exact, |c, l| c.and(l.certainty));
        let ledger = vec![
            LedgerEntry { what: "last stage ball radius".into(), precision: d.stages.last().expect("stage").k },
            LedgerEntry { what: "normalized map".into(), precision: d.precision },
            LedgerEntry { what: "chain limits and unit vectors".into(), precision: k },
        ];
        return Ok(IsometryApprox {
            presentation: pres.name(),
            stages,
            vectors,
            precision: k,
            unit_defect: IntervalReport::from(&unit_defect),
            sigma1_max: sigma_max.as_ref().map(IntervalReport::from),
            generation,
            achieved,
            limits,
            certainty,
            ledger,
        });
    }
    Err(last_err.unwrap_or_else(|| Error::BudgetExhausted(format!("no stages within budget {}", budget.max_stages))))
}

/// `sum x_j u_j` within `2^-k`.
pub fn apply_isometry(t: &IsometryApprox, x: &FinSuppVector, k: i64) -> Result<GenCombo> {
    if let Some(j) = x.max_index() {
        if j as usize >= t.len() {
            return Err(Error::IndexOutOfRange { index: j, len: t.len() });
        }
    }
    // each term within 2^-(k + 1 + log2 |support| + bits)
    let spread = 64 - (x.support_len() as u64).leading_zeros() as i64;
    Ok(x
        .iter()
        .map(|(j, z)| t.vectors[j as usize].u.approx(k + 1 + spread + bit_bound(z)).scale(z))
        .sum())
}

#[derive(Clone, Debug, Serialize)]
pub struct RecoveredP {
    pub p: IntervalReport,
    /// Enclosure of `||u_0 + u_1||`, which is `2^{1/p}`.
    pub norm: IntervalReport,
    pub certainty: Certainty,
}

/// `p = 1 / log2 ||u_0 + u_1||` from two synthesized disjointly supported unit vectors.
pub fn recover_p(pres: &SharedPresentation, budget: &SynthBudget, oracle: &OracleAdapter) -> Result<RecoveredP> {
    let t = synthesize_isometry(pres, 2, budget, oracle)?;
    let k = budget.k;
    let sum = &t.vectors[0].approx + &t.vectors[1].approx;
    // each approximation is within 2^-k of its unit vector
    let nrm = norm(&**pres, &sum, k + 4).widen(&Dyadic::pow2(-(k - 1)));
    let w = k + 8;
    let log2 = ln_iv(&nrm, w)
        .div(&ln2(w), w)
        .filter(|l| l.lo().is_positive())
        .ok_or_else(|| Error::BudgetExhausted("||u_0 + u_1|| not certified above 1".into()))?;
    let p = DyadicInterval::one().div(&log2, w).ok_or_else(|| Error::BudgetExhausted("log enclosure too wide".into()))?;
    Ok(RecoveredP { p: IntervalReport::from(&p), norm: IntervalReport::from(&nrm), certainty: t.certainty })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::{CeSet, Presentation, Rotated, Standard};
    use crate::scalar::PExponent;
    use crate::vectors::norm_p;
    use std::sync::Arc;

    fn oracle() -> OracleAdapter {
        OracleAdapter::transparent(CeSet::explicit(&[1]).unwrap())
    }

    /// Index `m` and distance to the nearest unimodular multiple of `e_m`.
    fn nearest_atom(pres: &dyn Presentation, u: &GenCombo) -> (u64, f64) {
        let t = pres.transparent_eval(u, 30).unwrap();
        let (m, z) = t.iter().max_by(|a, b| a.1.norm_sqr().cmp(&b.1.norm_sqr())).unwrap();
        let modulus = crate::scalar::transcendental::sqrt_iv(&DyadicInterval::from_rational(&z.norm_sqr(), 40), 30).mid().to_rational();
        let phase = z.scale(&(BigRational::from_integer(1.into()) / modulus));
        let diff = &t - &FinSuppVector::scaled_unit(m, phase);
        (m, norm_p(&diff, pres.exponent(), 20).hi().to_f64())
    }

    #[test]
    fn standard_and_rotated() {
        let e: SharedPresentation = Arc::new(Standard::new(PExponent::parse("3/2").unwrap()));
        let r: SharedPresentation = Arc::new(Rotated::new(PExponent::int(1), GaussianRational::i()).unwrap());
        for pres in [e, r] {
            let t = synthesize_isometry(&pres, 4, &SynthBudget::default(), &oracle()).unwrap();
            assert!(t.all_granted(4));
            let mut seen = std::collections::BTreeSet::new();
            for v in &t.vectors {
                let (m, d) = nearest_atom(&*pres, &v.approx);
                assert!(d < 2f64.powi(-8));
                assert!(seen.insert(m));
            }
        }
    }

    #[test]
    fn apply_examples() {
        let e: SharedPresentation = Arc::new(Standard::new(PExponent::int(1)));
        let t = synthesize_isometry(&e, 2, &SynthBudget::default(), &oracle()).unwrap();
        assert!(apply_isometry(&t, &FinSuppVector::zero(), 10).unwrap().is_zero());
        let u0 = apply_isometry(&t, &FinSuppVector::unit(0), 10).unwrap();
        assert!(norm(&*e, &(&u0 - &t.vectors[0].approx), 20).hi() < &Dyadic::pow2(-10));
        let two = apply_isometry(&t, &FinSuppVector::from_ratios(&[(0, 1, 1), (1, 1, 1)]), 10).unwrap();
        let n = norm(&*e, &two, 20);
        assert!((n.mid().to_f64() - 2.0).abs() < 2f64.powi(-9));
        assert!(matches!(apply_isometry(&t, &FinSuppVector::unit(5), 10), Err(Error::IndexOutOfRange { index: 5, len: 2 })));
    }

    #[test]
    fn p_is_recovered() {
        for (p, want) in [("1", 1.0), ("3/2", 1.5), ("3", 3.0)] {
            let e: SharedPresentation = Arc::new(Standard::new(PExponent::parse(p).unwrap()));
            let r = recover_p(&e, &SynthBudget::default(), &oracle()).unwrap();
            assert!(r.p.lo_approx <= want && want <= r.p.hi_approx, "p = {p}: {:?}", r.p);
            assert!(r.p.hi_approx - r.p.lo_approx < 2f64.powi(-6));
        }
    }
}
