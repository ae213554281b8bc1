//! The success index: how closely a partial disintegration approximates a disintegration.

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use super::map::TreeMap;
use super::node::TreeNode;
use crate::error::Result;
use crate::par::{self, ExecMode};
use crate::presentation::Presentation;
use crate::scalar::{Dyadic, DyadicInterval, GaussianRational, IntervalReport};
use crate::vectors::{norm, Coords, FinSuppVector, GenCombo, Gens, NormSpace, Sparse};

/// An approximation `vector` of a generator `f_j` with `||f_j - vector|| <= error`.
#[derive(Clone, Debug)]
pub struct GeneratorApprox<K> {
    pub vector: Sparse<K>,
    pub error: Dyadic,
}

/// `f_0, ..., f_{n-1}` as formal combinations (no error).
pub fn generators_combo(n: u32) -> Vec<GeneratorApprox<Gens>> {
    (0..n as u64).map(|j| GeneratorApprox { vector: GenCombo::unit(j), error: Dyadic::zero() }).collect()
}

/// `f_0, ..., f_{n-1}` in standard coordinates, each within `2^-k`.
pub fn generators_transparent<P: Presentation + ?Sized>(
    pres: &P,
    n: u32,
    k: i64,
) -> Result<Vec<GeneratorApprox<Coords>>> {
    (0..n as u64)
        .map(|j| {
            let v: FinSuppVector = pres.transparent_eval(&GenCombo::unit(j), k)?;
            Ok(GeneratorApprox { vector: v, error: Dyadic::pow2(-k) })
        })
        .collect()
}

/// Limits on the coefficient search behind `d(f_j, <ran psi>) < 2^-N`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SearchBudget {
    /// Norm evaluations per generator.
    pub max_evals: usize,
    pub mode: ExecMode,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_evals: 2000, mode: ExecMode::default() }
    }
}

/// Coefficients `beta(j, nu)` witnessing the distance of one generator to the span.
#[derive(Clone, Debug, Serialize)]
pub struct SpanWitness {
    pub beta: Vec<(TreeNode, GaussianRational)>,
    /// Upper bound on `||f_j - sum beta psi||`, generator error included.
    pub distance: IntervalReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuccessIndex {
    /// Certified lower bound on the success index.
    pub index: u32,
    /// Whether the clauses were certified for `N = 0`; the index is floored at 0 regardless.
    pub zero_certified: bool,
    pub witnesses: Vec<SpanWitness>,
    /// `max ||psi(nu) - sum psi(nu^+)||` over non-root nonterminal nodes.
    pub summation_defect: Option<IntervalReport>,
}

fn combine<K>(psi: &TreeMap<K>, beta: &[(TreeNode, GaussianRational)]) -> Sparse<K> {
    beta.iter().filter(|(_, b)| !b.is_zero()).map(|(n, b)| psi.at(n).scale(b)).sum()
}

/// `argmin_b ||g - b B||` candidates in formal coordinates: the ratio at the largest entry of
/// `B` and the least-squares coefficient.
fn block_candidates<K>(g: &Sparse<K>, block: &Sparse<K>) -> Vec<GaussianRational> {
    let mut out = vec![GaussianRational::zero()];
    if block.is_zero() {
        return out;
    }
    let (n_star, b_star) = block
        .iter()
        .max_by(|(_, x), (_, y)| x.norm_sqr().cmp(&y.norm_sqr()))
        .map(|(n, z)| (n, z.clone()))
        .expect("nonzero block");
    out.push(&g.get(n_star) * &b_star.inv().expect("nonzero entry"));
    let num: GaussianRational = block.iter().fold(GaussianRational::zero(), |acc, (n, z)| &acc + &(&g.get(n) * &z.conj()));
    let den: BigRational = block.iter().map(|(_, z)| z.norm_sqr()).sum();
    out.push(num.scale(&den.recip()));
    out
}

/// Best span coefficients found for `g` within the evaluation budget.
fn best_beta<K, S>(
    psi: &TreeMap<K>,
    space: &S,
    g: &Sparse<K>,
    target: &Dyadic,
    k: i64,
    max_evals: usize,
) -> (Vec<(TreeNode, GaussianRational)>, DyadicInterval)
where
    K: Send + Sync,
    S: NormSpace<Sparse<K>> + ?Sized,
{
    let nodes = psi.domain();
    let eval = |beta: &[(TreeNode, GaussianRational)]| norm(space, &(g - &combine(psi, beta)), k);
    if nodes.is_empty() {
        return (Vec::new(), eval(&[]));
    }
    // laminar blocks B_nu = psi(nu) - sum psi(children); sum b_nu B_nu has beta_nu = b_nu - b_parent
    let mut b: std::collections::BTreeMap<TreeNode, GaussianRational> = std::collections::BTreeMap::new();
    for nu in &nodes {
        let block = psi.summation_defect(nu);
        let restricted: Sparse<K> = Sparse::from_pairs(block.iter().map(|(n, _)| (n, g.get(n))));
        let best = block_candidates(g, &block)
            .into_iter()
            .map(|c| {
                let r = norm(space, &(&restricted - &block.scale(&c)), 8);
                (c, r.mid())
            })
            .min_by(|x, y| x.1.cmp(&y.1))
            .map(|(c, _)| c)
            .unwrap_or_else(GaussianRational::zero);
        b.insert(nu.clone(), best);
    }
    let mut beta: Vec<(TreeNode, GaussianRational)> = nodes
        .iter()
        .map(|nu| {
            let parent = nu.parent().and_then(|p| b.get(&p).cloned()).unwrap_or_else(GaussianRational::zero);
            (nu.clone(), &b[nu] - &parent)
        })
        .collect();
    let mut best = eval(&beta);
    let mut evals = 1 + nodes.len() * 3;
    let zero: Vec<_> = nodes.iter().map(|n| (n.clone(), GaussianRational::zero())).collect();
    let at_zero = eval(&zero);
    evals += 1;
    if at_zero.mid() < best.mid() {
        beta = zero;
        best = at_zero;
    }
    // pattern search over the real and imaginary parts, halving the step
    let mut step_exp = 1;
    while best.hi() >= target && evals < max_evals && step_exp <= k {
        let step = crate::scalar::rational::rat_pow2(-step_exp);
        let mut improved = false;
        for i in 0..beta.len() {
            for dir in [
                GaussianRational::real(step.clone()),
                GaussianRational::real(-step.clone()),
                GaussianRational::new(BigRational::zero(), step.clone()),
                GaussianRational::new(BigRational::zero(), -step.clone()),
            ] {
                if evals >= max_evals {
                    break;
                }
                let mut trial = beta.clone();
                trial[i].1 = &trial[i].1 + &dir;
                let v = eval(&trial);
                evals += 1;
                if v.mid() < best.mid() {
                    beta = trial;
                    best = v;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step_exp += 1;
        }
    }
    (beta, best)
}

/// Largest `N <= n_max` for which `d(f_j, <ran psi>) < 2^-N` (`j < N`) is witnessed by explicit
/// coefficients and every summation defect is certified below `2^-N`. A failed search only caps
/// the result; it never refutes.
pub fn success_index<K, S>(
    psi: &TreeMap<K>,
    space: &S,
    gens: &[GeneratorApprox<K>],
    n_max: u32,
    budget: &SearchBudget,
) -> SuccessIndex
where
    K: Send + Sync,
    S: NormSpace<Sparse<K>> + ?Sized,
{
    let k = n_max as i64 + 8;
    let inner = psi.inner_nodes();
    let defects = par::map(budget.mode, &inner, |nu| norm(space, &psi.summation_defect(nu), k));
    let defect = defects.into_iter().reduce(|a, b| a.max(&b));
    let target = Dyadic::pow2(-(n_max as i64 + 1));
    let count = (n_max as usize).min(gens.len());
    let found = par::map(budget.mode, &gens[..count], |g| {
        let (beta, d) = best_beta(psi, space, &g.vector, &target, k, budget.max_evals);
        (beta, DyadicInterval::new(d.lo().clone(), d.hi() + &g.error))
    });
    let bounds: Vec<Dyadic> = found.iter().map(|(_, d)| d.hi().clone()).collect();
    let found = found
        .into_iter()
        .map(|(beta, d)| SpanWitness { beta, distance: IntervalReport::from(&d) })
        .collect();
    let defect_ok = |n: u32| defect.as_ref().is_none_or(|d| d.hi() < &Dyadic::pow2(-(n as i64)));
    let mut index = 0;
    for n in 1..=n_max {
        let span_ok = (n as usize) <= count && bounds[..n as usize].iter().all(|b| b < &Dyadic::pow2(-(n as i64)));
        if span_ok && defect_ok(n) {
            index = n;
        } else {
            break;
        }
    }
    SuccessIndex {
        index,
        zero_certified: defect_ok(0),
        witnesses: found,
        summation_defect: defect.as_ref().map(IntervalReport::from),
    }
}
