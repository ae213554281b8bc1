//! Approximate extension: a partial disintegration within `2^-k` of `phi` on `S` whose success index
//! exceeds `N`, with values computable with respect to the presentation.
//!
//! The tree `S'` and the center `psi_0` come from splitting `f_0..f_J` and the values of `phi` into
//! disjoint cells. The center is accepted once its ball earns every certificate; replaying the cell
//! plan at higher precision gives the Cauchy sequence `psi_s` converging into the strong
//! homomorphisms on `S'`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use super::ball::{certify_ball, error_functional, BallCertificate, RationalBall};
use super::cells::{CellPlan, CellRun, Tolerance};
use crate::error::{Error, Result};
use crate::presentation::{ComputableVector, SharedPresentation};
use crate::scalar::sigma::separated;
use crate::scalar::{Dyadic, DyadicInterval, GaussianRational};
use crate::tree::{
    generators_combo, success_index, validate_partial_disintegration, ComboMap, FiniteTree, SearchBudget, SuccessIndex, TreeNode,
    Verdict,
};
use crate::vectors::{norm, GenCombo};

/// A tree map whose values are computable vectors over one presentation.
#[derive(Clone)]
pub struct ComputableMap {
    tree: FiniteTree,
    values: BTreeMap<TreeNode, ComputableVector>,
}

impl ComputableMap {
    pub fn new(values: BTreeMap<TreeNode, ComputableVector>) -> Result<Self> {
        let tree = FiniteTree::new(values.keys().cloned())?;
        if values.contains_key(&TreeNode::root()) {
            return Err(Error::InvalidInput("the root is not in the domain".into()));
        }
        Ok(ComputableMap { tree, values })
    }

    pub fn empty() -> Self {
        ComputableMap { tree: FiniteTree::root_only(), values: BTreeMap::new() }
    }

    pub fn from_combos(m: &ComboMap) -> Self {
        ComputableMap {
            tree: m.tree().clone(),
            values: m.iter().map(|(n, v)| (n.clone(), ComputableVector::constant(v.clone()))).collect(),
        }
    }

    pub fn tree(&self) -> &FiniteTree {
        &self.tree
    }

    pub fn get(&self, nu: &TreeNode) -> Option<&ComputableVector> {
        self.values.get(nu)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TreeNode, &ComputableVector)> {
        self.values.iter()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Every value within `2^-k`, hence the map within `2^-k` in the max norm.
    pub fn approx(&self, k: i64) -> ComboMap {
        ComboMap::new(self.tree.clone(), self.values.iter().map(|(n, v)| (n.clone(), v.approx(k))).collect())
            .expect("same tree")
    }
}

impl fmt::Debug for ComputableMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.values.iter().map(|(n, v)| (n.to_string(), v.label().to_string()))).finish()
    }
}

/// Limits for [`approximate_extend`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExtendBudget {
    /// Largest generator index the cell search may use.
    pub max_generator: u64,
    /// Precision doublings of the cell search before giving up.
    pub max_rounds: u32,
    pub search: SearchBudget,
}

impl Default for ExtendBudget {
    fn default() -> Self {
        ExtendBudget { max_generator: 64, max_rounds: 3, search: SearchBudget::default() }
    }
}

#[derive(Clone, Debug)]
enum Coef {
    /// The coefficient found when decomposing value number `.0`.
    Value(usize),
    One,
}

#[derive(Clone, Debug)]
struct Formula {
    cells: Vec<usize>,
    coef: Coef,
}

struct Plan {
    pres: SharedPresentation,
    cells: CellPlan,
    values: Vec<GenCombo>,
    formulas: BTreeMap<TreeNode, Formula>,
    tree: FiniteTree,
    cache: Mutex<HashMap<i64, ComboMap>>,
}

impl Plan {
    fn assemble(&self, run: &CellRun) -> ComboMap {
        let values = self
            .formulas
            .iter()
            .map(|(n, f)| {
                let v: GenCombo = f
                    .cells
                    .iter()
                    .map(|&i| match f.coef {
                        Coef::One => run.cells[i].clone(),
                        Coef::Value(v) => run.cells[i].scale(&run.coefs[v][i]),
                    })
                    .sum();
                (n.clone(), v)
            })
            .collect();
        ComboMap::new(self.tree.clone(), values).expect("formulas cover the tree")
    }

    fn run(&self, t: i64) -> ComboMap {
        if let Some(m) = self.cache.lock().expect("cache lock").get(&t) {
            return m.clone();
        }
        let run = self.cells.replay(&*self.pres, &self.values, Tolerance::new(t)).expect("replay follows recorded moves");
        let m = self.assemble(&run);
        self.cache.lock().expect("cache lock").insert(t, m.clone());
        m
    }
}

/// The outcome of [`approximate_extend`]: a certified center and the plan behind its refinements.
#[derive(Clone, Serialize)]
pub struct Extension {
    pub center: ComboMap,
    /// The ball `B(center; 2^-radius_exp)` earned `certificate`.
    pub radius_exp: i64,
    pub certificate: BallCertificate,
    /// Success index of the center, computed independently of the certificate.
    pub success: SuccessIndex,
    pub search_precision: i64,
    pub generators: u64,
    pub cells: usize,
    pub trace: Vec<String>,
    #[serde(skip)]
    plan: Arc<Plan>,
    #[serde(skip)]
    p_bits: i64,
}

impl fmt::Debug for Extension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Extension").field("center", &self.center).field("radius_exp", &self.radius_exp).finish()
    }
}

impl Extension {
    fn precision_for(&self, s: i64) -> i64 {
        self.search_precision + self.p_bits * s.max(0) + 8
    }

    /// `psi_s`, the plan replayed with `s` more bits of accuracy per unit of `p`.
    pub fn refinement(&self, s: u32) -> ComboMap {
        if s == 0 {
            return self.center.clone();
        }
        self.plan.run(self.precision_for(s as i64))
    }

    /// `E(psi_s)` for the strong homomorphisms on `S'`.
    pub fn refinement_error(&self, s: u32, k: i64) -> Result<DyadicInterval> {
        error_functional(&ComboMap::empty(), &self.refinement(s), &*self.plan.pres, k)
    }

    /// The limit map, each value approximated by replaying the plan.
    pub fn limit(&self) -> ComputableMap {
        let values = self
            .center
            .domain()
            .into_iter()
            .map(|nu| {
                let this = self.clone();
                let node = nu.clone();
                let label = format!("psi{nu}");
                let v = ComputableVector::from_fn(&label, move |k| {
                    let s = (k - this.radius_exp + 2).max(1);
                    this.plan.run(this.precision_for(s)).at(&node).clone()
                });
                (nu, v)
            })
            .collect();
        ComputableMap { tree: self.center.tree().clone(), values }
    }
}

fn top_of(nu: &TreeNode) -> TreeNode {
    TreeNode::new(&nu.path()[..1])
}

/// Largest label among the children of `nu`, plus one.
fn next_label(tree: &FiniteTree, nu: &TreeNode) -> u64 {
    tree.children(nu).iter().filter_map(|c| c.last()).max().map_or(0, |m| m + 1)
}

/// Lays out `S'` over the cells: new children split terminal nodes holding several cells,
/// collect the cells a nonterminal node has beyond its children, and put unused cells under the root.
fn layout(
    s: &FiniteTree,
    domain: &[TreeNode],
    used: &[BTreeSet<usize>],
    cell_count: usize,
) -> Result<(FiniteTree, BTreeMap<TreeNode, Formula>)> {
    let index: BTreeMap<&TreeNode, usize> = domain.iter().enumerate().map(|(i, n)| (n, i)).collect();
    for (i, a) in domain.iter().enumerate() {
        for (j, b) in domain.iter().enumerate().skip(i + 1) {
            let bad = if a.is_proper_prefix_of(b) {
                !used[j].is_subset(&used[i])
            } else if b.is_proper_prefix_of(a) {
                !used[i].is_subset(&used[j])
            } else {
                !used[i].is_disjoint(&used[j])
            };
            if bad {
                return Err(Error::BudgetExhausted(format!("cells of {a} and {b} are not nested or disjoint as the tree requires")));
            }
        }
    }
    let mut tree = s.clone();
    let mut formulas: BTreeMap<TreeNode, Formula> = BTreeMap::new();
    for (i, nu) in domain.iter().enumerate() {
        let top = index[&top_of(nu)];
        formulas.insert(nu.clone(), Formula { cells: used[i].iter().copied().collect(), coef: Coef::Value(top) });
        let kids = s.children(nu);
        let taken: BTreeSet<usize> = kids.iter().flat_map(|c| used[index[c]].iter().copied()).collect();
        let spare: Vec<usize> = used[i].difference(&taken).copied().collect();
        if kids.is_empty() && spare.len() < 2 {
            continue;
        }
        let mut label = next_label(s, nu);
        for c in spare {
            let child = nu.child(label);
            label += 1;
            tree.insert(child.clone())?;
            formulas.insert(child, Formula { cells: vec![c], coef: Coef::Value(top) });
        }
    }
    let taken: BTreeSet<usize> = s.children(&TreeNode::root()).iter().flat_map(|c| used[index[c]].iter().copied()).collect();
    let mut label = next_label(s, &TreeNode::root());
    for c in (0..cell_count).filter(|c| !taken.contains(c)) {
        let child = TreeNode::root().child(label);
        label += 1;
        tree.insert(child.clone())?;
        formulas.insert(child, Formula { cells: vec![c], coef: Coef::One });
    }
    Ok((tree, formulas))
}

/// Finds `psi` extending (an approximation of) `phi` with success index at least `n + 1` and
/// `||psi|_S - phi|| < 2^-k`, certified on a rational ball that meets the strong homomorphisms on `S'`.
pub fn approximate_extend(phi: &ComputableMap, n: u32, k: i64, pres: &SharedPresentation, budget: &ExtendBudget) -> Result<Extension> {
    let p = pres.exponent().clone();
    separated(&p, 32)?;
    let phi0 = phi.approx(k + 3);
    if let Verdict::CertifiedNo { witness } = validate_partial_disintegration(&phi0, &**pres, k + 8) {
        return Err(Error::NotAPartialDisintegration(format!("{witness:?}")));
    }
    let j_max = phi0.iter().filter_map(|(_, v)| v.max_index()).max().unwrap_or(0).max(n as u64);
    if j_max > budget.max_generator {
        return Err(Error::BudgetExhausted(format!("needs generator {j_max}, budget allows {}", budget.max_generator)));
    }
    let domain = phi0.domain();
    let values: Vec<GenCombo> = domain.iter().map(|nu| phi0.at(nu).clone()).collect();
    let p_bits = p.approx_f64().ceil() as i64;
    let t0 = p_bits * (k + n as i64 + 8) + 32;
    let mut trace = Vec::new();
    let mut last_err = None;
    for round in 0..budget.max_rounds {
        let tol = Tolerance::new(t0 << round);
        let (cells, run) = match CellPlan::decide(&**pres, j_max, &values, tol) {
            Ok(x) => x,
            Err(e) => {
                trace.push(format!("round {round}: {e}"));
                last_err = Some(e);
                continue;
            }
        };
        let cut = Dyadic::pow2(-(k + 3));
        if let Some(i) = run.residuals.iter().position(|r| norm(&**pres, r, k + 8).hi() >= &cut) {
            return Err(Error::BudgetExhausted(format!("value at {} is not spanned by f_0..f_{j_max}", domain[i])));
        }
        let floor = Dyadic::pow2(-tol.tau);
        let used: Vec<BTreeSet<usize>> = run
            .coefs
            .iter()
            .map(|cs| {
                cs.iter()
                    .enumerate()
                    .filter(|(i, c)| !c.is_zero() && norm(&**pres, &run.cells[*i].scale(c), tol.tau + 4).mid() > floor)
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        trace.push(format!("round {round}: cells={} moves={} precision={}", run.cells.len(), cells.operations(), tol.t));
        let (tree, formulas) = layout(phi0.tree(), &domain, &used, run.cells.len())?;
        let plan = Plan { pres: pres.clone(), cells, values: values.clone(), formulas, tree, cache: Mutex::new(HashMap::new()) };
        let center = plan.assemble(&run);
        let mut radius_exp = k + 2;
        for _ in 0..4 {
            let ball = RationalBall::dyadic(center.clone(), radius_exp);
            let cert = certify_ball(&ball, &phi0, n + 1, k + 1, &**pres, &budget.search);
            trace.push(cert.trace_line(&center));
            if cert.all_granted() {
                let gens = generators_combo(n + 1);
                let success = success_index(&center, &**pres, &gens, n + 1, &budget.search);
                let cells = run.cells.len();
                return Ok(Extension {
                    center,
                    radius_exp,
                    certificate: cert,
                    success,
                    search_precision: tol.t,
                    generators: j_max + 1,
                    cells,
                    trace,
                    plan: Arc::new(plan),
                    p_bits,
                });
            }
            // a small node or a close pair bounds the radius; aim for a quarter of G_1
            let g1 = cert.g1.as_ref().map_or(0.0, |g| g.lo_approx);
            radius_exp = if !cert.injective && g1 > 0.0 { (radius_exp + 2).max(2 - g1.log2().floor() as i64) } else { radius_exp + n as i64 + 2 };
        }
    }
    Err(last_err.unwrap_or_else(|| Error::BudgetExhausted(format!("no certified ball after {} rounds", budget.max_rounds))))
}

/// `sum_n 2^{-n/p} e_{n+1}` over the adversarial presentation, where `e_{n+1} = f_{n+1}`.
pub fn adversarial_tail(p: &crate::scalar::PExponent) -> ComputableVector {
    let p = p.clone();
    ComputableVector::from_fn("sum 2^{-n/p} f_{n+1}", move |k| {
        // the tail beyond n = m has p-th power sum_{n > m} 2^-n = 2^-m; stop once 2^{-m/p} < 2^-(k+1)
        let p_up = p.approx_f64().ceil() as i64;
        let m = (p_up * (k + 2)).max(0) as u64;
        let w = k + 8 + 64 - m.leading_zeros() as i64;
        GenCombo::from_pairs((0..=m).map(|n| {
            let c = crate::presentation::two_pow_neg_over_p(n, &p, w);
            (n + 1, GaussianRational::real(c.mid().to_rational()))
        }))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::{Adversarial, CeSet, Presentation, Standard};
    use crate::scalar::PExponent;
    use crate::tree::validate_transparent;
    use crate::vectors::FinSuppVector;
    use std::sync::Arc;

    fn n(p: &[u64]) -> TreeNode {
        TreeNode::new(p)
    }

    #[test]
    fn from_empty_over_standard() {
        let e: SharedPresentation = Arc::new(Standard::new(PExponent::parse("3/2").unwrap()));
        let x = approximate_extend(&ComputableMap::empty(), 1, 4, &e, &ExtendBudget::default()).unwrap();
        assert_eq!(x.center.domain(), vec![n(&[0]), n(&[1])]);
        assert_eq!(x.center.at(&n(&[0])), &GenCombo::unit(0));
        assert!(x.success.index >= 2);
        assert!(x.certificate.all_granted());
    }

    #[test]
    fn zero_node_is_rejected() {
        let e: SharedPresentation = Arc::new(Standard::new(PExponent::int(1)));
        let phi = ComboMap::from_pairs([(n(&[0]), GenCombo::zero())]).unwrap();
        let r = approximate_extend(&ComputableMap::from_combos(&phi), 1, 4, &e, &ExtendBudget::default());
        assert!(matches!(r, Err(Error::NotAPartialDisintegration(_))));
    }

    #[test]
    fn adversarial_example() {
        let pres = Adversarial::new(CeSet::explicit(&[1, 3]).unwrap(), PExponent::int(1));
        let shared: SharedPresentation = Arc::new(pres.clone());
        let phi = ComputableMap::new([(n(&[0]), adversarial_tail(&PExponent::int(1)))].into_iter().collect()).unwrap();
        let x = approximate_extend(&phi, 2, 4, &shared, &ExtendBudget::default()).unwrap();
        assert!(x.success.index >= 3);
        let t = x.center.map_values(|_, v| pres.transparent_eval(v, 30).unwrap());
        assert!(validate_transparent(&t).is_yes());
        let atom = FinSuppVector::from_ratios(&[(0, 3, 8)]);
        assert!(t.iter().any(|(_, v)| v == &atom));
        let s1 = x.refinement(1);
        assert!(crate::tree::tree_norm(&s1.sub(&x.center).unwrap(), &pres, 20).hi() < &Dyadic::pow2(-(x.radius_exp + 1)));
    }
}
