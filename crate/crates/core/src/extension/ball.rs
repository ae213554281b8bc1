//! Rational balls in `l^p_{S'-{∅}}` (max norm over nodes) and the certificates granted to them.

use num_rational::BigRational;
use num_traits::Signed;
use serde::{Serialize, Serializer};

use super::cells::modulus_upper;
use crate::presentation::Presentation;
use crate::scalar::sigma::abs_pow_w;
use crate::scalar::{format_rational, Dyadic, DyadicInterval, GaussianRational, IntervalReport};
use crate::tree::{
    check_hypothesis, distance_bound, generators_combo, success_index, tree_norm, ComboMap, SearchBudget, SpanWitness,
};
use crate::vectors::{norm, GenCombo};

fn ser_rational<S: Serializer>(q: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(q))
}

/// `B(center; radius)` in the max norm over nodes.
#[derive(Clone, Debug, Serialize)]
pub struct RationalBall {
    pub center: ComboMap,
    #[serde(serialize_with = "ser_rational")]
    pub radius: BigRational,
}

impl RationalBall {
    pub fn new(center: ComboMap, radius: BigRational) -> crate::Result<Self> {
        if !radius.is_positive() {
            return Err(crate::Error::InvalidInput("ball radius must be positive".into()));
        }
        Ok(RationalBall { center, radius })
    }

    pub fn dyadic(center: ComboMap, exp: i64) -> Self {
        RationalBall { center, radius: crate::scalar::rational::rat_pow2(-exp) }
    }

    /// `pi_{S'}`: the center restricted to the non-root nodes of `s`.
    pub fn project(&self, s: &crate::tree::FiniteTree) -> crate::Result<ComboMap> {
        self.center.restrict(s)
    }
}

/// Flags granted to a closed ball, each backed by a strict interval inequality at `precision`.
#[derive(Clone, Debug, Serialize)]
pub struct BallCertificate {
    pub precision: i64,
    pub radius: String,
    pub level: u32,
    /// Inside `M_{S'}` and never zero: `G_1(center) - 2r > 0`, with `G_1` also covering `||psi(nu)||`.
    pub injective: bool,
    pub g1: Option<IntervalReport>,
    /// Inside `S_{S',N}`: `G_2(center) + (1 + m) r < 2^-N`, `m` the node's number of children.
    pub summative: bool,
    pub g2: Option<IntervalReport>,
    /// Inside `Delta_{S',N,beta}` for the recorded `beta`: `G_3,beta(center) + r sum |beta| < 2^-N`.
    pub spanning: bool,
    pub g3: Option<IntervalReport>,
    pub beta: Vec<SpanWitness>,
    /// Inside `pi_{S'}^{-1}[B(phi; 2^-k)]`.
    pub near_phi: bool,
    pub phi_distance: IntervalReport,
    /// `E(center)^{1/p} < r` for `H_{phi,S'}`; absent when some node of `S'` extends no node of `S`.
    pub meets_h_phi: Option<bool>,
    /// `E(center)^{1/p} < r` for `H_{∅,S'}`, the strong homomorphisms on `S'`.
    pub meets_h: bool,
    pub error: Option<IntervalReport>,
}

impl BallCertificate {
    /// The ball lies in `M ∩ S ∩ Delta ∩ pi^{-1}[B(phi; 2^-k)]` and meets the strong homomorphisms.
    pub fn all_granted(&self) -> bool {
        self.injective && self.summative && self.spanning && self.near_phi && self.meets_h
    }

    pub fn trace_line(&self, center: &ComboMap) -> String {
        let flag = |b: bool| if b { '+' } else { '-' };
        format!(
            "ball nodes={} radius={} flags=M{}S{}D{}P{}H{} N={} precision={}",
            center.len(),
            self.radius,
            flag(self.injective),
            flag(self.summative),
            flag(self.spanning),
            flag(self.near_phi),
            flag(self.meets_h),
            self.level,
            self.precision
        )
    }
}

/// Encloses `E(psi) = ||psi|_S - phi||^p + 2^p sigma(phi ∪ psi|_{S'-S})`, whose `p`-th root bounds
/// `d(psi, H_{phi,S'})`.
pub fn error_functional<P: Presentation + ?Sized>(phi: &ComboMap, psi: &ComboMap, pres: &P, k: i64) -> crate::Result<DyadicInterval> {
    distance_bound(phi, psi, pres, k)
}

fn below_radius_pow(e: &DyadicInterval, r: &BigRational, pres: &(impl Presentation + ?Sized), w: i64) -> bool {
    let rp = abs_pow_w(&GaussianRational::real(r.clone()), pres.exponent(), w);
    e.hi() < rp.lo()
}

/// Checks which certificates the closed ball earns for level `n` and proximity `2^-k` to `phi`.
pub fn certify_ball<P: Presentation + ?Sized>(
    ball: &RationalBall,
    phi: &ComboMap,
    n: u32,
    k: i64,
    pres: &P,
    budget: &SearchBudget,
) -> BallCertificate {
    let psi = &ball.center;
    let radius_bits = -Dyadic::floor_rational(&ball.radius, 64).floor_log2().unwrap_or(0);
    let w = (n as i64).max(k).max(radius_bits) + 12;
    let r = DyadicInterval::from_rational(&ball.radius, w + 8);
    let two_r = r.scale_pow2(1);
    let limit = DyadicInterval::point(Dyadic::pow2(-(n as i64)));

    let nodes = psi.domain();
    let mut g1: Option<DyadicInterval> = None;
    let mut take_min = |x: DyadicInterval| g1 = Some(g1.as_ref().map_or(x.clone(), |m| m.min(&x)));
    for (i, a) in nodes.iter().enumerate() {
        take_min(norm(pres, psi.at(a), w));
        for b in &nodes[i + 1..] {
            take_min(norm(pres, &(psi.at(a) - psi.at(b)), w));
        }
    }
    let injective = g1.as_ref().is_none_or(|g| two_r.certainly_lt(g));

    let inner = psi.inner_nodes();
    let mut g2: Option<DyadicInterval> = None;
    let mut summative = true;
    for nu in &inner {
        let d = norm(pres, &psi.summation_defect(nu), w);
        let fan = psi.tree().children(nu).len() as i64 + 1;
        summative &= (&d + &(&r * &DyadicInterval::from_int(fan))).certainly_lt(&limit);
        g2 = Some(g2.map_or(d.clone(), |m| m.max(&d)));
    }

    let gens = generators_combo(n);
    let found = success_index(psi, pres, &gens, n, budget);
    let mut g3: Option<DyadicInterval> = None;
    let mut spanning = true;
    for (j, wit) in found.witnesses.iter().enumerate() {
        let combo: GenCombo = wit.beta.iter().map(|(nu, b)| psi.at(nu).scale(b)).sum();
        let d = norm(pres, &(&GenCombo::unit(j as u64) - &combo), w);
        let mass: BigRational = wit.beta.iter().map(|(_, b)| modulus_upper(b)).sum();
        let slack = &r * &DyadicInterval::from_rational(&mass, w + 8);
        spanning &= (&d + &slack).certainly_lt(&limit);
        g3 = Some(g3.map_or(d.clone(), |m| m.max(&d)));
    }

    let near = if phi.is_empty() {
        DyadicInterval::zero()
    } else {
        match psi.restrict(phi.tree()).and_then(|x| x.sub(phi)) {
            Ok(diff) => tree_norm(&diff, pres, w),
            Err(_) => DyadicInterval::point(Dyadic::from_int(i64::MAX)),
        }
    };
    let near_phi = (&near + &r).certainly_lt(&DyadicInterval::point(Dyadic::pow2(-k)));

    // comparing with r^p needs about p times the bits of r
    let we = (pres.exponent().approx_f64().ceil() as i64) * (radius_bits + 2) + 16;
    let empty = ComboMap::empty();
    let e_free = error_functional(&empty, psi, pres, we).ok();
    let meets_h = e_free.as_ref().is_some_and(|e| below_radius_pow(e, &ball.radius, pres, we));
    let meets_h_phi = match check_hypothesis(phi.tree(), psi.tree()) {
        Err(_) => None,
        Ok(()) => Some(
            error_functional(phi, psi, pres, we)
                .ok()
                .is_some_and(|e| below_radius_pow(&e, &ball.radius, pres, we)),
        ),
    };

    BallCertificate {
        precision: w,
        radius: format_rational(&ball.radius),
        level: n,
        injective,
        g1: g1.as_ref().map(IntervalReport::from),
        summative,
        g2: g2.as_ref().map(IntervalReport::from),
        spanning,
        g3: g3.as_ref().map(IntervalReport::from),
        beta: found.witnesses,
        near_phi,
        phi_distance: IntervalReport::from(&near),
        meets_h_phi,
        meets_h,
        error: e_free.as_ref().map(IntervalReport::from),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::Standard;
    use crate::scalar::{rat, PExponent};
    use crate::tree::{FiniteTree, TreeNode};

    fn n(p: &[u64]) -> TreeNode {
        TreeNode::new(p)
    }

    fn basis_map(count: u64) -> ComboMap {
        ComboMap::from_pairs((0..count).map(|j| (n(&[j]), GenCombo::unit(j)))).unwrap()
    }

    #[test]
    fn basis_ball_gets_every_flag() {
        let e = Standard::new(PExponent::parse("3/2").unwrap());
        let ball = RationalBall::dyadic(basis_map(4), 6);
        let c = certify_ball(&ball, &ComboMap::empty(), 2, 4, &e, &SearchBudget::default());
        assert!(c.all_granted(), "{c:?}");
        assert_eq!(c.meets_h_phi, Some(true));
        for (j, w) in c.beta.iter().enumerate() {
            assert_eq!(w.beta.iter().find(|(nu, _)| nu == &n(&[j as u64])).unwrap().1, GaussianRational::one());
        }
    }

    #[test]
    fn withheld_flags() {
        let e = Standard::new(PExponent::int(1));
        let twins = ComboMap::from_pairs([(n(&[0]), GenCombo::unit(0)), (n(&[1]), GenCombo::unit(0))]).unwrap();
        let c = certify_ball(&RationalBall::dyadic(twins, 6), &ComboMap::empty(), 0, 4, &e, &SearchBudget::default());
        assert!(!c.injective);
        assert!(!c.meets_h);
        // min pairwise distance is 2 (p = 1), so radius 1 is too big
        let huge = RationalBall::new(basis_map(2), rat(1, 1)).unwrap();
        let c = certify_ball(&huge, &ComboMap::empty(), 0, 4, &e, &SearchBudget::default());
        assert!(!c.injective);
        assert!(RationalBall::new(basis_map(1), rat(0, 1)).is_err());
    }

    #[test]
    fn error_functional_examples() {
        let e = Standard::new(PExponent::int(1));
        let phi = ComboMap::from_pairs([(n(&[0]), GenCombo::from_ratios(&[(0, 1, 1), (1, 1, 1)]))]).unwrap();
        let hom = ComboMap::from_pairs([
            (n(&[0]), GenCombo::from_ratios(&[(0, 1, 1), (1, 1, 1)])),
            (n(&[0, 0]), GenCombo::unit(0)),
            (n(&[0, 1]), GenCombo::unit(1)),
        ])
        .unwrap();
        assert!(error_functional(&phi, &hom, &e, 30).unwrap().is_exact_zero());
        // a defect delta e_9 on both nodes: ||psi(0) - phi(0)|| = delta, and the only sigma term is
        // the nested pair, sigma_1(psi(0,0) - phi(0), psi(0,0)) = sigma_1(delta e_9 - e_1, e_0 + delta e_9)
        // = 2 delta, so E = delta + 2 c_1 (2 delta)
        let delta = rat(1, 64);
        let d9 = (9, GaussianRational::real(delta.clone()));
        let one = GaussianRational::one();
        let perturbed = ComboMap::from_pairs([
            (n(&[0]), GenCombo::from_pairs([(0, one.clone()), (1, one.clone()), d9.clone()])),
            (n(&[0, 0]), GenCombo::from_pairs([(0, one), d9])),
        ])
        .unwrap();
        let got = error_functional(&phi, &perturbed, &e, 30).unwrap();
        let c1 = crate::scalar::lamperti_constant(&PExponent::int(1), 40).unwrap();
        let expect = &(&c1 * &DyadicInterval::from_rational(&(&delta * rat(4, 1)), 40)) + &DyadicInterval::from_rational(&delta, 40);
        assert!(got.overlaps(&expect), "{got} vs {expect}");
        let bad = ComboMap::from_pairs([(n(&[0]), GenCombo::unit(0)), (n(&[1]), GenCombo::unit(0))]).unwrap();
        let s = FiniteTree::new([n(&[0])]).unwrap();
        let phi = bad.restrict(&s).unwrap();
        assert!(matches!(error_functional(&phi, &bad, &e, 10), Err(crate::Error::HypothesisViolated(_))));
    }
}
