mod common;

use std::sync::OnceLock;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ellp_core::chains::{find_anm_child, partition_chains, stage_bounds, ChainBudget, FiniteSource};
use ellp_core::extension::{approximate_extend, ComputableMap, ExtendBudget, Extension};
use ellp_core::iso::{apply_isometry, synthesize_isometry, IsometryApprox, SynthBudget};
use ellp_core::par::ExecMode;
use ellp_core::presentation::{CeSet, OracleAdapter, SharedPresentation};
use ellp_core::scalar::sigma::min_pow;
use ellp_core::scalar::{abs_pow, parse_rational, rat, rat_pow2, sigma_scalar, Dyadic, DyadicInterval, GaussianRational, PExponent};
use ellp_core::tree::{hom_violation, project_to_strong_hom, ComboMap, TransparentMap, TreeNode};
use ellp_core::vectors::{norm, norm_p, norm_pow, sigma1_vec, FinSuppVector, GenCombo, LpSpace};

fn exponent() -> impl Strategy<Value = PExponent> {
    prop_oneof![Just("1"), Just("3/2"), Just("3"), Just("4"), Just("5/4")].prop_map(|s| PExponent::parse(s).unwrap())
}

fn rational() -> impl Strategy<Value = BigRational> {
    (-200i64..=200, 1i64..=64).prop_map(|(a, b)| rat(a, b))
}

fn scalar() -> impl Strategy<Value = GaussianRational> {
    (rational(), rational()).prop_map(|(re, im)| GaussianRational::new(re, im))
}

fn vector(offset: u64) -> impl Strategy<Value = FinSuppVector> {
    prop::collection::btree_map(0u64..6, scalar(), 0..4)
        .prop_map(move |m| FinSuppVector::from_pairs(m.into_iter().map(|(i, z)| (i + offset, z))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn interval_arithmetic_encloses(a in rational(), b in rational(), w in 4i64..40) {
        let (x, y) = (DyadicInterval::from_rational(&a, w), DyadicInterval::from_rational(&b, w));
        prop_assert!(x.contains_rational(&a));
        prop_assert!((&x + &y).contains_rational(&(&a + &b)));
        prop_assert!((&x - &y).contains_rational(&(&a - &b)));
        prop_assert!((&x * &y).contains_rational(&(&a * &b)));
        prop_assert!(x.width_at_most(w - 1));
    }

    #[test]
    fn sigma_dominates_min(z in scalar(), v in scalar(), p in exponent()) {
        let s = sigma_scalar(&z, &v, &p, 24).unwrap();
        let m = min_pow(&z, &v, &p, 24);
        prop_assert!(m.lo() <= s.hi());
    }

    #[test]
    fn disjoint_vectors_are_additive(f in vector(0), g in vector(100), p in exponent()) {
        prop_assert!(sigma1_vec(&f, &g, &p, 20).contains_zero());
        let space = LpSpace::new(p);
        let whole = norm_pow(&space, &(&f + &g), 20);
        let parts = &norm_pow(&space, &f, 22) + &norm_pow(&space, &g, 22);
        prop_assert!(whole.overlaps(&parts));
    }

    #[test]
    fn norm_is_homogeneous(f in vector(0), z in scalar(), p in exponent()) {
        let space = LpSpace::new(p.clone());
        let scaled = norm_pow(&space, &f.scale(&z), 16);
        let product = &abs_pow(&z, &p, 40) * &norm_pow(&space, &f, 40);
        prop_assert!(scaled.overlaps(&product));
    }

    #[test]
    fn tree_maps_round_trip_through_json(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m: ComboMap = common::random_combo_map(&mut rng, 5, 3, 0.2);
        let text = serde_json::to_string(&m).unwrap();
        prop_assert_eq!(serde_json::from_str::<ComboMap>(&text).unwrap(), m);
    }

    #[test]
    fn summative_maps_are_strong_homs(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let size = rng.gen_range(1..=6);
        let t = common::random_tree(&mut rng, size, 3);
        let m = TransparentMap::from_pairs(common::random_summative(&mut rng, &t, 0.0)).unwrap();
        prop_assert!(hom_violation(&m).is_none());
    }

    #[test]
    fn projection_lands_in_strong_homs(seed in any::<u64>(), p in exponent()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (phi, psi) = common::random_projection_instance(&mut rng);
        let out = project_to_strong_hom(&phi, &psi, &p, 20).unwrap();
        prop_assert!(hom_violation(&out).is_none());
        prop_assert_eq!(out.restrict(phi.tree()).unwrap(), phi);
    }

    #[test]
    fn anm_child_is_almost_maximal(seed in any::<u64>(), cube in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pi: u32 = if cube { 3 } else { 1 };
        let pres = common::standard(&PExponent::int(pi as i64));
        let size = rng.gen_range(2..=7);
        let map = common::random_combo_map(&mut rng, size, 3, 0.0);
        let src = common::open_source(pres, map.clone());
        for mu in map.tree().nodes().filter(|m| !map.tree().is_terminal(m)) {
            let a = find_anm_child(&src, mu, &ChainBudget::default()).unwrap();
            let norms: Vec<(TreeNode, BigRational)> =
                map.tree().children(mu).into_iter().map(|k| { let v = common::exact_norm_pow(map.at(&k), pi); (k, v) }).collect();
            let best = norms.iter().map(|(_, v)| v.clone()).max().unwrap();
            let got = norms.iter().find(|(k, _)| k == &a.child).unwrap().1.clone();
            prop_assert!(got + rat_pow2(-(mu.len() as i64 + 1)) >= best);
        }
    }

    #[test]
    fn stage_lower_bounds_are_clamped(seed in any::<u64>(), t in 0u64..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let map = common::random_combo_map(&mut rng, 6, 3, 0.5);
        let src = FiniteSource::summed(common::standard(&PExponent::int(1)), map.clone());
        let nodes: Vec<TreeNode> = map.tree().nodes().cloned().collect();
        let b = stage_bounds(&src, &nodes, t, ExecMode::Sequential);
        for e in &b.entries {
            prop_assert!(!e.m.is_negative());
            prop_assert!(e.m <= e.big_m);
            let exact = common::exact_norm_pow(&src_value(&map, &e.node), 1);
            prop_assert!(e.m <= exact && exact <= e.big_m);
        }
        prop_assert!(b.sigma_minus() >= b.m_bar());
    }

    #[test]
    fn partitions_are_deterministic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let map = common::random_combo_map(&mut rng, 7, 3, 0.0);
        let src = FiniteSource::summed(common::standard(&PExponent::parse("3/2").unwrap()), map);
        let seq = partition_chains(&src, &ChainBudget { mode: ExecMode::Sequential, ..Default::default() }).unwrap();
        let par = partition_chains(&src, &ChainBudget { mode: ExecMode::Parallel, ..Default::default() }).unwrap();
        prop_assert_eq!(serde_json::to_string(&seq).unwrap(), serde_json::to_string(&par).unwrap());
        // chains partition the enumerated nodes and each is a descending path
        let covered: usize = seq.chains.iter().map(|c| c.nodes.len()).sum();
        prop_assert_eq!(covered, seq.log.len());
        for (nu, _) in &seq.log {
            prop_assert!(seq.chain_of(nu).is_some());
        }
        for c in &seq.chains {
            for w in c.nodes.windows(2) {
                prop_assert_eq!(w[1].parent(), Some(w[0].clone()));
            }
        }
    }
}

fn src_value(map: &ComboMap, nu: &TreeNode) -> GenCombo {
    if nu.is_root() {
        map.tree().children(nu).iter().map(|n| map.at(n).clone()).sum()
    } else {
        map.at(nu).clone()
    }
}

fn extension() -> &'static (Extension, ComboMap, SharedPresentation) {
    static CELL: OnceLock<(Extension, ComboMap, SharedPresentation)> = OnceLock::new();
    CELL.get_or_init(|| {
        let pres = common::standard(&PExponent::parse("3/2").unwrap());
        let phi = ComboMap::from_pairs([(TreeNode::new(&[0]), GenCombo::from_ratios(&[(0, 1, 1), (1, 1, 2)]))]).unwrap();
        let x = approximate_extend(&ComputableMap::from_combos(&phi), 2, 4, &pres, &ExtendBudget::default()).unwrap();
        (x, phi, pres)
    })
}

fn isometry() -> &'static IsometryApprox {
    static CELL: OnceLock<IsometryApprox> = OnceLock::new();
    CELL.get_or_init(|| {
        let pres = common::standard(&PExponent::parse("3").unwrap());
        let oracle = OracleAdapter::transparent(CeSet::explicit(&[]).unwrap());
        synthesize_isometry(&pres, 4, &SynthBudget::default(), &oracle).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Every point of a certified ball has the certified properties.
    #[test]
    fn ball_certificates_hold_on_samples(seed in any::<u64>()) {
        let (x, phi, pres) = extension();
        let c = &x.certificate;
        prop_assert!(c.all_granted());
        let r = parse_rational(&c.radius).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut moved = ComboMap::empty();
        for nu in x.center.tree().nodes() {
            if nu.is_root() {
                continue;
            }
            let mut d = GenCombo::zero();
            for i in 0..12u64 {
                if rng.gen_bool(0.4) {
                    d.set(i, GaussianRational::real(rat(rng.gen_range(-50..=50), 50)));
                }
            }
            // ||d||_p <= ||d||_1 <= r
            let l1 = common::l1(&d);
            if !l1.is_zero() {
                let shrink = rat(rng.gen_range(1..=99), 100) * &r / l1;
                d = d.scale_rational(&shrink);
            }
            moved.insert(nu.clone(), x.center.at(nu) + &d).unwrap();
        }
        let w = 40;
        let nodes = moved.domain();
        for (i, a) in nodes.iter().enumerate() {
            prop_assert!(norm(&**pres, moved.at(a), w).is_positive());
            for b in &nodes[i + 1..] {
                prop_assert!(norm(&**pres, &(moved.at(a) - moved.at(b)), w).is_positive());
            }
        }
        let limit = Dyadic::pow2(-(c.level as i64));
        for nu in moved.inner_nodes() {
            prop_assert!(norm(&**pres, &moved.summation_defect(&nu), w).hi() < &limit);
        }
        for (j, wit) in c.beta.iter().enumerate() {
            let combo: GenCombo = wit.beta.iter().map(|(nu, b)| moved.at(nu).scale(b)).sum();
            prop_assert!(norm(&**pres, &(&GenCombo::unit(j as u64) - &combo), w).hi() < &limit);
        }
        for (nu, v) in phi.iter() {
            prop_assert!(norm(&**pres, &(moved.at(nu) - v), w).hi() < &Dyadic::pow2(-5));
        }
    }

    /// The `u_j` are disjointly supported unit vectors, so the image has the norm of the input.
    #[test]
    fn apply_is_isometric(entries in prop::collection::btree_map(0u64..4, scalar(), 1..4), k in 6i64..14) {
        let t = isometry();
        let x = FinSuppVector::from_pairs(entries);
        let p = PExponent::int(3);
        let image = apply_isometry(t, &x, k).unwrap();
        let lhs = norm(&*common::standard(&p), &image, k + 2);
        let rhs = norm_p(&x, &p, k + 2).widen(&Dyadic::pow2(-k));
        prop_assert!(lhs.overlaps(&rhs), "||Tx|| = [{}, {}], ||x|| = [{}, {}]", lhs.lo_f64(), lhs.hi_f64(), rhs.lo_f64(), rhs.hi_f64());
    }
}

#[test]
fn standard_norms_agree_with_exact_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..40 {
        let pi = rng.gen_range(1..=4u32);
        let pres = common::standard(&PExponent::int(pi as i64));
        let mut v = GenCombo::zero();
        for i in 0..5u64 {
            v.set(i, GaussianRational::from_ratio(rng.gen_range(-9..=9), rng.gen_range(1..=9)));
        }
        assert!(norm_pow(&*pres, &v, 30).contains_rational(&common::exact_norm_pow(&v, pi)));
    }
}
