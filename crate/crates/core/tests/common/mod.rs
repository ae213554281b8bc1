//! Random instances shared by the acceptance and property suites.
#![allow(dead_code)]

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use ellp_core::chains::FnSource;
use ellp_core::presentation::{SharedPresentation, Standard};
use ellp_core::scalar::{rat, GaussianRational, PExponent};
use ellp_core::tree::{ComboMap, FiniteTree, TransparentMap, TreeNode};
use ellp_core::vectors::{FinSuppVector, GenCombo, Sparse};

pub fn standard(p: &PExponent) -> SharedPresentation {
    Arc::new(Standard::new(p.clone()))
}

/// A random tree with `size` non-root nodes, at most `depth` deep; labels count up from 0.
pub fn random_tree(rng: &mut ChaCha8Rng, size: usize, depth: usize) -> FiniteTree {
    let mut nodes = vec![TreeNode::root()];
    let mut next: std::collections::BTreeMap<TreeNode, u64> = Default::default();
    while nodes.len() <= size {
        let open: Vec<&TreeNode> = nodes.iter().filter(|n| n.len() < depth).collect();
        let parent = open[rng.gen_range(0..open.len())].clone();
        let label = next.entry(parent.clone()).or_insert(0);
        nodes.push(parent.child(*label));
        *label += 1;
    }
    FiniteTree::new(nodes).expect("prefix closed")
}

fn random_real(rng: &mut ChaCha8Rng, tiny: bool) -> GaussianRational {
    let num = rng.gen_range(1..=9i64) * if rng.gen_bool(0.5) { 1 } else { -1 };
    let den = if tiny { 1i64 << 24 } else { rng.gen_range(1..=8i64) };
    GaussianRational::real(rat(num, den))
}

/// Values built bottom up: each leaf gets fresh coordinates and each inner node is the sum of its
/// children, so the map is a summative partial disintegration.
pub fn random_summative<K>(rng: &mut ChaCha8Rng, tree: &FiniteTree, tiny: f64) -> Vec<(TreeNode, Sparse<K>)> {
    let mut coord = 0u64;
    let mut values: std::collections::BTreeMap<TreeNode, Sparse<K>> = Default::default();
    let mut order: Vec<TreeNode> = tree.non_root().cloned().collect();
    order.sort_by_key(|n| std::cmp::Reverse(n.len()));
    for nu in order {
        let kids = tree.children(&nu);
        let v = if kids.is_empty() {
            let coords = rng.gen_range(1..=2);
            let mut v = Sparse::zero();
            for _ in 0..coords {
                let small = rng.gen_bool(tiny);
                v.set(coord, random_real(rng, small));
                coord += 1;
            }
            v
        } else {
            kids.iter().map(|k| values[k].clone()).sum()
        };
        values.insert(nu, v);
    }
    values.into_iter().collect()
}

pub fn random_combo_map(rng: &mut ChaCha8Rng, size: usize, depth: usize, tiny: f64) -> ComboMap {
    let tree = random_tree(rng, size, depth);
    ComboMap::from_pairs(random_summative(rng, &tree, tiny)).expect("valid map")
}

/// The same map as an enumeration that never announces completeness, so every answer has to come
/// from the trigger.
pub fn open_source(pres: SharedPresentation, map: ComboMap) -> FnSource {
    let root: GenCombo = map.tree().children(&TreeNode::root()).iter().map(|n| map.at(n).clone()).sum();
    let tree = map.tree().clone();
    let terminal = tree.clone();
    FnSource {
        pres,
        enumerate: Arc::new(move |_| tree.nodes().cloned().collect()),
        value: Arc::new(move |nu, _| if nu.is_root() { root.clone() } else { map.at(nu).clone() }),
        terminal: Arc::new(move |nu| terminal.is_terminal(nu)),
        infimum: None,
    }
}

/// `sum |x_n|^p` for real rational coordinates and integer `p`.
pub fn exact_norm_pow<K>(v: &Sparse<K>, p: u32) -> BigRational {
    v.iter()
        .map(|(_, z)| {
            assert!(z.im.is_zero(), "real coordinates only");
            num_traits::pow(z.re.abs(), p as usize)
        })
        .fold(BigRational::zero(), |a, b| a + b)
}

/// `||v||_1` for real rational coordinates, an upper bound for every `||v||_p`.
pub fn l1<K>(v: &Sparse<K>) -> BigRational {
    exact_norm_pow(v, 1)
}

/// A transparent instance for the projection: a strong homomorphism `phi` on a small tree and a
/// perturbed `psi` on a larger tree whose new nodes all extend non-root nodes of the smaller one.
pub fn random_projection_instance(rng: &mut ChaCha8Rng) -> (TransparentMap, TransparentMap) {
    loop {
        let size = rng.gen_range(2..=6);
        let big = random_tree(rng, size, 3);
        let top: Vec<TreeNode> = big.children(&TreeNode::root());
        // S: the first-level nodes plus a random prefix-closed part below them
        let mut small: Vec<TreeNode> = vec![TreeNode::root()];
        small.extend(top.iter().cloned());
        for nu in big.non_root() {
            if nu.len() > 1 && small.contains(&nu.parent().unwrap()) && rng.gen_bool(0.4) {
                small.push(nu.clone());
            }
        }
        if small.len() == big.len() {
            continue;
        }
        let exact: Vec<(TreeNode, FinSuppVector)> = random_summative(rng, &big, 0.1);
        let phi = TransparentMap::from_pairs(exact.iter().filter(|(n, _)| small.contains(n)).cloned()).expect("valid");
        let psi = TransparentMap::from_pairs(exact.into_iter().map(|(n, v)| {
            if small.contains(&n) {
                return (n, v);
            }
            let mut w = v.clone();
            for (i, _) in v.iter() {
                if rng.gen_bool(0.5) {
                    let noise = rat(rng.gen_range(-4..=4), 64);
                    w.set(i, &v.get(i) + &GaussianRational::real(noise));
                }
            }
            if rng.gen_bool(0.3) {
                w.set(1000 + rng.gen_range(0..4u64), GaussianRational::real(rat(1, rng.gen_range(8..=64))));
            }
            (n, w)
        }))
        .expect("valid");
        return (phi, psi);
    }
}
