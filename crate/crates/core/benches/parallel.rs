use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ellp_core::chains::{stage_bounds, FiniteSource};
use ellp_core::par::ExecMode;
use ellp_core::presentation::Standard;
use ellp_core::scalar::lamperti::{lamperti_check, lamperti_grid, GridConfig, LampertiConfig};
use ellp_core::scalar::PExponent;
use ellp_core::tree::{ComboMap, TreeNode};
use ellp_core::vectors::GenCombo;

const MODES: [(&str, ExecMode); 2] = [("sequential", ExecMode::Sequential), ("parallel", ExecMode::Parallel)];

fn grid(c: &mut Criterion) {
    let p = PExponent::parse("3/2").unwrap();
    let mut g = c.benchmark_group("lamperti_grid");
    g.sample_size(10);
    for (name, mode) in MODES {
        let cfg = GridConfig { theta_steps: 32, t_denominator: 4, t_max: 4, k: 24, mode };
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| lamperti_grid(&p, &cfg).unwrap()));
    }
    g.finish();
}

fn check(c: &mut Criterion) {
    let p = PExponent::int(3);
    let mut g = c.benchmark_group("lamperti_check");
    g.sample_size(10);
    for (name, mode) in MODES {
        let cfg = LampertiConfig { pairs: 200, mode, ..Default::default() };
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| lamperti_check(&p, &cfg).unwrap()));
    }
    g.finish();
}

fn bounds(c: &mut Criterion) {
    // a wide fan of atoms, one stage of bounds over every node
    let map = ComboMap::from_pairs((0..64u64).map(|j| (TreeNode::new(&[j]), GenCombo::from_ratios(&[(j, 1, (j as i64) + 1)])))).unwrap();
    let src = FiniteSource::summed(Arc::new(Standard::new(PExponent::parse("5/4").unwrap())), map.clone());
    let nodes: Vec<TreeNode> = map.tree().nodes().cloned().collect();
    let mut g = c.benchmark_group("stage_bounds");
    g.sample_size(10);
    for (name, mode) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| stage_bounds(&src, &nodes, 20, mode)));
    }
    g.finish();
}

criterion_group!(benches, grid, check, bounds);
criterion_main!(benches);
