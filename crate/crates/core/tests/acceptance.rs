//! Acceptance criteria, one PASS/FAIL line each. Tolerances are pinned here and must not drift.

mod common;

use std::sync::Arc;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ellp_core::chains::{dyadic_fixture, find_anm_child, partition_chains, stage_bounds, ChainBudget};
use ellp_core::error::Error;
use ellp_core::extension::{adversarial_tail, approximate_extend, ComputableMap, ExtendBudget, Extension};
use ellp_core::iso::{compute_e0_wrt_f, e0_vector, recover_p, recover_scale_from_atom, scale_bound, synthesize_isometry, IsometryApprox, SynthBudget};
use ellp_core::par::ExecMode;
use ellp_core::presentation::{Adversarial, CeSet, OracleAdapter, Opaque, Presentation, Rotated, SharedPresentation};
use ellp_core::scalar::lamperti::{lamperti_check, lamperti_grid, GridConfig, LampertiConfig};
use ellp_core::scalar::{rat, rat_pow2, Dyadic, GaussianRational, PExponent};
use ellp_core::tree::{
    distance_bound, exact_distance_single_free_node, hom_violation, project_to_strong_hom, sigma_tree, tree_norm_pow, TransparentMap, TreeNode,
};
use ellp_core::vectors::{norm_p, FinSuppVector, GenCombo, LpSpace};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn p(s: &str) -> PExponent {
    PExponent::parse(s).unwrap()
}

fn f64_of(q: &BigRational) -> f64 {
    q.to_f64().unwrap()
}

fn n(path: &[u64]) -> TreeNode {
    TreeNode::new(path)
}

fn ac1() -> Check {
    let cfg = LampertiConfig { pairs: 1000, k_strict: 30, k_equal: 40, ..Default::default() };
    let mut parts = Vec::new();
    for e in ["1", "3/2", "3", "4"] {
        let r = lamperti_check(&p(e), &cfg).map_err(|e| e.to_string())?;
        ensure(r.passed(), format!("p = {e}: {} failures, first {:?}", r.failures.len(), r.failures.first()))?;
        parts.push(format!("p={e}: {} strict, {} equal", r.strict, r.equal));
    }
    Ok(parts.join("; "))
}

fn ac2() -> Check {
    let cfg = GridConfig { theta_steps: 64, t_denominator: 16, t_max: 8, ..Default::default() };
    let mut parts = Vec::new();
    // |4 - 2 sqrt(2)^p| in floating point, independent of the interval code
    for (e, pf) in [("1", 1.0f64), ("3", 3.0)] {
        let g = lamperti_grid(&p(e), &cfg).map_err(|e| e.to_string())?;
        let expected = (4.0 - 2.0 * 2f64.sqrt().powf(pf)).abs();
        let min = (g.minimum.lo_approx + g.minimum.hi_approx) / 2.0;
        ensure((min - expected).abs() < 1e-3, format!("p = {e}: grid minimum {min} vs {expected}"))?;
        let dtheta = g.argmin_theta_index as i64 - 32;
        ensure(dtheta.abs() <= 1 && g.argmin_t_index <= 1, format!("p = {e}: argmin at ({}, {})", g.argmin_theta_index, g.argmin_t_index))?;
        parts.push(format!("p={e}: min {min:.5} at theta {}pi/64, t 1+{}/16", g.argmin_theta_index, g.argmin_t_index));
    }
    Ok(parts.join("; "))
}

fn ac3() -> Check {
    let one = PExponent::int(1);
    let space = LpSpace::new(one.clone());
    let quarter = FinSuppVector::from_ratios(&[(0, 1, 4)]);
    let map = |pairs: Vec<(TreeNode, FinSuppVector)>| TransparentMap::from_pairs(pairs).unwrap();
    let phi = map(vec![(n(&[0]), quarter.clone())]);
    let psi = map(vec![(n(&[0]), quarter.clone()), (n(&[1]), FinSuppVector::unit(0))]);
    let s = sigma_tree(&psi, &space, 30).map_err(|e| e.to_string())?;
    let two_s = s.scale_pow2(1);
    ensure(two_s.lo().to_rational() > rat(85, 100) && two_s.hi().to_rational() < rat(86, 100), format!("2 sigma = [{}, {}]", two_s.lo_f64(), two_s.hi_f64()))?;
    let d = exact_distance_single_free_node(&phi, &psi, &one, 30).map_err(|e| e.to_string())?;
    ensure(d.contains(&Dyadic::one()), format!("exact distance [{}, {}]", d.lo_f64(), d.hi_f64()))?;
    ensure(matches!(distance_bound(&phi, &psi, &space, 30), Err(Error::HypothesisViolated(_))), "distance_bound accepted the example")?;
    let rerooted = map(vec![(n(&[0]), quarter), (n(&[0, 0]), FinSuppVector::unit(0))]);
    let bound = distance_bound(&phi, &rerooted, &space, 30).map_err(|e| e.to_string())?;
    let d2 = exact_distance_single_free_node(&phi, &rerooted, &one, 30).map_err(|e| e.to_string())?;
    ensure(d2.hi() <= bound.lo(), format!("re-rooted: d = {} above bound {}", d2.hi_f64(), bound.lo_f64()))?;
    Ok(format!("2 sigma in [{:.5}, {:.5}], d = 1, re-rooted d^p = {:.4} <= {:.4}", two_s.lo_f64(), two_s.hi_f64(), d2.hi_f64(), bound.lo_f64()))
}

fn ac4() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0xac4);
    let slack = Dyadic::pow2(-20);
    let mut worst = f64::NEG_INFINITY;
    let mut nontrivial = 0;
    for i in 0..200 {
        let (phi, psi) = common::random_projection_instance(&mut rng);
        let e = [p("1"), p("3/2"), p("3")][i % 3].clone();
        let space = LpSpace::new(e.clone());
        let out = project_to_strong_hom(&phi, &psi, &e, 24).map_err(|e| format!("instance {i}: {e}"))?;
        ensure(hom_violation(&out).is_none(), format!("instance {i}: output is not a strong homomorphism"))?;
        ensure(out.restrict(phi.tree()).unwrap() == phi, format!("instance {i}: fixed part moved"))?;
        let moved = tree_norm_pow(&psi.sub(&out).unwrap(), &space, 24);
        let bound = distance_bound(&phi, &psi, &space, 24).map_err(|e| format!("instance {i}: {e}"))?;
        ensure(moved.hi() <= &(bound.hi() + &slack), format!("instance {i}: moved {} > bound {}", moved.hi_f64(), bound.hi_f64()))?;
        worst = worst.max(moved.hi_f64() - bound.hi_f64());
        nontrivial += usize::from(moved.lo().is_positive());
    }
    Ok(format!("200 instances ({nontrivial} moved), largest (moved - bound) = {worst:.3e}"))
}

fn ac5_extension() -> Result<(Extension, Adversarial), String> {
    let one = PExponent::int(1);
    let f = Adversarial::new(CeSet::explicit(&[1, 3]).unwrap(), one.clone());
    let shared: SharedPresentation = Arc::new(f.clone());
    let phi = ComputableMap::new([(n(&[0]), adversarial_tail(&one))].into_iter().collect()).map_err(|e| e.to_string())?;
    let x = approximate_extend(&phi, 2, 4, &shared, &ExtendBudget::default()).map_err(|e| e.to_string())?;
    Ok((x, f))
}

fn ac5() -> Check {
    let (x, f) = ac5_extension()?;
    // gamma = 1/2 + 1/8, so (1 - gamma)^{1/p} = 3/8 > 2^-2 = 2^-N
    let big_n = 2u32;
    ensure(x.success.index >= big_n, format!("success index {}", x.success.index))?;
    ensure(x.certificate.all_granted(), format!("certificate {}", x.certificate.trace_line(&x.center)))?;
    let tail = f.transparent_eval(&adversarial_tail(&PExponent::int(1)).approx(40), 40).unwrap();
    let at0 = f.transparent_eval(x.center.at(&n(&[0])), 40).unwrap();
    let d0 = norm_p(&(&at0 - &tail), &PExponent::int(1), 20);
    ensure(d0.hi() < &Dyadic::pow2(-4), format!("||psi(0) - phi(0)|| = {}", d0.hi_f64()))?;
    let atom = FinSuppVector::from_ratios(&[(0, 3, 8)]);
    let best = x
        .center
        .iter()
        .map(|(nu, v)| (nu.clone(), norm_p(&(&f.transparent_eval(v, 40).unwrap() - &atom), &PExponent::int(1), 20).hi_f64()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    ensure(best.1 < 1.0 / 16.0, format!("nearest node to (1 - gamma) e_0 is {} at {}", best.0, best.1))?;
    Ok(format!("success index {}, ||psi|S - phi|| = {:.2e}, node {} within {:.1e} of (3/8) e_0", x.success.index, d0.hi_f64(), best.0, best.1))
}

fn ac6_run(mode: ExecMode) -> Result<IsometryApprox, String> {
    let e = common::standard(&p("3/2"));
    let mut budget = SynthBudget::default();
    budget.extend.search.mode = mode;
    budget.chains.mode = mode;
    let oracle = OracleAdapter::transparent(CeSet::explicit(&[]).unwrap());
    synthesize_isometry(&e, 8, &budget, &oracle).map_err(|e| e.to_string())
}

fn ac6() -> Check {
    let t = ac6_run(ExecMode::default())?;
    let tol = 2f64.powi(-10);
    ensure(t.len() == 8, format!("{} vectors", t.len()))?;
    let s = t.sigma1_max.as_ref().ok_or("no sigma_1 bound")?;
    ensure(s.hi_approx < tol, format!("sigma_1 max {}", s.hi_approx))?;
    ensure(t.unit_defect.hi_approx < tol, format!("unit defect {}", t.unit_defect.hi_approx))?;
    for w in &t.generation {
        ensure(w.distance.hi_approx < 2f64.powi(-8), format!("d(e_{}, span) <= {}", w.generator, w.distance.hi_approx))?;
    }
    ensure(t.generation.len() >= 8, "generation witnesses missing")?;
    let pe = p("3/2");
    let mut seen = std::collections::BTreeSet::new();
    for (j, u) in t.vectors.iter().enumerate() {
        // standard E: the combination is already in coordinates
        let (m, z) = u.approx.iter().max_by(|a, b| a.1.norm_sqr().cmp(&b.1.norm_sqr())).ok_or(format!("u_{j} is zero"))?;
        let modulus = f64_of(&z.norm_sqr()).sqrt();
        let mut rest = FinSuppVector::from_pairs(u.approx.iter().map(|(i, z)| (i, z.clone())));
        rest.set(m, GaussianRational::zero());
        let rest = norm_p(&rest, &pe, 30).hi_f64();
        ensure(rest + (modulus - 1.0).abs() < 2f64.powi(-8), format!("u_{j} is {rest} + {} from an atom", (modulus - 1.0).abs()))?;
        ensure(seen.insert(m), format!("u_{j} repeats coordinate {m}"))?;
    }
    Ok(format!("8 unit vectors after {} stages, sigma_1 <= {:.1e}, defect <= {:.1e}, atoms {:?}", t.stages, s.hi_approx, t.unit_defect.hi_approx, seen))
}

fn gamma_f64(c: &[u64]) -> f64 {
    c.iter().map(|&x| 2f64.powi(-(x as i32))).sum()
}

fn ac7() -> Check {
    let e = p("3/2");
    let ce = CeSet::explicit(&[1, 2]).unwrap();
    let f = Adversarial::new(ce.clone(), e.clone());
    let g = compute_e0_wrt_f(&OracleAdapter::transparent(ce), &e, 10).map_err(|e| e.to_string())?;
    let d = norm_p(&(&f.transparent_eval(&g.g, 30).unwrap() - &FinSuppVector::unit(0)), &e, 24);
    ensure(d.hi() < &Dyadic::pow2(-10), format!("||g - e_0|| = {}", d.hi_f64()))?;

    let one = PExponent::int(1);
    let o1 = OracleAdapter::transparent(CeSet::explicit(&[1]).unwrap());
    let (q0, _) = scale_bound(&o1, &one).map_err(|e| e.to_string())?;
    let exact = ellp_core::presentation::ComputableVector::constant(GenCombo::from_ratios(&[(0, 2, 1), (1, -1, 1)]));
    let r = recover_scale_from_atom(&exact, &q0, 8);
    ensure((&r - rat(2, 1)).abs() < rat_pow2(-8), format!("recover_scale gave {}", f64_of(&r)))?;

    // round trip against (1 - gamma)^{-1/p} in floating point
    let k = 8;
    for (c, pe, pf) in [(vec![1u64], "1", 1.0), (vec![1, 2], "3/2", 1.5), (vec![2, 5], "3", 3.0), (vec![1, 3], "3/2", 1.5)] {
        let o = OracleAdapter::transparent(CeSet::explicit(&c).unwrap());
        let pe = p(pe);
        let v = e0_vector(&o, &pe).map_err(|e| e.to_string())?;
        let (q0, _) = scale_bound(&o, &pe).map_err(|e| e.to_string())?;
        let got = f64_of(&recover_scale_from_atom(&v, &q0, k));
        let want = (1.0 - gamma_f64(&c)).powf(-1.0 / pf);
        ensure((got - want).abs() < 2f64.powi(-(k as i32) + 1), format!("C = {c:?}: {got} vs {want}"))?;
        let turned = recover_scale_from_atom(&v.scale(&GaussianRational::i()), &q0, k);
        ensure((f64_of(&turned) - want).abs() < 2f64.powi(-(k as i32) + 1), format!("C = {c:?}: rotated input drifts"))?;
    }
    Ok(format!("||g - e_0|| <= {:.2e}, scale {} for C = {{1}}, round trip on 4 sets", d.hi_f64(), f64_of(&r)))
}

fn ac8() -> Check {
    let oracle = OracleAdapter::transparent(CeSet::explicit(&[]).unwrap());
    let cases: Vec<(f64, SharedPresentation)> = vec![
        (1.0, common::standard(&p("1"))),
        (1.5, Arc::new(Rotated::new(p("3/2"), GaussianRational::i()).unwrap())),
        (3.0, Arc::new(Opaque(common::standard(&p("3"))))),
    ];
    let mut parts = Vec::new();
    for (want, pres) in cases {
        let r = recover_p(&pres, &SynthBudget::default(), &oracle).map_err(|e| e.to_string())?;
        let tol = 2f64.powi(-6);
        ensure(r.p.lo_approx <= want && want <= r.p.hi_approx, format!("{}: [{}, {}] misses {want}", pres.name(), r.p.lo_approx, r.p.hi_approx))?;
        ensure(r.p.lo_approx >= want - tol && r.p.hi_approx <= want + tol, format!("{}: enclosure too wide", pres.name()))?;
        parts.push(format!("{want}: [{:.5}, {:.5}]", r.p.lo_approx, r.p.hi_approx));
    }
    Ok(parts.join("; "))
}

fn ac9() -> Check {
    let e1 = common::standard(&PExponent::int(1));
    let src = dyadic_fixture(e1);
    let part = partition_chains(&src, &ChainBudget { stage: 6, ..Default::default() }).map_err(|e| e.to_string())?;
    ensure(part.chains[0].nodes == vec![TreeNode::root(), n(&[0])], format!("chain 0 = {:?}", part.chains[0].nodes))?;
    for i in 1..=6u64 {
        ensure(part.chains[i as usize].nodes == vec![n(&[i])], format!("chain {i} = {:?}", part.chains[i as usize].nodes))?;
    }
    ensure(part.len() == 7, format!("{} chains", part.len()))?;

    let mut rng = ChaCha8Rng::seed_from_u64(0xac9);
    let mut checked = 0usize;
    let mut clamped = 0usize;
    for i in 0..500 {
        let pi: u32 = if i % 2 == 0 { 1 } else { 3 };
        let pres = common::standard(&PExponent::int(pi as i64));
        let size = rng.gen_range(2..=7);
        let map = common::random_combo_map(&mut rng, size, 3, 0.15);
        let src = common::open_source(pres, map.clone());
        let tree = map.tree().clone();
        for mu in tree.nodes().filter(|m| !tree.is_terminal(m)) {
            // p = 3 with 2^-24 coordinates puts norms near 2^-72, so the trigger needs stages past 72
            let a = find_anm_child(&src, mu, &ChainBudget { max_stage: 160, ..Default::default() }).map_err(|e| format!("instance {i}, {mu}: {e}"))?;
            let kids = tree.children(mu);
            let norms: Vec<BigRational> = kids.iter().map(|k| common::exact_norm_pow(map.at(k), pi)).collect();
            let best = norms.iter().max().unwrap().clone();
            let got = &norms[kids.iter().position(|k| k == &a.child).ok_or("child not a child")?];
            ensure(got + rat_pow2(-(mu.len() as i64 + 1)) >= best, format!("instance {i}, {mu}: picked {} below the maximum", a.child))?;
            ensure(got + rat_pow2(-a.slack_exp) >= best, format!("instance {i}, {mu}: reported slack is wrong"))?;
            checked += 1;
        }
        for t in [0u64, 3, 10] {
            let nodes: Vec<TreeNode> = tree.nodes().cloned().collect();
            let b = stage_bounds(&src, &nodes, t, ExecMode::Sequential);
            for e in &b.entries {
                ensure(!e.m.is_negative(), format!("instance {i}: m < 0 at {}", e.node))?;
                clamped += usize::from(e.m.is_zero());
            }
        }
    }
    Ok(format!("hand partition matches; {checked} trigger answers agree with brute force; {clamped} clamped bounds, none negative"))
}

fn ac10() -> Check {
    let a = serde_json::to_string(&ac5_extension()?.0).unwrap();
    let b = serde_json::to_string(&ac5_extension()?.0).unwrap();
    ensure(a == b, "extension reports differ")?;
    let s1 = serde_json::to_string(&ac6_run(ExecMode::default())?).unwrap();
    let s2 = serde_json::to_string(&ac6_run(ExecMode::default())?).unwrap();
    let s3 = serde_json::to_string(&ac6_run(ExecMode::Sequential)?).unwrap();
    ensure(s1 == s2, "synthesis reports differ between runs")?;
    ensure(s1 == s3, "synthesis reports differ between parallel and sequential")?;
    Ok(format!("extension report {} bytes, synthesis report {} bytes, identical across runs and modes", a.len(), s1.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Check, u64); 10] = [
        ("AC1 Lamperti inequality suite", ac1, 60),
        ("AC2 f_p grid minimum", ac2, 30),
        ("AC3 hypothesis golden test", ac3, 60),
        ("AC4 projection soundness", ac4, 120),
        ("AC5 approximate extension golden test", ac5, 300),
        ("AC6 end-to-end synthesis over E", ac6, 600),
        ("AC7 oracle reductions", ac7, 120),
        ("AC8 recover p", ac8, 120),
        ("AC9 chain machinery", ac9, 300),
        ("AC10 determinism", ac10, 900),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if took > Duration::from_secs(limit) => Err(format!("{detail}; over the {limit} s budget")),
            o => o,
        };
        match outcome {
            Ok(detail) => println!("PASS {name} ({:.1} s): {detail}", took.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("FAIL {name} ({:.1} s): {why}", took.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        println!("{failed} of 10 acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 10 acceptance criteria passed");
}
