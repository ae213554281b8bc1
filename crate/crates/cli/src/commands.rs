//! One function per subcommand: request in, status and report out.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use ellp_core::chains::{chain_limit, dyadic_fixture, partition_chains, ChainLimit, DisintegrationSource, FiniteSource, LimitStatus};
use ellp_core::error::{Error, Result};
use ellp_core::extension::{adversarial_tail, approximate_extend, build_disintegration, ComputableMap};
use ellp_core::iso::{apply_isometry, compute_e0_wrt_f, e0_vector, identity_reduction, recover_p, recover_scale_from_atom, scale_bound, synthesize_isometry};
use ellp_core::par::ExecMode;
use ellp_core::presentation::{Adversarial, CeSet, CeSpec, ComputableVector, Presentation, PresentationDescriptor};
use ellp_core::scalar::lamperti::{lamperti_check, lamperti_grid, GridConfig, LampertiConfig};
use ellp_core::scalar::{format_rational, sigma1_scalar, sigma_scalar, Dyadic, GaussianRational, IntervalReport, PExponent};
use ellp_core::tree::{
    distance_bound, hom_violation, project_to_strong_hom, sigma_tree, tree_norm_pow, validate_partial_disintegration, validate_transparent, ComboMap,
    TransparentMap, TreeNode, Verdict,
};
use ellp_core::vectors::{norm, norm_p, sigma, sigma1, FinSuppVector, GenCombo, LpSpace};

use crate::request::{oracle, presentation, Budgets, OracleSpec, Outcome, Status};

fn report(iv: &ellp_core::scalar::DyadicInterval) -> IntervalReport {
    IntervalReport::from(iv)
}

fn exponent(p: &Option<PExponent>, desc: &Option<PresentationDescriptor>) -> Result<PExponent> {
    match (p, desc) {
        (Some(p), _) => Ok(p.clone()),
        (None, Some(d)) => Ok(presentation(d)?.exponent().clone()),
        (None, None) => Err(Error::InvalidInput("request needs \"p\" or \"presentation\"".into())),
    }
}

fn default_k() -> i64 {
    20
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaReq {
    #[serde(default)]
    p: Option<PExponent>,
    #[serde(default)]
    presentation: Option<PresentationDescriptor>,
    #[serde(default)]
    z: Option<GaussianRational>,
    #[serde(default)]
    w: Option<GaussianRational>,
    #[serde(default)]
    f: Option<serde_json::Value>,
    #[serde(default)]
    g: Option<serde_json::Value>,
    #[serde(default)]
    map: Option<serde_json::Value>,
    #[serde(default = "default_k")]
    k: i64,
}

#[derive(Serialize)]
struct SigmaReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma1: Option<IntervalReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<IntervalReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma_tree: Option<IntervalReport>,
}

fn parse<T: serde::de::DeserializeOwned>(v: &serde_json::Value, what: &str) -> Result<T> {
    T::deserialize(v).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

/// `sigma_1` and `sigma` of two scalars or two vectors, or `sigma` of a tree map.
pub fn sigma_cmd(req: SigmaReq) -> Result<Outcome> {
    let k = req.k;
    let p = exponent(&req.p, &req.presentation)?;
    let mut out = SigmaReport { sigma1: None, sigma: None, sigma_tree: None };
    if let (Some(z), Some(w)) = (&req.z, &req.w) {
        out.sigma1 = Some(report(&sigma1_scalar(z, w, &p, k)));
        out.sigma = Some(report(&sigma_scalar(z, w, &p, k)?));
    }
    if let (Some(f), Some(g)) = (&req.f, &req.g) {
        match &req.presentation {
            Some(d) => {
                let pres = presentation(d)?;
                let (f, g): (GenCombo, GenCombo) = (parse(f, "f")?, parse(g, "g")?);
                out.sigma1 = Some(report(&sigma1(&*pres, &f, &g, k)));
                out.sigma = Some(report(&sigma(&*pres, &f, &g, k)?));
            }
            None => {
                let space = LpSpace::new(p.clone());
                let (f, g): (FinSuppVector, FinSuppVector) = (parse(f, "f")?, parse(g, "g")?);
                out.sigma1 = Some(report(&sigma1(&space, &f, &g, k)));
                out.sigma = Some(report(&sigma(&space, &f, &g, k)?));
            }
        }
    }
    if let Some(m) = &req.map {
        out.sigma_tree = Some(report(&match &req.presentation {
            Some(d) => sigma_tree(&parse::<ComboMap>(m, "map")?, &*presentation(d)?, k)?,
            None => sigma_tree(&parse::<TransparentMap>(m, "map")?, &LpSpace::new(p), k)?,
        }));
    }
    if out.sigma1.is_none() && out.sigma_tree.is_none() {
        return Err(Error::InvalidInput("give \"z\" and \"w\", \"f\" and \"g\", or \"map\"".into()));
    }
    Outcome::new(Status::Granted, &out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LampertiReq {
    p: PExponent,
    #[serde(default)]
    pairs: Option<usize>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    k_strict: Option<i64>,
    #[serde(default)]
    k_equal: Option<i64>,
}

pub fn lamperti_check_cmd(req: LampertiReq, mode: ExecMode) -> Result<Outcome> {
    let d = LampertiConfig::default();
    let cfg = LampertiConfig {
        pairs: req.pairs.unwrap_or(d.pairs),
        seed: req.seed.unwrap_or(d.seed),
        k_strict: req.k_strict.unwrap_or(d.k_strict),
        k_equal: req.k_equal.unwrap_or(d.k_equal),
        mode,
    };
    let r = lamperti_check(&req.p, &cfg)?;
    Outcome::new(if r.passed() { Status::Granted } else { Status::Refused }, &r)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridReq {
    p: PExponent,
    #[serde(default)]
    theta_steps: Option<u32>,
    #[serde(default)]
    t_denominator: Option<u32>,
    #[serde(default)]
    t_max: Option<u32>,
    #[serde(default)]
    k: Option<i64>,
}

#[derive(Serialize)]
struct GridOutcome {
    #[serde(flatten)]
    grid: ellp_core::scalar::lamperti::GridReport,
    /// `|min - |4 - 2 sqrt(2)^p|| < 10^-3`.
    near_expected: bool,
    /// The minimizer is a grid neighbor of `(pi/2, 1)`.
    adjacent: bool,
}

pub fn lamperti_grid_cmd(req: GridReq, mode: ExecMode) -> Result<Outcome> {
    let d = GridConfig::default();
    let cfg = GridConfig {
        theta_steps: req.theta_steps.unwrap_or(d.theta_steps),
        t_denominator: req.t_denominator.unwrap_or(d.t_denominator),
        t_max: req.t_max.unwrap_or(d.t_max),
        k: req.k.unwrap_or(d.k),
        mode,
    };
    let grid = lamperti_grid(&req.p, &cfg)?;
    let mid = |r: &IntervalReport| (r.lo_approx + r.hi_approx) / 2.0;
    let near_expected = (mid(&grid.minimum) - mid(&grid.expected)).abs() < 1e-3;
    let half = 2 * grid.argmin_theta_index as i64 - cfg.theta_steps as i64;
    let adjacent = half.abs() <= 2 && grid.argmin_t_index <= 1;
    let status = if near_expected && adjacent { Status::Granted } else { Status::Refused };
    Outcome::new(status, &GridOutcome { grid, near_expected, adjacent })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateReq {
    #[serde(default)]
    presentation: Option<PresentationDescriptor>,
    map: serde_json::Value,
    #[serde(default = "default_k")]
    k: i64,
}

/// Exact validation for maps in standard coordinates, enclosure-based for maps over a presentation.
pub fn validate_tree_cmd(req: ValidateReq) -> Result<Outcome> {
    let verdict = match &req.presentation {
        Some(d) => validate_partial_disintegration(&parse::<ComboMap>(&req.map, "map")?, &*presentation(d)?, req.k),
        None => validate_transparent(&parse::<TransparentMap>(&req.map, "map")?),
    };
    let status = match verdict {
        Verdict::CertifiedYes => Status::Granted,
        _ => Status::Refused,
    };
    Outcome::new(status, &verdict)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectReq {
    p: PExponent,
    phi: TransparentMap,
    psi: TransparentMap,
    #[serde(default = "default_k")]
    k: i64,
}

#[derive(Serialize)]
struct ProjectReport {
    projection: TransparentMap,
    /// Exact check of the order-reversing and disjointness clauses.
    strong_hom: bool,
    /// Full partial-disintegration validation, which also asks for nonzero injective values.
    verdict: Verdict,
    /// `||psi - psi_1||^p`.
    moved: IntervalReport,
    distance_bound: IntervalReport,
    within_bound: bool,
}

pub fn project_hom_cmd(req: ProjectReq) -> Result<Outcome> {
    let space = LpSpace::new(req.p.clone());
    let out = project_to_strong_hom(&req.phi, &req.psi, &req.p, req.k)?;
    let bound = distance_bound(&req.phi, &req.psi, &space, req.k)?;
    let moved = tree_norm_pow(&req.psi.union_keep_left(&req.phi)?.sub(&out)?, &space, req.k);
    let verdict = validate_transparent(&out);
    let strong_hom = hom_violation(&out).is_none();
    let within_bound = moved.hi() <= &(bound.lo() + &Dyadic::pow2(-req.k));
    let status = if strong_hom && within_bound { Status::Granted } else { Status::Refused };
    Outcome::new(status, &ProjectReport { projection: out, strong_hom, verdict, moved: report(&moved), distance_bound: report(&bound), within_bound })
}

/// Starting map for `extend`: explicit combinations, or `sum_n 2^{-n/p} f_{n+1}` at one node.
enum PhiSpec {
    Tail(TreeNode),
    Map(ComboMap),
}

impl PhiSpec {
    // untagged enums buffer their input and then reject the string-keyed vector entries
    fn parse(v: &serde_json::Value) -> Result<Self> {
        match v.get("adversarial_tail") {
            Some(node) => Ok(PhiSpec::Tail(parse(node, "adversarial_tail")?)),
            None => Ok(PhiSpec::Map(parse(v, "phi")?)),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtendReq {
    presentation: PresentationDescriptor,
    #[serde(default)]
    phi: Option<serde_json::Value>,
    n: u32,
    k: i64,
    #[serde(default)]
    budgets: Budgets,
}

#[derive(Serialize)]
struct ExtendReport {
    #[serde(flatten)]
    extension: ellp_core::extension::Extension,
    /// `||psi|_S - phi||` at the certificate's precision.
    restriction_distance: IntervalReport,
}

pub fn extend_cmd(req: ExtendReq, mode: ExecMode) -> Result<Outcome> {
    let pres = presentation(&req.presentation)?;
    let phi = match req.phi.as_ref().map(PhiSpec::parse).transpose()? {
        None => ComputableMap::empty(),
        Some(PhiSpec::Map(m)) => ComputableMap::from_combos(&m),
        Some(PhiSpec::Tail(node)) => {
            ComputableMap::new(BTreeMap::from([(node, adversarial_tail(pres.exponent()))]))?
        }
    };
    let ext = approximate_extend(&phi, req.n, req.k, &pres, &req.budgets.extend(mode))?;
    let w = ext.certificate.precision;
    let target = phi.approx(w);
    let restriction_distance = target
        .iter()
        .map(|(nu, v)| norm(&*pres, &(ext.center.at(nu) - v), w))
        .reduce(|a, b| a.max(&b))
        .unwrap_or_else(ellp_core::scalar::DyadicInterval::zero);
    let granted = ext.certificate.all_granted() && ext.success.index >= req.n;
    Outcome::new(
        if granted { Status::Granted } else { Status::Refused },
        &ExtendReport { extension: ext, restriction_distance: report(&restriction_distance) },
    )
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisintegrateReq {
    presentation: PresentationDescriptor,
    stages: u32,
    #[serde(default)]
    budgets: Budgets,
}

pub fn disintegrate_cmd(req: DisintegrateReq, mode: ExecMode) -> Result<Outcome> {
    let pres = presentation(&req.presentation)?;
    let d = build_disintegration(&pres, req.stages, &req.budgets.extend(mode))?;
    let granted = d.stages.iter().all(|s| s.certificate.all_granted());
    Outcome::new(if granted { Status::Granted } else { Status::Refused }, &d)
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fixture {
    Dyadic,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainsReq {
    presentation: PresentationDescriptor,
    #[serde(default)]
    fixture: Option<Fixture>,
    #[serde(default)]
    stages: Option<u32>,
    #[serde(default)]
    oracle: Option<OracleSpec>,
    #[serde(default)]
    budgets: Budgets,
}

#[derive(Serialize)]
struct ChainsReport {
    partition: ellp_core::chains::ChainPartition,
    limits: Vec<ChainLimit>,
}

pub fn chains_cmd(req: ChainsReq, mode: ExecMode) -> Result<Outcome> {
    let pres = presentation(&req.presentation)?;
    let adapter = oracle(req.oracle.as_ref(), Some(&req.presentation))?;
    let mut budget = req.budgets.chains(mode);
    let src: Box<dyn DisintegrationSource> = match (req.fixture, req.stages) {
        (Some(Fixture::Dyadic), _) => Box::new(dyadic_fixture(pres)),
        (None, Some(n)) => {
            budget.stage = req.budgets.chain_stage.unwrap_or(0);
            let d = build_disintegration(&pres, n, &req.budgets.extend(mode))?;
            Box::new(FiniteSource::from_staged(&d, pres))
        }
        (None, None) => return Err(Error::InvalidInput("give \"fixture\" or \"stages\"".into())),
    };
    let partition = partition_chains(&*src, &budget)?;
    let k = req.budgets.k.unwrap_or(16);
    let limits = partition.chains.iter().map(|c| chain_limit(&*src, c, &adapter, k, &budget)).collect::<Result<Vec<_>>>()?;
    let certainty = limits.iter().fold(adapter.certainty(), |c, l| c.and(l.certainty));
    let provisional = limits.iter().any(|l| l.status == LimitStatus::Provisional);
    let status = if provisional { Status::Provisional } else { Status::from_certainty(true, certainty) };
    Outcome::new(status, &ChainsReport { partition, limits })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthReq {
    presentation: PresentationDescriptor,
    n: usize,
    #[serde(default)]
    oracle: Option<OracleSpec>,
    #[serde(default)]
    budgets: Budgets,
}

pub fn synthesize_cmd(req: SynthReq, mode: ExecMode) -> Result<Outcome> {
    let pres = presentation(&req.presentation)?;
    let adapter = oracle(req.oracle.as_ref(), Some(&req.presentation))?;
    let t = synthesize_isometry(&pres, req.n, &req.budgets.synth(mode), &adapter)?;
    Outcome::new(Status::from_certainty(t.all_granted(req.n), t.certainty), &t)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApplyReq {
    presentation: PresentationDescriptor,
    n: usize,
    x: FinSuppVector,
    #[serde(default = "default_k")]
    k: i64,
    #[serde(default)]
    oracle: Option<OracleSpec>,
    #[serde(default)]
    budgets: Budgets,
}

#[derive(Serialize)]
struct ApplyReport {
    image: GenCombo,
    norm: IntervalReport,
    /// `||x||` in standard coordinates, for comparison.
    source_norm: IntervalReport,
    synthesized: usize,
}

pub fn apply_cmd(req: ApplyReq, mode: ExecMode) -> Result<Outcome> {
    let pres = presentation(&req.presentation)?;
    let adapter = oracle(req.oracle.as_ref(), Some(&req.presentation))?;
    let t = synthesize_isometry(&pres, req.n, &req.budgets.synth(mode), &adapter)?;
    let image = apply_isometry(&t, &req.x, req.k)?;
    let out = ApplyReport {
        norm: report(&norm(&*pres, &image, req.k)),
        source_norm: report(&norm_p(&req.x, pres.exponent(), req.k)),
        image,
        synthesized: t.len(),
    };
    Outcome::new(Status::from_certainty(t.all_granted(req.n), t.certainty), &out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversarialReq {
    ce: CeSpec,
    p: PExponent,
    #[serde(default)]
    k: Option<i64>,
    #[serde(default)]
    n: Option<usize>,
    /// Defaults to transparent.
    #[serde(default)]
    oracle: Option<ellp_core::presentation::OracleMode>,
    /// For `scale`: an approximation of `lambda e_0` over `F`; defaults to the computed `e_0`.
    #[serde(default)]
    v: Option<GenCombo>,
}

impl AdversarialReq {
    fn adapter(&self) -> Result<ellp_core::presentation::OracleAdapter> {
        let spec = OracleSpec { mode: self.oracle.unwrap_or(ellp_core::presentation::OracleMode::Transparent), ce: Some(self.ce.clone()) };
        oracle(Some(&spec), None)
    }

    fn transparent(&self) -> Result<Adversarial> {
        Ok(Adversarial::new(CeSet::new(self.ce.clone())?, self.p.clone()))
    }
}

#[derive(Serialize)]
struct E0Report {
    #[serde(flatten)]
    e0: ellp_core::iso::E0Approx,
    /// `||g - e_0||`, evaluated through the transparent backdoor.
    transparent_distance: IntervalReport,
}

pub fn adversarial_e0_cmd(req: AdversarialReq) -> Result<Outcome> {
    let k = req.k.unwrap_or(10);
    let e0 = compute_e0_wrt_f(&req.adapter()?, &req.p, k)?;
    let f = req.transparent()?;
    let d = norm_p(&(&f.transparent_eval(&e0.g, k + 8)? - &FinSuppVector::unit(0)), &req.p, k + 4);
    let status = Status::from_certainty(d.hi() < &Dyadic::pow2(-k), e0.certainty);
    Outcome::new(status, &E0Report { e0, transparent_distance: report(&d) })
}

#[derive(Serialize)]
struct ScaleReport {
    q0: String,
    value: String,
    value_approx: f64,
    k: i64,
    /// The input vector when one was given, else the computed `e_0`.
    source: &'static str,
}

/// `(1 - gamma)^{-1/p}` read off `lambda e_0`.
pub fn adversarial_scale_cmd(req: AdversarialReq) -> Result<Outcome> {
    let k = req.k.unwrap_or(8);
    let adapter = req.adapter()?;
    let (q0, certainty) = scale_bound(&adapter, &req.p)?;
    let (v, source) = match &req.v {
        Some(v) => (ComputableVector::constant(v.clone()), "input"),
        None => (e0_vector(&adapter, &req.p)?, "e0"),
    };
    let value = recover_scale_from_atom(&v, &q0, k);
    let value_approx = Dyadic::floor_rational(&value, 64).to_f64();
    let out = ScaleReport { q0: format_rational(&q0), value: format_rational(&value), value_approx, k, source };
    Outcome::new(Status::from_certainty(true, certainty), &out)
}

pub fn adversarial_identity_cmd(req: AdversarialReq) -> Result<Outcome> {
    let id = identity_reduction(&req.adapter()?, &req.p, req.n.unwrap_or(3), req.k.unwrap_or(10))?;
    Outcome::new(Status::from_certainty(true, id.certainty), &id)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecoverPReq {
    presentation: PresentationDescriptor,
    #[serde(default)]
    oracle: Option<OracleSpec>,
    #[serde(default)]
    budgets: Budgets,
}

pub fn recover_p_cmd(req: RecoverPReq, mode: ExecMode) -> Result<Outcome> {
    let pres = presentation(&req.presentation)?;
    let adapter = oracle(req.oracle.as_ref(), Some(&req.presentation))?;
    let r = recover_p(&pres, &req.budgets.synth(mode), &adapter)?;
    Outcome::new(Status::from_certainty(true, r.certainty), &r)
}
