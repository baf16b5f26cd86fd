//! Reproducible experiments: group sizes, cocycle verdicts, single-group and pair norms, scans.
//!
//! Every report carries a canonical command echo that re-runs it. Apart from
//! `wall_ms`, reports depend only on their parameters, not on thread count.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coboundary::{CoboundaryCertificate, CoboundarySolver, Coefficients, Route};
use crate::cocycle::{
    affine_symplectic, character_compose, cocycle_identity_check, restrict, standard_phase_cocycle,
    symmetry_test, Character, CharacterSpec, CheckMode, IdentityReport, PairCocycles, PhaseCocycle,
    Symmetry,
};
use crate::error::{Error, Result};
use crate::group::{
    EnumCaps, FiniteGroup, GroupDescriptor, GroupRef, IndexedGroup, Subgroup, SubgroupLabel,
};
use crate::rep::{regular_rep, single_sum, tensor_sum, TensorSumOperator};
use crate::ring::{FiniteRing, RingDescriptor};
use crate::sector::SectorReduction;
use crate::spectral::{
    gap_bound, norm_dense_with_cap, norm_estimate, pick_best, relative_spread, to_dense,
    NormEstimate, NormReport, PowerOptions, Solver,
};
use crate::word::{generator_tuple, generator_words};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Triples sampled when a cocycle is too large for the exhaustive check.
pub const DEFAULT_CHECK_SAMPLES: u64 = 1_000_000;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub caps: EnumCaps,
    /// Cap on the dimension the eigensolver iterates over.
    pub max_pair_dim: usize,
    /// Dense cross-checks run up to this dimension.
    pub dense_cap: usize,
    pub power: PowerOptions,
    /// Worker threads; `None` uses the available parallelism.
    pub threads: Option<usize>,
    pub delta: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            caps: EnumCaps::default(),
            max_pair_dim: 10_000_000,
            dense_cap: 2000,
            power: PowerOptions::default(),
            threads: None,
            delta: None,
        }
    }
}

impl RunConfig {
    fn spectral_echo(&self) -> String {
        let seeds: Vec<String> = self.power.seeds.iter().map(|s| s.to_string()).collect();
        let mut s = format!(
            " --solver {} --tol {:e} --max-iters {} --seeds {}",
            match self.power.solver {
                Solver::Power => "power",
                Solver::Lanczos => "lanczos",
            },
            self.power.tol,
            self.power.max_iters,
            seeds.join(",")
        );
        if let Some(d) = self.delta {
            s.push_str(&format!(" --delta {d}"));
        }
        s
    }

    fn gap_bound(&self, m: usize) -> Result<Option<GapBoundReport>> {
        self.delta
            .map(|d| {
                let g = gap_bound(m as u32, d)?;
                Ok(GapBoundReport {
                    label: "user-supplied δ".into(),
                    delta: g.delta,
                    d: g.d,
                })
            })
            .transpose()
    }
}

/// Runs `f` on a pool with the configured number of threads.
pub fn run_with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "thread count must be positive".into(),
            ));
        }
        b = b.num_threads(n);
    }
    let pool = b
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn elapsed_ms(t: Instant) -> u64 {
    t.elapsed().as_millis() as u64
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupInfo {
    pub command: String,
    pub ring: RingDescriptor,
    pub ring_order: u64,
    pub sl2_order: u64,
    pub group_order: u64,
    pub version: String,
}

pub fn group_info(ring: &RingDescriptor, caps: EnumCaps) -> Result<GroupInfo> {
    let r = FiniteRing::new(ring)?;
    let g = IndexedGroup::build(r.clone(), caps)?;
    Ok(GroupInfo {
        command: format!("projgap group info {}", ring_flag(ring)),
        ring: ring.clone(),
        ring_order: r.card() as u64,
        sl2_order: g.sl2().len() as u64,
        group_order: g.order() as u64,
        version: VERSION.into(),
    })
}

fn ring_flag(ring: &RingDescriptor) -> String {
    match ring {
        RingDescriptor::Zmod { n } => format!("--k {n}"),
        other => format!(
            "--ring '{}'",
            serde_json::to_string(other).expect("serializable")
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CocycleSource {
    /// `c_k` over `Z/k`.
    Standard { k: u64 },
    /// `χ ∘ c` over an arbitrary finite ring.
    Character {
        ring: RingDescriptor,
        character: CharacterSpec,
    },
}

#[derive(Debug, Clone)]
pub struct CocycleRequest {
    pub source: CocycleSource,
    pub subgroup: Option<SubgroupLabel>,
    pub decide: bool,
    pub coefficients: Coefficients,
    pub samples: u64,
    pub seed: u64,
}

impl CocycleRequest {
    pub fn new(source: CocycleSource) -> Self {
        CocycleRequest {
            source,
            subgroup: None,
            decide: false,
            coefficients: Coefficients::Cyclic,
            samples: DEFAULT_CHECK_SAMPLES,
            seed: 1,
        }
    }

    fn echo(&self) -> String {
        let mut s = String::from("projgap cocycle");
        match &self.source {
            CocycleSource::Standard { k } => s.push_str(&format!(" --k {k}")),
            CocycleSource::Character { ring, character } => s.push_str(&format!(
                " --ring '{}' --character '{}'",
                serde_json::to_string(ring).expect("serializable"),
                serde_json::to_string(character).expect("serializable")
            )),
        }
        match &self.subgroup {
            Some(SubgroupLabel::Translations) => s.push_str(" --subgroup translations"),
            Some(SubgroupLabel::Linear) => s.push_str(" --subgroup linear"),
            Some(SubgroupLabel::Elements(e)) => s.push_str(&format!(
                " --subgroup {}",
                e.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            )),
            None => {}
        }
        if self.decide {
            s.push_str(" --decide");
        }
        if self.coefficients == Coefficients::Circle {
            s.push_str(" --coefficients circle");
        }
        s.push_str(&format!(
            " --samples {} --check-seed {}",
            self.samples, self.seed
        ));
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetryReport {
    #[serde(flatten)]
    pub result: Symmetry,
    /// The asymmetric pair as elements of the ambient group.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elements: Option<[String; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CocycleReport {
    pub command: String,
    pub group: GroupDescriptor,
    pub group_order: u64,
    pub order: u64,
    pub identity: IdentityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restricted: Option<RestrictedReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coboundary: Option<CoboundaryCertificate>,
    /// Symmetry fast path and the Smith solver agree.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deciders_agree: Option<bool>,
    pub version: String,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestrictedReport {
    pub group: GroupDescriptor,
    pub group_order: u64,
    pub identity: IdentityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<SymmetryReport>,
}

/// Builds the requested cocycle on its full group.
pub fn build_cocycle(
    source: &CocycleSource,
    caps: EnumCaps,
) -> Result<(Arc<IndexedGroup>, PhaseCocycle)> {
    match source {
        CocycleSource::Standard { k } => {
            let g = Arc::new(IndexedGroup::build(FiniteRing::zmod(*k)?, caps)?);
            let c = standard_phase_cocycle(&g)?;
            Ok((g, c))
        }
        CocycleSource::Character { ring, character } => {
            let r = FiniteRing::new(ring)?;
            let g = Arc::new(IndexedGroup::build(r.clone(), caps)?);
            let chi = Character::from_spec(&r, character)?;
            let c = character_compose(&affine_symplectic(&g), &chi)?.tabulated();
            Ok((g, c))
        }
    }
}

/// Subgroup cocycle plus the parent index of each subgroup element.
fn restrict_with_members(
    gamma: &Arc<IndexedGroup>,
    c: &PhaseCocycle,
    label: &SubgroupLabel,
) -> Result<(PhaseCocycle, Vec<usize>)> {
    let members = gamma
        .named_subgroup(label)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown subgroup {label:?}")))?;
    let sub = Subgroup::new(gamma.as_ref(), &members, label.clone())?;
    Ok((restrict(c, label)?, sub.members().to_vec()))
}

fn symmetry_report(
    c: &PhaseCocycle,
    gamma: &IndexedGroup,
    members: Option<&[usize]>,
) -> Result<SymmetryReport> {
    let result = symmetry_test(c)?;
    let elements = match (&result, members) {
        (Symmetry::Asymmetric { g, h, .. }, Some(m)) => Some([
            gamma.element(m[*g]).v_string(),
            gamma.element(m[*h]).v_string(),
        ]),
        _ => None,
    };
    Ok(SymmetryReport { result, elements })
}

trait TranslationLabel {
    fn v_string(&self) -> String;
}

impl TranslationLabel for crate::group::GroupElement {
    /// Translations print as their vector, other elements in full.
    fn v_string(&self) -> String {
        if self.g.a.0 == 1 && self.g.d.0 == 1 && self.g.b.0 == 0 && self.g.c.0 == 0 {
            format!("({},{})", self.v[0].0, self.v[1].0)
        } else {
            self.to_string()
        }
    }
}

pub fn cocycle_report(req: &CocycleRequest, caps: EnumCaps) -> Result<CocycleReport> {
    let t0 = Instant::now();
    let (gamma, c) = build_cocycle(&req.source, caps)?;
    let identity =
        cocycle_identity_check(&c, CheckMode::auto(gamma.order(), req.samples, req.seed))?;
    let (target, restricted) = match &req.subgroup {
        Some(label) => {
            let (sub, members) = restrict_with_members(&gamma, &c, label)?;
            let sub_identity = cocycle_identity_check(
                &sub,
                CheckMode::auto(sub.group().order(), req.samples, req.seed),
            )?;
            let symmetry = match sub.group().is_abelian() {
                Ok(()) => Some(symmetry_report(&sub, &gamma, Some(&members))?),
                Err(_) => None,
            };
            let rep = RestrictedReport {
                group: sub.group().descriptor(),
                group_order: sub.group().order() as u64,
                identity: sub_identity,
                symmetry,
            };
            (sub, Some(rep))
        }
        None => (c.clone(), None),
    };
    let (coboundary, deciders_agree) = if req.decide {
        let solver = CoboundarySolver::new(target.group().clone())?;
        let cert = solver.decide_with(&target, req.coefficients, Route::Auto)?;
        let smith = solver.decide_with(&target, req.coefficients, Route::SmithOnly)?;
        let agree = cert.verdict.is_coboundary() == smith.verdict.is_coboundary();
        (Some(cert), Some(agree))
    } else {
        (None, None)
    };
    Ok(CocycleReport {
        command: req.echo(),
        group: gamma.descriptor(),
        group_order: gamma.order() as u64,
        order: c.order(),
        identity,
        restricted,
        coboundary,
        deciders_agree,
        version: VERSION.into(),
        wall_ms: elapsed_ms(t0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairMethod {
    /// Pullback to `Γ_lcm(k,k')` followed by the exact sector split.
    #[default]
    Reduced,
    /// `Σ π_k(g_i) ⊗ conj(π_k'(g_i))` on the full `d1·d2` space.
    Tensor,
}

impl std::str::FromStr for PairMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reduced" => Ok(PairMethod::Reduced),
            "tensor" => Ok(PairMethod::Tensor),
            other => Err(Error::Parse(format!("unknown method {other:?}"))),
        }
    }
}

impl PairMethod {
    fn name(self) -> &'static str {
        match self {
            PairMethod::Reduced => "reduced",
            PairMethod::Tensor => "tensor",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapBoundReport {
    pub label: String,
    pub delta: f64,
    #[serde(rename = "D")]
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorSummary {
    pub pullback_order: u64,
    pub sector_dim: u64,
    pub sectors: Vec<u64>,
    pub sector_norms: Vec<f64>,
}

/// Verdicts for the tensor cocycle restricted to the translations of the pullback.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairVerdicts {
    pub symmetry: SymmetryReport,
    pub coboundary: String,
    pub smith: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRunReport {
    pub command: String,
    pub kind: String,
    pub groups: Vec<GroupDescriptor>,
    pub m: usize,
    pub k: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kprime: Option<u64>,
    pub diagonal: bool,
    /// Dimension of the operator's space, `|Γ_k|` or `|Γ_k|·|Γ_k'|`.
    pub dim: u64,
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduction: Option<SectorSummary>,
    pub norm: NormEstimate,
    pub seed_values: Vec<f64>,
    pub seed_spread: f64,
    pub all_converged: bool,
    pub gap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdicts: Option<PairVerdicts>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dense_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_bound: Option<GapBoundReport>,
    pub solver: Solver,
    pub seeds: Vec<u64>,
    pub tol: f64,
    pub max_iters: usize,
    pub version: String,
    pub wall_ms: u64,
}

impl NormRunReport {
    pub fn coboundary_verdict(&self) -> &str {
        self.verdicts
            .as_ref()
            .map(|v| v.coboundary.as_str())
            .unwrap_or("")
    }
}

fn gamma(k: u64, caps: EnumCaps) -> Result<Arc<IndexedGroup>> {
    Ok(Arc::new(IndexedGroup::build(FiniteRing::zmod(k)?, caps)?))
}

fn check_m(m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("need m >= 2, got {m}")));
    }
    Ok(())
}

struct Estimate {
    best: NormEstimate,
    seed_values: Vec<f64>,
    all_converged: bool,
}

impl From<NormReport> for Estimate {
    fn from(r: NormReport) -> Self {
        Estimate {
            seed_values: r.per_seed.iter().map(|e| e.value).collect(),
            all_converged: r.all_converged(),
            best: r.best,
        }
    }
}

/// `‖Σ_i π_k(g_i)‖` on `ℓ²(Γ_k)`, with a dense cross-check in small dimension.
pub fn norm_single(k: u64, m: usize, cfg: &RunConfig) -> Result<NormRunReport> {
    check_m(m)?;
    let t0 = Instant::now();
    let g = gamma(k, cfg.caps)?;
    let rep = regular_rep(g.clone(), standard_phase_cocycle(&g)?)?;
    let op = single_sum(&rep, &generator_words(m)?)?;
    let dim = g.order();
    if dim > cfg.max_pair_dim {
        return Err(Error::cap(
            "operator dimension",
            cfg.max_pair_dim as u64,
            dim as u64,
        ));
    }
    let est: Estimate = norm_estimate(&op, &cfg.power)?.into();
    let dense_norm = if dim <= cfg.dense_cap {
        Some(norm_dense_with_cap(
            &to_dense(&op, cfg.dense_cap)?,
            cfg.dense_cap,
        )?)
    } else {
        None
    };
    Ok(NormRunReport {
        command: format!("projgap norm single --k {k} --m {m}{}", cfg.spectral_echo()),
        kind: "single".into(),
        groups: vec![g.descriptor()],
        m,
        k,
        kprime: None,
        diagonal: false,
        dim: dim as u64,
        method: "direct".into(),
        reduction: None,
        seed_spread: relative_spread(est.seed_values.iter().copied()),
        gap: m as f64 - est.best.value,
        norm: est.best,
        seed_values: est.seed_values,
        all_converged: est.all_converged,
        verdicts: None,
        dense_norm,
        gap_bound: cfg.gap_bound(m)?,
        solver: cfg.power.solver,
        seeds: cfg.power.seeds.clone(),
        tol: cfg.power.tol,
        max_iters: cfg.power.max_iters,
        version: VERSION.into(),
        wall_ms: elapsed_ms(t0),
    })
}

/// Symmetry and coboundary verdicts of the tensor cocycle on `(Z/n)²`.
pub fn pair_verdicts(pair: &PairCocycles) -> Result<PairVerdicts> {
    let (sub, members) =
        restrict_with_members(&pair.pullback, &pair.tensor, &SubgroupLabel::Translations)?;
    let symmetry = symmetry_report(&sub, &pair.pullback, Some(&members))?;
    let grp: GroupRef = sub.group().clone();
    let solver = CoboundarySolver::new(grp)?;
    let fast = solver.decide_with(&sub, Coefficients::Cyclic, Route::Auto)?;
    let smith = solver.decide_with(&sub, Coefficients::Cyclic, Route::SmithOnly)?;
    Ok(PairVerdicts {
        symmetry,
        coboundary: fast.verdict.label().into(),
        smith: smith.verdict.label().into(),
    })
}

/// `‖Σ_i π_k(g_i) ⊗ conj(π_k'(g_i))‖`.
pub fn norm_pair(
    k: u64,
    kprime: u64,
    m: usize,
    method: PairMethod,
    cfg: &RunConfig,
) -> Result<NormRunReport> {
    check_m(m)?;
    if k == 0 || kprime == 0 {
        return Err(Error::InvalidArgument("k and k' must be positive".into()));
    }
    let t0 = Instant::now();
    let n = num_integer::lcm(k, kprime);
    let (gk, gkp) = (gamma(k, cfg.caps)?, gamma(kprime, cfg.caps)?);
    let dim = gk.order() as u64 * gkp.order() as u64;
    let need_pair = method == PairMethod::Reduced || (k >= 3 && kprime >= 3 && k != kprime);
    let pair = if need_pair {
        // the pullback is never materialized elementwise; cap it by the working dimension
        let mut caps = cfg.caps;
        caps.max_group = caps
            .max_group
            .max(cfg.max_pair_dim.saturating_mul(n as usize));
        Some(PairCocycles::build(k, kprime, caps)?)
    } else {
        None
    };
    let verdicts = match &pair {
        Some(p) if k >= 3 && kprime >= 3 && k != kprime => Some(pair_verdicts(p)?),
        _ => None,
    };
    let words = generator_words(m)?;
    let tensor_op = |cap: usize| -> Result<TensorSumOperator> {
        if dim > cap as u64 {
            return Err(Error::cap("tensor dimension", cap as u64, dim));
        }
        let r1 = regular_rep(gk.clone(), standard_phase_cocycle(&gk)?)?;
        let r2 = regular_rep(gkp.clone(), standard_phase_cocycle(&gkp)?)?;
        tensor_sum(&r1, &r2, &words)
    };
    let (est, reduction) = match method {
        PairMethod::Tensor => {
            let op = tensor_op(cfg.max_pair_dim)?;
            (Estimate::from(norm_estimate(&op, &cfg.power)?), None)
        }
        PairMethod::Reduced => {
            let p = pair.as_ref().expect("built for the reduced method");
            let gens: Vec<usize> = generator_tuple(&p.pullback, m)?
                .iter()
                .map(|x| p.pullback.index(x))
                .collect::<Result<_>>()?;
            let red = SectorReduction::new(p.pullback.clone(), &p.tensor, &gens)?;
            if red.sector_dim() > cfg.max_pair_dim {
                return Err(Error::cap(
                    "sector dimension",
                    cfg.max_pair_dim as u64,
                    red.sector_dim() as u64,
                ));
            }
            let sectors = red.sectors();
            let reports = sectors
                .iter()
                .map(|&j| norm_estimate(&red.sector_operator(j)?, &cfg.power))
                .collect::<Result<Vec<_>>>()?;
            let nseeds = cfg.power.seeds.len();
            let seed_values = (0..nseeds)
                .map(|i| {
                    reports
                        .iter()
                        .map(|r| r.per_seed[i].value)
                        .fold(0.0, f64::max)
                })
                .collect();
            let bests: Vec<NormEstimate> = reports.iter().map(|r| r.best.clone()).collect();
            let est = Estimate {
                best: pick_best(&bests),
                seed_values,
                all_converged: reports.iter().all(|r| r.all_converged()),
            };
            let summary = SectorSummary {
                pullback_order: p.pullback.order() as u64,
                sector_dim: red.sector_dim() as u64,
                sectors,
                sector_norms: bests.iter().map(|e| e.value).collect(),
            };
            (est, Some(summary))
        }
    };
    let dense_norm = if dim <= cfg.dense_cap as u64 {
        let op = tensor_op(cfg.dense_cap)?;
        Some(norm_dense_with_cap(
            &to_dense(&op, cfg.dense_cap)?,
            cfg.dense_cap,
        )?)
    } else {
        None
    };
    Ok(NormRunReport {
        command: format!(
            "projgap norm pair --k {k} --kprime {kprime} --m {m} --method {}{}",
            method.name(),
            cfg.spectral_echo()
        ),
        kind: "pair".into(),
        groups: vec![gk.descriptor(), gkp.descriptor()],
        m,
        k,
        kprime: Some(kprime),
        diagonal: k == kprime,
        dim,
        method: method.name().into(),
        reduction,
        seed_spread: relative_spread(est.seed_values.iter().copied()),
        gap: m as f64 - est.best.value,
        norm: est.best,
        seed_values: est.seed_values,
        all_converged: est.all_converged,
        verdicts,
        dense_norm,
        gap_bound: cfg.gap_bound(m)?,
        solver: cfg.power.solver,
        seeds: cfg.power.seeds.clone(),
        tol: cfg.power.tol,
        max_iters: cfg.power.max_iters,
        version: VERSION.into(),
        wall_ms: elapsed_ms(t0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub kind: String,
    pub command: String,
    pub rows: usize,
    pub max_offdiagonal_norm: Option<f64>,
    pub min_offdiagonal_gap: Option<f64>,
    pub max_diagonal_deviation: Option<f64>,
    pub all_converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_bound: Option<GapBoundReport>,
    pub version: String,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub rows: Vec<NormRunReport>,
    pub summary: ScanSummary,
}

impl ScanReport {
    /// One JSON object per line: the rows in `(k, k')` order, then the summary.
    pub fn to_json_lines(&self) -> Result<String> {
        let mut out = String::new();
        for r in &self.rows {
            out.push_str(&serde_json::to_string(r)?);
            out.push('\n');
        }
        out.push_str(&serde_json::to_string(&self.summary)?);
        out.push('\n');
        Ok(out)
    }

    /// CSV projection of the rows.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record([
            "k",
            "kprime",
            "m",
            "dim",
            "norm",
            "residual",
            "iterations",
            "gap",
            "coboundary_verdict",
            "wall_ms",
        ])
        .map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.k.to_string(),
                r.kprime.map(|x| x.to_string()).unwrap_or_default(),
                r.m.to_string(),
                r.dim.to_string(),
                r.norm.value.to_string(),
                r.norm.residual.to_string(),
                r.norm.iterations.to_string(),
                r.gap.to_string(),
                r.coboundary_verdict().to_string(),
                r.wall_ms.to_string(),
            ])
            .map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// All pairs `kmin ≤ k ≤ k' ≤ kmax`, rows computed in parallel and sorted by `(k, k')`.
pub fn scan(
    kmin: u64,
    kmax: u64,
    m: usize,
    method: PairMethod,
    cfg: &RunConfig,
) -> Result<ScanReport> {
    if kmin > kmax || kmin == 0 {
        return Err(Error::InvalidArgument(format!(
            "empty grid: kmin={kmin}, kmax={kmax}"
        )));
    }
    check_m(m)?;
    let t0 = Instant::now();
    let pairs: Vec<(u64, u64)> = (kmin..=kmax)
        .flat_map(|k| (k..=kmax).map(move |kp| (k, kp)))
        .collect();
    let rows = run_with_threads(cfg.threads, || {
        pairs
            .par_iter()
            .map(|&(k, kp)| norm_pair(k, kp, m, method, cfg))
            .collect::<Result<Vec<_>>>()
    })??;
    let off: Vec<&NormRunReport> = rows.iter().filter(|r| !r.diagonal).collect();
    let diag: Vec<&NormRunReport> = rows.iter().filter(|r| r.diagonal).collect();
    let fold = |it: &mut dyn Iterator<Item = f64>, f: fn(f64, f64) -> f64| it.reduce(f);
    let summary = ScanSummary {
        kind: "summary".into(),
        command: format!(
            "projgap scan --kmin {kmin} --kmax {kmax} --m {m} --method {}{}",
            method.name(),
            cfg.spectral_echo()
        ),
        rows: rows.len(),
        max_offdiagonal_norm: fold(&mut off.iter().map(|r| r.norm.value), f64::max),
        min_offdiagonal_gap: fold(&mut off.iter().map(|r| r.gap), f64::min),
        max_diagonal_deviation: fold(
            &mut diag.iter().map(|r| (r.norm.value - m as f64).abs()),
            f64::max,
        ),
        all_converged: rows.iter().all(|r| r.all_converged),
        gap_bound: cfg.gap_bound(m)?,
        version: VERSION.into(),
        wall_ms: elapsed_ms(t0),
    };
    Ok(ScanReport { rows, summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_info_sizes() {
        for (k, sizes) in [(1u64, (1, 1, 1)), (3, (3, 24, 216)), (5, (5, 120, 3000))] {
            let info = group_info(&RingDescriptor::zmod(k), EnumCaps::default()).unwrap();
            assert_eq!((info.ring_order, info.sl2_order, info.group_order), sizes);
        }
    }

    #[test]
    fn cocycle_translations_k3() {
        let mut req = CocycleRequest::new(CocycleSource::Standard { k: 3 });
        req.subgroup = Some(SubgroupLabel::Translations);
        req.decide = true;
        let rep = cocycle_report(&req, EnumCaps::default()).unwrap();
        assert!(rep.identity.passed);
        let sym = rep.restricted.unwrap().symmetry.unwrap();
        assert_eq!(
            sym.elements,
            Some(["(1,0)".to_string(), "(0,1)".to_string()])
        );
        assert_eq!(
            rep.coboundary.unwrap().verdict.label(),
            "not_coboundary(symmetry_violation)"
        );
        assert_eq!(rep.deciders_agree, Some(true));
    }

    #[test]
    fn single_norms_trivial_and_k3() {
        let cfg = RunConfig::default();
        let r = norm_single(1, 3, &cfg).unwrap();
        assert!((r.norm.value - 3.0).abs() < 1e-12);
        let r = norm_single(3, 3, &cfg).unwrap();
        assert!(r.norm.value < 3.0 - 1e-3);
        assert!((r.norm.value - r.dense_norm.unwrap()).abs() <= 1e-8 * r.norm.value);
        assert!(norm_single(3, 1, &cfg).is_err());
    }

    #[test]
    fn small_pairs_agree_across_methods() {
        let cfg = RunConfig::default();
        for (k, kp) in [(1u64, 2u64), (2, 2), (2, 3)] {
            let a = norm_pair(k, kp, 3, PairMethod::Reduced, &cfg).unwrap();
            let b = norm_pair(k, kp, 3, PairMethod::Tensor, &cfg).unwrap();
            assert!((a.norm.value - b.norm.value).abs() < 1e-7, "({k},{kp})");
            if let Some(d) = a.dense_norm {
                assert!((a.norm.value - d).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn scan_errors_and_csv() {
        let cfg = RunConfig::default();
        assert!(scan(4, 3, 3, PairMethod::Reduced, &cfg).is_err());
        let s = scan(1, 2, 3, PairMethod::Reduced, &cfg).unwrap();
        assert_eq!(s.rows.len(), 3);
        let csv = s.to_csv().unwrap();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv
            .starts_with("k,kprime,m,dim,norm,residual,iterations,gap,coboundary_verdict,wall_ms"));
        assert_eq!(s.to_json_lines().unwrap().lines().count(), 4);
    }
}
