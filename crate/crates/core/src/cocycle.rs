//! Exact 2-cocycles with ring or `Z/L` coefficients (trivial action).
//!
//! A [`PhaseCocycle`] of order `L` stores rotation numbers `q` standing for
//! the phase `exp(2πi q / L)`. All arithmetic is integer arithmetic mod `L`.

use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{
    sl2_generators, FiniteGroup, GroupDescriptor, GroupRef, IndexedGroup, ReductionMap, Subgroup,
    SubgroupLabel, TranslationGroup,
};
use crate::ring::{Elem, FiniteRing, RingDescriptor};

type AdditiveFn = dyn Fn(usize, usize) -> Elem + Send + Sync;
type PhaseFn = dyn Fn(usize, usize) -> u64 + Send + Sync;

/// A ring-valued 2-cocycle `c(g,h) + c(gh,k) = c(g,hk) + c(h,k)`.
#[derive(Clone)]
pub struct AdditiveCocycle {
    group: GroupRef,
    ring: FiniteRing,
    eval: Arc<AdditiveFn>,
}

impl fmt::Debug for AdditiveCocycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AdditiveCocycle")
            .field("group", &self.group.descriptor())
            .field("ring", self.ring.descriptor())
            .finish()
    }
}

impl AdditiveCocycle {
    pub fn new(group: GroupRef, ring: FiniteRing, eval: Arc<AdditiveFn>) -> Self {
        AdditiveCocycle { group, ring, eval }
    }

    pub fn group(&self) -> &GroupRef {
        &self.group
    }

    pub fn ring(&self) -> &FiniteRing {
        &self.ring
    }

    pub fn value(&self, g: usize, h: usize) -> Elem {
        (self.eval)(g, h)
    }
}

/// `ω((x,y),(z,t)) = xt - yz`
pub fn symplectic_form(r: &FiniteRing, a: [Elem; 2], b: [Elem; 2]) -> Elem {
    r.sub(r.mul(a[0], b[1]), r.mul(a[1], b[0]))
}

/// The symplectic cocycle on the additive group `R^2`.
pub fn symplectic_cocycle(ring: &FiniteRing) -> AdditiveCocycle {
    let tg = Arc::new(TranslationGroup::new(ring.clone()));
    let r = ring.clone();
    let t = tg.clone();
    AdditiveCocycle {
        group: tg,
        ring: ring.clone(),
        eval: Arc::new(move |g, h| symplectic_form(&r, t.vector(g), t.vector(h))),
    }
}

/// Extends an `SL_2(R)`-invariant cocycle on `R^2` to `R^2 ⋊ SL_2(R)` by
/// `c((a,g),(b,h)) = c(a, g·b)`.
///
/// Invariance is checked on the elementary generators of `SL_2(R)` for all pairs in `R^2`.
pub fn extend_to_semidirect(
    c: &AdditiveCocycle,
    group: &Arc<IndexedGroup>,
) -> Result<AdditiveCocycle> {
    let ring = group.ring().clone();
    let tg = TranslationGroup::new(ring.clone());
    if c.ring() != &ring || c.group().descriptor() != tg.descriptor() {
        return Err(Error::GroupMismatch(
            "cocycle does not live on the translation group of this ring".into(),
        ));
    }
    let n = tg.order();
    for g in sl2_generators(&ring) {
        let moved: Vec<usize> = (0..n)
            .map(|a| tg.index_of(g.apply(&ring, tg.vector(a))))
            .collect();
        for a in 0..n {
            for b in 0..n {
                if c.value(moved[a], moved[b]) != c.value(a, b) {
                    return Err(Error::NotInvariant(format!(
                        "c(g·a, g·b) != c(a, b) at a={a}, b={b}"
                    )));
                }
            }
        }
    }
    let inner = c.clone();
    let grp = group.clone();
    Ok(AdditiveCocycle {
        group: group.clone(),
        ring: ring.clone(),
        eval: Arc::new(move |x, y| {
            let ex = grp.element(x);
            let ey = grp.element(y);
            let gb = ex.g.apply(&ring, ey.v);
            inner.value(tg.index_of(ex.v), tg.index_of(gb))
        }),
    })
}

/// The extended symplectic cocycle on `R^2 ⋊ SL_2(R)`.
pub fn affine_symplectic(group: &Arc<IndexedGroup>) -> AdditiveCocycle {
    let ring = group.ring().clone();
    let grp = group.clone();
    AdditiveCocycle {
        group: group.clone(),
        ring: ring.clone(),
        eval: Arc::new(move |x, y| {
            let ex = grp.element(x);
            let ey = grp.element(y);
            symplectic_form(&ring, ex.v, ex.g.apply(&ring, ey.v))
        }),
    }
}

#[derive(Clone)]
enum Values {
    Table(Arc<Vec<u32>>),
    Func(Arc<PhaseFn>),
}

/// A `Z/L`-valued 2-cocycle read as the phase `exp(2πi·value/L)`.
#[derive(Clone)]
pub struct PhaseCocycle {
    group: GroupRef,
    order: u64,
    values: Values,
}

impl fmt::Debug for PhaseCocycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhaseCocycle")
            .field("group", &self.group.descriptor())
            .field("order", &self.order)
            .finish()
    }
}

/// Tables are materialized only up to this many entries.
const TABULATE_LIMIT: usize = 30_000_000;

impl PhaseCocycle {
    pub fn from_fn(group: GroupRef, order: u64, f: Arc<PhaseFn>) -> Result<Self> {
        if order == 0 || order > u32::MAX as u64 {
            return Err(Error::InvalidArgument(format!(
                "phase order {order} out of range"
            )));
        }
        Ok(PhaseCocycle {
            group,
            order,
            values: Values::Func(f),
        })
    }

    /// Row-major `|G| x |G|` table of values in `[0, L)`.
    pub fn from_table(group: GroupRef, order: u64, table: Vec<u32>) -> Result<Self> {
        let n = group.order();
        if table.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: table.len(),
            });
        }
        if order == 0 || order > u32::MAX as u64 {
            return Err(Error::InvalidArgument(format!(
                "phase order {order} out of range"
            )));
        }
        if let Some(v) = table.iter().find(|&&v| v as u64 >= order) {
            return Err(Error::InvalidArgument(format!(
                "value {v} not below order {order}"
            )));
        }
        Ok(PhaseCocycle {
            group,
            order,
            values: Values::Table(Arc::new(table)),
        })
    }

    pub fn trivial(group: GroupRef) -> Self {
        PhaseCocycle {
            group,
            order: 1,
            values: Values::Func(Arc::new(|_, _| 0)),
        }
    }

    /// The coboundary `∂b(g,h) = b(g) + b(h) - b(gh)` mod `L`.
    pub fn coboundary_of(group: GroupRef, order: u64, b: &[u64]) -> Result<Self> {
        if b.len() != group.order() {
            return Err(Error::DimensionMismatch {
                expected: group.order(),
                got: b.len(),
            });
        }
        let b: Vec<u64> = b.iter().map(|v| v % order).collect();
        let grp = group.clone();
        Self::from_fn(
            group,
            order,
            Arc::new(move |g, h| (b[g] + b[h] + order - b[grp.mul(g, h)]) % order),
        )
    }

    pub fn group(&self) -> &GroupRef {
        &self.group
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    #[inline]
    pub fn value(&self, g: usize, h: usize) -> u64 {
        match &self.values {
            Values::Table(t) => t[g * self.group.order() + h] as u64,
            Values::Func(f) => f(g, h),
        }
    }

    /// Caches all values in a table when it fits.
    pub fn tabulated(self) -> Self {
        let n = self.group.order();
        if matches!(self.values, Values::Table(_)) || n * n > TABULATE_LIMIT {
            return self;
        }
        let table: Vec<u32> = (0..n * n)
            .into_par_iter()
            .map(|i| self.value(i / n, i % n) as u32)
            .collect();
        PhaseCocycle {
            group: self.group,
            order: self.order,
            values: Values::Table(Arc::new(table)),
        }
    }

    /// Same phases written over order `new_order` (a multiple of the current order).
    pub fn lift(&self, new_order: u64) -> Result<Self> {
        if !new_order.is_multiple_of(self.order) {
            return Err(Error::InvalidArgument(format!(
                "{new_order} is not a multiple of {}",
                self.order
            )));
        }
        let scale = new_order / self.order;
        let inner = self.clone();
        Self::from_fn(
            self.group.clone(),
            new_order,
            Arc::new(move |g, h| inner.value(g, h) * scale),
        )
    }

    /// `c(e, ·) = c(·, e) = 0`.
    pub fn is_normalized(&self) -> bool {
        let e = self.group.identity();
        (0..self.group.order()).all(|g| self.value(e, g) == 0 && self.value(g, e) == 0)
    }

    pub fn to_table(&self) -> Result<CocycleTable> {
        let n = self.group.order();
        if n * n > TABULATE_LIMIT {
            return Err(Error::cap(
                "cocycle table entries",
                TABULATE_LIMIT as u64,
                (n * n) as u64,
            ));
        }
        Ok(CocycleTable {
            order: self.order,
            group: self.group.descriptor(),
            values: (0..n)
                .map(|g| (0..n).map(|h| self.value(g, h)).collect())
                .collect(),
        })
    }
}

/// JSON fixture format: `{"order": L, "group": <descriptor>, "values": [[...], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CocycleTable {
    pub order: u64,
    pub group: GroupDescriptor,
    pub values: Vec<Vec<u64>>,
}

impl CocycleTable {
    /// Attaches the table to a group whose descriptor matches.
    pub fn into_cocycle(self, group: GroupRef) -> Result<PhaseCocycle> {
        if group.descriptor() != self.group {
            return Err(Error::GroupMismatch(
                "table descriptor differs from group".into(),
            ));
        }
        let n = group.order();
        if self.values.len() != n || self.values.iter().any(|row| row.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.values.len(),
            });
        }
        let flat: Vec<u32> = self
            .values
            .iter()
            .flatten()
            .map(|&v| u32::try_from(v).unwrap_or(u32::MAX))
            .collect();
        PhaseCocycle::from_table(group, self.order, flat)
    }
}

/// An additive character `(R, +) -> Z/L`.
#[derive(Debug, Clone)]
pub struct Character {
    ring: FiniteRing,
    order: u64,
    table: Vec<u32>,
}

/// JSON/CLI description of a character.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CharacterSpec {
    /// `x -> x` on `Z/n`.
    Canonical,
    Trivial,
    /// `x -> u·x` on `Z/n`.
    Scaled {
        u: u64,
    },
    /// `x -> Σ w_i·coeff_i(x)` in `Z/p`.
    Coefficient {
        weights: Vec<u64>,
    },
}

impl Character {
    /// Validates that `table` is additive.
    pub fn from_table(ring: &FiniteRing, order: u64, table: Vec<u32>) -> Result<Self> {
        if table.len() != ring.card() as usize {
            return Err(Error::DimensionMismatch {
                expected: ring.card() as usize,
                got: table.len(),
            });
        }
        if order == 0 || table.iter().any(|&v| v as u64 >= order) {
            return Err(Error::InvalidArgument(
                "character values out of range".into(),
            ));
        }
        for x in ring.elements() {
            for y in ring.elements() {
                let lhs = table[ring.add(x, y).0 as usize] as u64;
                let rhs = (table[x.0 as usize] as u64 + table[y.0 as usize] as u64) % order;
                if lhs != rhs {
                    return Err(Error::InvalidArgument(format!(
                        "not additive at ({}, {})",
                        x.0, y.0
                    )));
                }
            }
        }
        Ok(Character {
            ring: ring.clone(),
            order,
            table,
        })
    }

    pub fn from_spec(ring: &FiniteRing, spec: &CharacterSpec) -> Result<Self> {
        match spec {
            CharacterSpec::Canonical => Self::scaled(ring, 1),
            CharacterSpec::Trivial => Self::trivial(ring),
            CharacterSpec::Scaled { u } => Self::scaled(ring, *u),
            CharacterSpec::Coefficient { weights } => Self::coefficient(ring, weights),
        }
    }

    pub fn canonical(ring: &FiniteRing) -> Result<Self> {
        Self::scaled(ring, 1)
    }

    pub fn trivial(ring: &FiniteRing) -> Result<Self> {
        Self::from_table(ring, 1, vec![0; ring.card() as usize])
    }

    pub fn scaled(ring: &FiniteRing, u: u64) -> Result<Self> {
        let n = ring
            .modulus()
            .ok_or_else(|| Error::InvalidArgument("scaled characters need Z/n".into()))?
            as u64;
        let table = ring
            .elements()
            .map(|x| ((x.0 as u64 * (u % n)) % n) as u32)
            .collect();
        Self::from_table(ring, n, table)
    }

    /// Linear functional on the coefficient vector, valued in `Z/p`.
    pub fn coefficient(ring: &FiniteRing, weights: &[u64]) -> Result<Self> {
        let p = ring.characteristic() as u64;
        let table = ring
            .elements()
            .map(|x| {
                let coeffs = ring.coefficients(x);
                if weights.len() != coeffs.len() {
                    return Err(Error::InvalidArgument(format!(
                        "expected {} weights, got {}",
                        coeffs.len(),
                        weights.len()
                    )));
                }
                Ok((coeffs
                    .iter()
                    .zip(weights)
                    .map(|(&c, &w)| c as u64 * (w % p))
                    .sum::<u64>()
                    % p) as u32)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_table(ring, p, table)
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn apply(&self, x: Elem) -> u64 {
        self.table[x.0 as usize] as u64
    }
}

/// `exp(2πi·c(g,h)/k)` for a cocycle with coefficients in `Z/k`.
pub fn phase_family(c: &AdditiveCocycle) -> Result<PhaseCocycle> {
    let ch = Character::canonical(c.ring())?;
    character_compose(c, &ch)
}

/// `χ ∘ c`
pub fn character_compose(c: &AdditiveCocycle, chi: &Character) -> Result<PhaseCocycle> {
    if c.ring() != &chi.ring {
        return Err(Error::GroupMismatch(
            "character is defined on a different ring".into(),
        ));
    }
    let inner = c.clone();
    let chi = chi.clone();
    let order = chi.order;
    PhaseCocycle::from_fn(
        c.group.clone(),
        order,
        Arc::new(move |g, h| chi.apply(inner.value(g, h))),
    )
}

/// The family member `c_k` on `Γ_k = (Z/k)^2 ⋊ SL_2(Z/k)`.
pub fn standard_phase_cocycle(group: &Arc<IndexedGroup>) -> Result<PhaseCocycle> {
    Ok(phase_family(&affine_symplectic(group))?.tabulated())
}

/// How [`cocycle_identity_check`] visits triples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum CheckMode {
    Exhaustive { cap: u64 },
    Sampled { samples: u64, seed: u64 },
}

impl CheckMode {
    pub const DEFAULT_EXHAUSTIVE_CAP: u64 = 100_000_000;

    /// Exhaustive when `|G|^3` fits the default cap, otherwise `samples` random triples.
    pub fn auto(order: usize, samples: u64, seed: u64) -> Self {
        if (order as u128).pow(3) <= Self::DEFAULT_EXHAUSTIVE_CAP as u128 {
            CheckMode::Exhaustive {
                cap: Self::DEFAULT_EXHAUSTIVE_CAP,
            }
        } else {
            CheckMode::Sampled { samples, seed }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub mode: CheckMode,
    pub triples_checked: u64,
    pub passed: bool,
    pub violation: Option<[usize; 3]>,
}

#[inline]
fn identity_holds(c: &PhaseCocycle, g: usize, h: usize, k: usize) -> bool {
    let grp = &c.group;
    let l = c.order;
    let lhs = (c.value(g, h) + c.value(grp.mul(g, h), k)) % l;
    let rhs = (c.value(g, grp.mul(h, k)) + c.value(h, k)) % l;
    lhs == rhs
}

/// Checks `c(g,h) + c(gh,k) = c(g,hk) + c(h,k)` in `Z/L`.
pub fn cocycle_identity_check(c: &PhaseCocycle, mode: CheckMode) -> Result<IdentityReport> {
    let n = c.group.order();
    match mode {
        CheckMode::Exhaustive { cap } => {
            let total = (n as u128).pow(3);
            if total > cap as u128 {
                return Err(Error::cap("exhaustive triples", cap, total));
            }
            let violation = (0..n).into_par_iter().find_map_first(|g| {
                for h in 0..n {
                    for k in 0..n {
                        if !identity_holds(c, g, h, k) {
                            return Some([g, h, k]);
                        }
                    }
                }
                None
            });
            let triples_checked = match violation {
                Some([g, h, k]) => ((g * n + h) * n + k + 1) as u64,
                None => total as u64,
            };
            Ok(IdentityReport {
                mode,
                triples_checked,
                passed: violation.is_none(),
                violation,
            })
        }
        CheckMode::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for i in 0..samples {
                let (g, h, k) = (
                    rng.gen_range(0..n),
                    rng.gen_range(0..n),
                    rng.gen_range(0..n),
                );
                if !identity_holds(c, g, h, k) {
                    return Ok(IdentityReport {
                        mode,
                        triples_checked: i + 1,
                        passed: false,
                        violation: Some([g, h, k]),
                    });
                }
            }
            Ok(IdentityReport {
                mode,
                triples_checked: samples,
                passed: true,
                violation: None,
            })
        }
    }
}

/// Restriction to a subgroup given by parent indices.
pub fn restrict_to(
    c: &PhaseCocycle,
    members: &[usize],
    label: SubgroupLabel,
) -> Result<PhaseCocycle> {
    let sub = Arc::new(Subgroup::new(c.group.as_ref(), members, label)?);
    let map: Vec<usize> = sub.members().to_vec();
    let inner = c.clone();
    PhaseCocycle::from_fn(
        sub,
        c.order,
        Arc::new(move |g, h| inner.value(map[g], map[h])),
    )
}

/// Restriction to a named subgroup (`translations`, `linear`) or an explicit element list.
pub fn restrict(c: &PhaseCocycle, label: &SubgroupLabel) -> Result<PhaseCocycle> {
    let members = c.group.named_subgroup(label).ok_or_else(|| {
        Error::InvalidArgument(format!("group does not define subgroup {label:?}"))
    })?;
    restrict_to(c, &members, label.clone())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Symmetry {
    Symmetric,
    /// `c(g,h) = forward`, `c(h,g) = backward`, `forward != backward`.
    Asymmetric {
        g: usize,
        h: usize,
        forward: u64,
        backward: u64,
    },
}

/// On an abelian group every coboundary is symmetric; the first asymmetric pair
/// (in the order `g` ascending, `h < g` ascending) is returned as witness.
pub fn symmetry_test(c: &PhaseCocycle) -> Result<Symmetry> {
    c.group.is_abelian()?;
    let n = c.group.order();
    for g in 0..n {
        for h in 0..g {
            let (f, b) = (c.value(g, h), c.value(h, g));
            if f != b {
                return Ok(Symmetry::Asymmetric {
                    g,
                    h,
                    forward: f,
                    backward: b,
                });
            }
        }
    }
    Ok(Symmetry::Symmetric)
}

/// Cocycle of `π ⊗ conj(π')` pulled back along `Γ_n -> Γ_k`, `Γ_n -> Γ_k'`:
/// `c(θg, θh) - c'(θ'g, θ'h)` over order `lcm(L, L')`.
pub fn tensor_cocycle(
    c: &PhaseCocycle,
    theta: &ReductionMap,
    c2: &PhaseCocycle,
    theta2: &ReductionMap,
) -> Result<PhaseCocycle> {
    if !Arc::ptr_eq(theta.source(), theta2.source())
        && theta.source().descriptor() != theta2.source().descriptor()
    {
        return Err(Error::GroupMismatch(
            "reductions start from different groups".into(),
        ));
    }
    for (coc, th) in [(c, theta), (c2, theta2)] {
        if coc.group.descriptor() != th.target().descriptor() {
            return Err(Error::GroupMismatch(
                "cocycle group differs from reduction target".into(),
            ));
        }
    }
    let order = c.order.lcm(&c2.order);
    let (s1, s2) = (order / c.order, order / c2.order);
    let src = theta.source().clone();
    let n = src.order();
    let cache = |th: &ReductionMap| -> Vec<u32> {
        (0..n).into_par_iter().map(|i| th.map(i) as u32).collect()
    };
    let (m1, m2) = (cache(theta), cache(theta2));
    let (a, b) = (c.clone(), c2.clone());
    PhaseCocycle::from_fn(
        src,
        order,
        Arc::new(move |g, h| {
            let x = a.value(m1[g] as usize, m1[h] as usize) * s1;
            let y = b.value(m2[g] as usize, m2[h] as usize) * s2;
            (x + order - y) % order
        }),
    )
}

/// `c_k ⊗ conj(c_k')` on the pullback `Γ_lcm(k,k')`.
pub struct PairCocycles {
    pub pullback: Arc<IndexedGroup>,
    pub left: Arc<IndexedGroup>,
    pub right: Arc<IndexedGroup>,
    pub tensor: PhaseCocycle,
}

impl PairCocycles {
    pub fn build(k: u64, kprime: u64, caps: crate::group::EnumCaps) -> Result<Self> {
        if k == 0 || kprime == 0 {
            return Err(Error::InvalidArgument("k and k' must be positive".into()));
        }
        let n = k.lcm(&kprime);
        let build = |m: u64| -> Result<Arc<IndexedGroup>> {
            Ok(Arc::new(IndexedGroup::build(
                FiniteRing::new(&RingDescriptor::zmod(m))?,
                caps,
            )?))
        };
        let pullback = build(n)?;
        let left = if k == n { pullback.clone() } else { build(k)? };
        let right = if kprime == n {
            pullback.clone()
        } else {
            build(kprime)?
        };
        let c = standard_phase_cocycle(&left)?;
        let c2 = standard_phase_cocycle(&right)?;
        let tensor = tensor_cocycle(
            &c,
            &ReductionMap::new(pullback.clone(), left.clone())?,
            &c2,
            &ReductionMap::new(pullback.clone(), right.clone())?,
        )?;
        Ok(PairCocycles {
            pullback,
            left,
            right,
            tensor,
        })
    }
}
