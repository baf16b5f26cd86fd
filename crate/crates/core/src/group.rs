//! `SL_2(R)`, the affine groups `R^2 ⋊ SL_2(R)` and their index maps.
//!
//! Group elements are addressed by a dense index in `[0, |G|)`. For the
//! semidirect product the index is mixed-radix over `(v.x, v.y, g)`, where
//! the linear parts are listed identity first and then in lexicographic
//! order of `(a, b, c, d)`. This keeps `index(e) = 0` and makes the order
//! of operator rows reproducible across runs.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ring::{Elem, FiniteRing, RingDescriptor};

/// Rings up to this size enumerate `SL_2` by brute force; larger ones use generator closure.
pub const BRUTE_FORCE_RING_LIMIT: u32 = 64;

/// Groups up to this order cache a full Cayley table.
const CAYLEY_LIMIT: usize = 3000;

/// Common interface for the finite groups cocycles live on.
pub trait FiniteGroup: Send + Sync {
    fn order(&self) -> usize;
    fn identity(&self) -> usize {
        0
    }
    fn mul(&self, x: usize, y: usize) -> usize;
    fn inv(&self, x: usize) -> usize;
    fn descriptor(&self) -> GroupDescriptor;

    /// Parent-group indices of a named subgroup, when the group knows it.
    fn named_subgroup(&self, _label: &SubgroupLabel) -> Option<Vec<usize>> {
        None
    }

    fn is_abelian(&self) -> Result<()> {
        let n = self.order();
        for x in 0..n {
            for y in (x + 1)..n {
                if self.mul(x, y) != self.mul(y, x) {
                    return Err(Error::NotAbelian(x, y));
                }
            }
        }
        Ok(())
    }
}

pub type GroupRef = Arc<dyn FiniteGroup>;

/// Names a subgroup of `R^2 ⋊ SL_2(R)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubgroupLabel {
    Translations,
    Linear,
    /// Explicit element indices in the parent group.
    Elements(Vec<usize>),
}

impl std::str::FromStr for SubgroupLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "translations" => Ok(SubgroupLabel::Translations),
            "linear" => Ok(SubgroupLabel::Linear),
            other => Err(Error::Parse(format!("unknown subgroup {other:?}"))),
        }
    }
}

/// Serialized group identity: `{"ring": {...}}`, optionally with a `subgroup`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupDescriptor {
    pub ring: RingDescriptor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subgroup: Option<SubgroupLabel>,
}

impl GroupDescriptor {
    pub fn full(ring: RingDescriptor) -> Self {
        GroupDescriptor {
            ring,
            subgroup: None,
        }
    }
}

/// A 2x2 matrix `[[a, b], [c, d]]` with `ad - bc = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SL2Elem {
    pub a: Elem,
    pub b: Elem,
    pub c: Elem,
    pub d: Elem,
}

impl SL2Elem {
    pub fn identity(r: &FiniteRing) -> Self {
        SL2Elem {
            a: r.one(),
            b: r.zero(),
            c: r.zero(),
            d: r.one(),
        }
    }

    /// `[[0, -1], [1, 0]]`
    pub fn s(r: &FiniteRing) -> Self {
        SL2Elem {
            a: r.zero(),
            b: r.neg(r.one()),
            c: r.one(),
            d: r.zero(),
        }
    }

    /// `[[1, 1], [0, 1]]`
    pub fn t(r: &FiniteRing) -> Self {
        Self::upper(r, r.one())
    }

    pub fn upper(r: &FiniteRing, x: Elem) -> Self {
        SL2Elem {
            a: r.one(),
            b: x,
            c: r.zero(),
            d: r.one(),
        }
    }

    pub fn lower(r: &FiniteRing, x: Elem) -> Self {
        SL2Elem {
            a: r.one(),
            b: r.zero(),
            c: x,
            d: r.one(),
        }
    }

    pub fn det(&self, r: &FiniteRing) -> Elem {
        r.sub(r.mul(self.a, self.d), r.mul(self.b, self.c))
    }

    pub fn mul(&self, r: &FiniteRing, o: &SL2Elem) -> SL2Elem {
        SL2Elem {
            a: r.add(r.mul(self.a, o.a), r.mul(self.b, o.c)),
            b: r.add(r.mul(self.a, o.b), r.mul(self.b, o.d)),
            c: r.add(r.mul(self.c, o.a), r.mul(self.d, o.c)),
            d: r.add(r.mul(self.c, o.b), r.mul(self.d, o.d)),
        }
    }

    pub fn inv(&self, r: &FiniteRing) -> SL2Elem {
        SL2Elem {
            a: self.d,
            b: r.neg(self.b),
            c: r.neg(self.c),
            d: self.a,
        }
    }

    pub fn apply(&self, r: &FiniteRing, v: [Elem; 2]) -> [Elem; 2] {
        [
            r.add(r.mul(self.a, v[0]), r.mul(self.b, v[1])),
            r.add(r.mul(self.c, v[0]), r.mul(self.d, v[1])),
        ]
    }

    fn key(&self) -> [u32; 4] {
        [self.a.0, self.b.0, self.c.0, self.d.0]
    }
}

/// Enumeration strategy for `SL_2(R)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sl2Method {
    /// Filter all `|R|^4` matrices by determinant.
    BruteForce,
    /// Close the elementary matrices `upper(r)`, `lower(r)` (r an additive generator) under multiplication.
    Closure,
    /// Brute force for `|R| <= 64`, closure above.
    Auto,
}

/// Enumeration caps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumCaps {
    pub max_sl2: usize,
    pub max_group: usize,
}

impl Default for EnumCaps {
    fn default() -> Self {
        EnumCaps {
            max_sl2: 1_000_000,
            max_group: 10_000_000,
        }
    }
}

/// Generators of `SL_2(R)` as a group: elementary matrices over additive generators.
///
/// Finite commutative rings are semilocal, so `SL_2(R)` equals the group
/// generated by elementary matrices.
pub fn sl2_generators(ring: &FiniteRing) -> Vec<SL2Elem> {
    ring.additive_generators()
        .into_iter()
        .flat_map(|x| [SL2Elem::upper(ring, x), SL2Elem::lower(ring, x)])
        .collect()
}

/// All of `SL_2(R)`, identity first, then lexicographic in `(a, b, c, d)`.
pub fn sl2_enumerate(ring: &FiniteRing, cap: usize) -> Result<Vec<SL2Elem>> {
    sl2_enumerate_with(ring, Sl2Method::Auto, cap)
}

pub fn sl2_enumerate_with(
    ring: &FiniteRing,
    method: Sl2Method,
    cap: usize,
) -> Result<Vec<SL2Elem>> {
    let method = match method {
        Sl2Method::Auto if ring.card() <= BRUTE_FORCE_RING_LIMIT => Sl2Method::BruteForce,
        Sl2Method::Auto => Sl2Method::Closure,
        m => m,
    };
    let one = ring.one();
    let mut out = match method {
        Sl2Method::BruteForce => {
            let mut out = Vec::new();
            for a in ring.elements() {
                for b in ring.elements() {
                    for c in ring.elements() {
                        for d in ring.elements() {
                            let m = SL2Elem { a, b, c, d };
                            if m.det(ring) == one {
                                out.push(m);
                                if out.len() > cap {
                                    return Err(Error::cap(
                                        "SL2 size",
                                        cap as u64,
                                        out.len() as u64,
                                    ));
                                }
                            }
                        }
                    }
                }
            }
            out
        }
        Sl2Method::Closure | Sl2Method::Auto => {
            let gens = sl2_generators(ring);
            let id = SL2Elem::identity(ring);
            let mut seen: HashSet<[u32; 4]> = HashSet::new();
            let mut queue = VecDeque::new();
            let mut out = vec![id];
            seen.insert(id.key());
            queue.push_back(id);
            while let Some(x) = queue.pop_front() {
                for g in &gens {
                    let y = x.mul(ring, g);
                    if seen.insert(y.key()) {
                        out.push(y);
                        if out.len() > cap {
                            return Err(Error::cap("SL2 size", cap as u64, out.len() as u64));
                        }
                        queue.push_back(y);
                    }
                }
            }
            out
        }
    };
    let id = SL2Elem::identity(ring);
    out.sort_by_key(|m| (*m != id, *m));
    Ok(out)
}

/// An element `(v, g)` of `R^2 ⋊ SL_2(R)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupElement {
    pub v: [Elem; 2],
    pub g: SL2Elem,
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(({},{}),[[{},{}],[{},{}]])",
            self.v[0].0, self.v[1].0, self.g.a.0, self.g.b.0, self.g.c.0, self.g.d.0
        )
    }
}

enum Sl2Lookup {
    Dense(Vec<u32>),
    Hashed(HashMap<[u32; 4], u32>),
}

/// `R^2 ⋊ SL_2(R)` with a bijective index onto `[0, |G|)`.
///
/// Elements are not materialized; [`IndexedGroup::element`] decodes an
/// index on demand. Groups of order at most 3000 cache their Cayley table.
pub struct IndexedGroup {
    ring: FiniteRing,
    sl2: Vec<SL2Elem>,
    lookup: Sl2Lookup,
    order: usize,
    cayley: OnceLock<Option<Vec<u32>>>,
}

impl fmt::Debug for IndexedGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IndexedGroup")
            .field("ring", self.ring.descriptor())
            .field("order", &self.order)
            .finish()
    }
}

impl IndexedGroup {
    pub fn build(ring: FiniteRing, caps: EnumCaps) -> Result<Self> {
        let card = ring.card() as u128;
        let sl2 = sl2_enumerate(&ring, caps.max_sl2)?;
        let order = card * card * sl2.len() as u128;
        if order > caps.max_group as u128 {
            return Err(Error::cap("group order", caps.max_group as u64, order));
        }
        let c = ring.card() as usize;
        let lookup = if c.pow(4) <= 1 << 22 {
            let mut t = vec![u32::MAX; c.pow(4)];
            for (i, m) in sl2.iter().enumerate() {
                let k = m.key();
                t[((k[0] as usize * c + k[1] as usize) * c + k[2] as usize) * c + k[3] as usize] =
                    i as u32;
            }
            Sl2Lookup::Dense(t)
        } else {
            Sl2Lookup::Hashed(
                sl2.iter()
                    .enumerate()
                    .map(|(i, m)| (m.key(), i as u32))
                    .collect(),
            )
        };
        Ok(IndexedGroup {
            ring,
            sl2,
            lookup,
            order: order as usize,
            cayley: OnceLock::new(),
        })
    }

    /// Convenience: `(Z/k)^2 ⋊ SL_2(Z/k)` with default caps.
    pub fn zmod(k: u64) -> Result<Self> {
        Self::build(FiniteRing::zmod(k)?, EnumCaps::default())
    }

    pub fn ring(&self) -> &FiniteRing {
        &self.ring
    }

    pub fn sl2(&self) -> &[SL2Elem] {
        &self.sl2
    }

    pub fn sl2_index(&self, g: &SL2Elem) -> Option<usize> {
        let c = self.ring.card() as usize;
        let k = g.key();
        if k.iter().any(|&x| x as usize >= c) {
            return None;
        }
        let found = match &self.lookup {
            Sl2Lookup::Dense(t) => {
                t[((k[0] as usize * c + k[1] as usize) * c + k[2] as usize) * c + k[3] as usize]
            }
            Sl2Lookup::Hashed(h) => *h.get(&k)?,
        };
        (found != u32::MAX).then_some(found as usize)
    }

    pub fn identity_element(&self) -> GroupElement {
        GroupElement {
            v: [self.ring.zero(); 2],
            g: SL2Elem::identity(&self.ring),
        }
    }

    pub fn element(&self, i: usize) -> GroupElement {
        let n = self.sl2.len();
        let c = self.ring.card() as usize;
        let s = i % n;
        let rest = i / n;
        GroupElement {
            v: [Elem((rest / c) as u32), Elem((rest % c) as u32)],
            g: self.sl2[s],
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order).map(move |i| self.element(i))
    }

    pub fn index(&self, x: &GroupElement) -> Result<usize> {
        let s = self
            .sl2_index(&x.g)
            .ok_or_else(|| Error::NotMember(x.to_string()))?;
        if !self.ring.contains(x.v[0]) || !self.ring.contains(x.v[1]) {
            return Err(Error::NotMember(x.to_string()));
        }
        let c = self.ring.card() as usize;
        Ok((x.v[0].0 as usize * c + x.v[1].0 as usize) * self.sl2.len() + s)
    }

    /// `(v1, g1)(v2, g2) = (v1 + g1 v2, g1 g2)`
    pub fn mul_elem(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        let r = &self.ring;
        let gv = x.g.apply(r, y.v);
        GroupElement {
            v: [r.add(x.v[0], gv[0]), r.add(x.v[1], gv[1])],
            g: x.g.mul(r, &y.g),
        }
    }

    pub fn inv_elem(&self, x: &GroupElement) -> GroupElement {
        let r = &self.ring;
        let gi = x.g.inv(r);
        let w = gi.apply(r, x.v);
        GroupElement {
            v: [r.neg(w[0]), r.neg(w[1])],
            g: gi,
        }
    }

    /// Checked multiplication for externally supplied elements.
    pub fn group_mul(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement> {
        self.index(x)?;
        self.index(y)?;
        Ok(self.mul_elem(x, y))
    }

    pub fn group_inv(&self, x: &GroupElement) -> Result<GroupElement> {
        self.index(x)?;
        Ok(self.inv_elem(x))
    }

    pub fn translation(&self, x: Elem, y: Elem) -> GroupElement {
        GroupElement {
            v: [x, y],
            g: SL2Elem::identity(&self.ring),
        }
    }

    pub fn linear(&self, g: SL2Elem) -> GroupElement {
        GroupElement {
            v: [self.ring.zero(); 2],
            g,
        }
    }

    /// Index of the translation `((x, y), I)`.
    pub fn translation_index(&self, x: Elem, y: Elem) -> usize {
        let c = self.ring.card() as usize;
        // the identity matrix sits at SL2 position 0
        (x.0 as usize * c + y.0 as usize) * self.sl2.len()
    }

    fn cayley(&self) -> Option<&Vec<u32>> {
        self.cayley
            .get_or_init(|| {
                (self.order <= CAYLEY_LIMIT).then(|| {
                    let elems: Vec<GroupElement> = self.elements().collect();
                    let mut t = Vec::with_capacity(self.order * self.order);
                    for x in &elems {
                        for y in &elems {
                            t.push(self.index(&self.mul_elem(x, y)).expect("closed") as u32);
                        }
                    }
                    t
                })
            })
            .as_ref()
    }
}

impl FiniteGroup for IndexedGroup {
    fn order(&self) -> usize {
        self.order
    }

    fn mul(&self, x: usize, y: usize) -> usize {
        if let Some(t) = self.cayley() {
            return t[x * self.order + y] as usize;
        }
        let p = self.mul_elem(&self.element(x), &self.element(y));
        self.index(&p).expect("closed under multiplication")
    }

    fn inv(&self, x: usize) -> usize {
        self.index(&self.inv_elem(&self.element(x)))
            .expect("closed under inverse")
    }

    fn descriptor(&self) -> GroupDescriptor {
        GroupDescriptor::full(self.ring.descriptor().clone())
    }

    fn named_subgroup(&self, label: &SubgroupLabel) -> Option<Vec<usize>> {
        match label {
            SubgroupLabel::Translations => Some(
                self.ring
                    .elements()
                    .flat_map(|x| self.ring.elements().map(move |y| (x, y)))
                    .map(|(x, y)| self.translation_index(x, y))
                    .collect(),
            ),
            SubgroupLabel::Linear => Some((0..self.sl2.len()).collect()),
            SubgroupLabel::Elements(list) => Some(list.clone()),
        }
    }

    fn is_abelian(&self) -> Result<()> {
        // generators suffice for the affine group
        let r = &self.ring;
        let mut gens: Vec<GroupElement> = r
            .additive_generators()
            .into_iter()
            .flat_map(|x| [self.translation(x, r.zero()), self.translation(r.zero(), x)])
            .collect();
        gens.extend(sl2_generators(r).into_iter().map(|g| self.linear(g)));
        for x in &gens {
            for y in &gens {
                if self.mul_elem(x, y) != self.mul_elem(y, x) {
                    return Err(Error::NotAbelian(
                        self.index(x).unwrap(),
                        self.index(y).unwrap(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// The additive group `R^2`, indexed by `x * |R| + y`.
///
/// Its indexing agrees with the translation subgroup of [`IndexedGroup`].
#[derive(Debug, Clone)]
pub struct TranslationGroup {
    ring: FiniteRing,
}

impl TranslationGroup {
    pub fn new(ring: FiniteRing) -> Self {
        TranslationGroup { ring }
    }

    pub fn ring(&self) -> &FiniteRing {
        &self.ring
    }

    pub fn vector(&self, i: usize) -> [Elem; 2] {
        let c = self.ring.card() as usize;
        [Elem((i / c) as u32), Elem((i % c) as u32)]
    }

    pub fn index_of(&self, v: [Elem; 2]) -> usize {
        v[0].0 as usize * self.ring.card() as usize + v[1].0 as usize
    }
}

impl FiniteGroup for TranslationGroup {
    fn order(&self) -> usize {
        (self.ring.card() as usize).pow(2)
    }

    fn mul(&self, x: usize, y: usize) -> usize {
        let (a, b) = (self.vector(x), self.vector(y));
        self.index_of([self.ring.add(a[0], b[0]), self.ring.add(a[1], b[1])])
    }

    fn inv(&self, x: usize) -> usize {
        let a = self.vector(x);
        self.index_of([self.ring.neg(a[0]), self.ring.neg(a[1])])
    }

    fn descriptor(&self) -> GroupDescriptor {
        GroupDescriptor {
            ring: self.ring.descriptor().clone(),
            subgroup: Some(SubgroupLabel::Translations),
        }
    }

    fn is_abelian(&self) -> Result<()> {
        Ok(())
    }
}

/// A subgroup given by parent indices, with its own Cayley table.
pub struct Subgroup {
    descriptor: GroupDescriptor,
    members: Vec<usize>,
    table: Vec<u32>,
    inverse: Vec<u32>,
}

impl Subgroup {
    /// Members are sorted; the parent identity must be present and the set closed.
    pub fn new(parent: &dyn FiniteGroup, members: &[usize], label: SubgroupLabel) -> Result<Self> {
        let mut members = members.to_vec();
        members.sort_unstable();
        members.dedup();
        if let Some(&bad) = members.iter().find(|&&m| m >= parent.order()) {
            return Err(Error::NotMember(format!("index {bad}")));
        }
        let e = parent.identity();
        let Ok(pos_e) = members.binary_search(&e) else {
            return Err(Error::NotClosed(e, e));
        };
        // keep the identity at position 0
        members.remove(pos_e);
        members.insert(0, e);
        let pos: HashMap<usize, u32> = members
            .iter()
            .enumerate()
            .map(|(i, &m)| (m, i as u32))
            .collect();
        let n = members.len();
        let mut table = Vec::with_capacity(n * n);
        for &x in &members {
            for &y in &members {
                let p = parent.mul(x, y);
                match pos.get(&p) {
                    Some(&i) => table.push(i),
                    None => return Err(Error::NotClosed(x, y)),
                }
            }
        }
        let inverse = members
            .iter()
            .map(|&x| {
                pos.get(&parent.inv(x))
                    .copied()
                    .ok_or(Error::NotClosed(x, x))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut descriptor = parent.descriptor();
        descriptor.subgroup = Some(label);
        Ok(Subgroup {
            descriptor,
            members,
            table,
            inverse,
        })
    }

    /// Parent index of each subgroup element.
    pub fn members(&self) -> &[usize] {
        &self.members
    }
}

impl FiniteGroup for Subgroup {
    fn order(&self) -> usize {
        self.members.len()
    }

    fn mul(&self, x: usize, y: usize) -> usize {
        self.table[x * self.members.len() + y] as usize
    }

    fn inv(&self, x: usize) -> usize {
        self.inverse[x] as usize
    }

    fn descriptor(&self) -> GroupDescriptor {
        self.descriptor.clone()
    }
}

/// Reduction `Γ_n -> Γ_k` for `k | n`, coordinatewise mod `k`.
pub struct ReductionMap {
    source: Arc<IndexedGroup>,
    target: Arc<IndexedGroup>,
}

impl ReductionMap {
    pub fn new(source: Arc<IndexedGroup>, target: Arc<IndexedGroup>) -> Result<Self> {
        match (source.ring().modulus(), target.ring().modulus()) {
            (Some(n), Some(k)) if n % k == 0 => Ok(ReductionMap { source, target }),
            _ => Err(Error::GroupMismatch(format!(
                "no reduction from {} to {}",
                source.ring().descriptor(),
                target.ring().descriptor()
            ))),
        }
    }

    pub fn source(&self) -> &Arc<IndexedGroup> {
        &self.source
    }

    pub fn target(&self) -> &Arc<IndexedGroup> {
        &self.target
    }

    pub fn map_element(&self, x: &GroupElement) -> GroupElement {
        let k = self.target.ring().card();
        let red = |e: Elem| Elem(e.0 % k);
        GroupElement {
            v: [red(x.v[0]), red(x.v[1])],
            g: SL2Elem {
                a: red(x.g.a),
                b: red(x.g.b),
                c: red(x.g.c),
                d: red(x.g.d),
            },
        }
    }

    pub fn map(&self, i: usize) -> usize {
        let y = self.map_element(&self.source.element(i));
        self.target
            .index(&y)
            .expect("reduction is a homomorphism into SL2")
    }
}
