//! Exact decision of `c ∈ B²(G, Z/L)` (trivial action).
//!
//! Unknowns are `b: G -> Z/L` with `b(g) + b(h) - b(gh) ≡ c(g,h)`. Because
//! `c - ∂b` is a cocycle, it vanishes identically as soon as it vanishes on
//! all pairs `(g, s)` with `s` in a generating set `S`. A breadth-first
//! spanning tree of the Cayley graph then expresses every `b(g)` as an
//! affine function of `x_s = b(s)`, and the remaining (non-tree) edges give
//! a small integer system in the `|S|` unknowns. Its coefficient matrix
//! depends only on the group, so it is built once per group; its Smith form
//! is cached per modulus.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::cocycle::{symmetry_test, PhaseCocycle, Symmetry};
use crate::error::{Error, Result};
use crate::group::{FiniteGroup, GroupRef};
use crate::snf::ModularSmith;

/// Default cap on the number of unknowns `|G|`.
pub const DEFAULT_MAX_UNKNOWNS: usize = 2000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum NotCoboundaryReason {
    SymmetryViolation { g: usize, h: usize },
    UnsolvableSystem,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    /// `witness[g] = b(g)` in `Z/witness_order`.
    Coboundary {
        witness: Vec<u64>,
    },
    NotCoboundary(NotCoboundaryReason),
}

impl Verdict {
    pub fn is_coboundary(&self) -> bool {
        matches!(self, Verdict::Coboundary { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Coboundary { .. } => "coboundary",
            Verdict::NotCoboundary(NotCoboundaryReason::SymmetryViolation { .. }) => {
                "not_coboundary(symmetry_violation)"
            }
            Verdict::NotCoboundary(NotCoboundaryReason::UnsolvableSystem) => {
                "not_coboundary(unsolvable_system)"
            }
        }
    }
}

/// Which coefficient group the coboundary lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coefficients {
    /// `b: G -> Z/L`.
    #[default]
    Cyclic,
    /// `b: G -> T`. Any such `b` has `b^L` a character of `G`, so `b` takes
    /// values in `Z/(L·|G|)`; deciding there is exact.
    Circle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Symmetry fast path on abelian groups, then the Smith system.
    #[default]
    Auto,
    SmithOnly,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoboundaryCertificate {
    pub order: u64,
    pub coefficients: Coefficients,
    /// Order of the witness values (`L`, or `L·|G|` for circle coefficients).
    pub witness_order: u64,
    /// `c(e,e)`, subtracted before solving so the system sees a normalized cocycle.
    pub normalization_shift: u64,
    pub decided_by: String,
    pub verdict: Verdict,
}

struct Tree {
    gens: Vec<usize>,
    /// Per element, integer coefficients on the generator unknowns.
    coeff: Vec<Vec<i64>>,
    /// BFS order with the tree edge `(parent, generator)` that reached each element.
    order: Vec<(usize, Option<(usize, usize)>)>,
    /// Non-tree edges `(g, generator index)`.
    relations: Vec<(usize, usize)>,
    matrix: Vec<i64>,
}

/// Coboundary decider for one group, caching Smith forms per modulus.
pub struct CoboundarySolver {
    group: GroupRef,
    tree: Tree,
    smith: RwLock<HashMap<u64, Arc<ModularSmith>>>,
}

fn greedy_generators(group: &dyn FiniteGroup) -> Vec<usize> {
    let n = group.order();
    let mut inside = vec![false; n];
    inside[group.identity()] = true;
    let mut members = vec![group.identity()];
    let mut gens = Vec::new();
    for cand in 0..n {
        if inside[cand] {
            continue;
        }
        gens.push(cand);
        // re-close under right multiplication by all generators
        let mut stack = members.clone();
        while let Some(x) = stack.pop() {
            for &s in &gens {
                let y = group.mul(x, s);
                if !inside[y] {
                    inside[y] = true;
                    members.push(y);
                    stack.push(y);
                }
            }
        }
    }
    gens
}

impl CoboundarySolver {
    pub fn new(group: GroupRef) -> Result<Self> {
        Self::with_cap(group, DEFAULT_MAX_UNKNOWNS)
    }

    pub fn with_cap(group: GroupRef, max_unknowns: usize) -> Result<Self> {
        let n = group.order();
        if n > max_unknowns {
            return Err(Error::cap(
                "coboundary unknowns",
                max_unknowns as u64,
                n as u64,
            ));
        }
        let gens = greedy_generators(group.as_ref());
        let s = gens.len();
        let e = group.identity();
        let mut coeff: Vec<Option<Vec<i64>>> = vec![None; n];
        coeff[e] = Some(vec![0; s]);
        let mut order = vec![(e, None)];
        let mut relations = Vec::new();
        let mut head = 0;
        while head < order.len() {
            let g = order[head].0;
            head += 1;
            for (i, &gen) in gens.iter().enumerate() {
                let t = group.mul(g, gen);
                if coeff[t].is_none() {
                    let mut c = coeff[g].clone().expect("visited");
                    c[i] += 1;
                    coeff[t] = Some(c);
                    order.push((t, Some((g, i))));
                } else {
                    relations.push((g, i));
                }
            }
        }
        debug_assert_eq!(order.len(), n);
        let coeff: Vec<Vec<i64>> = coeff.into_iter().map(|c| c.expect("connected")).collect();
        let mut matrix = Vec::with_capacity(relations.len() * s);
        for &(g, i) in &relations {
            let t = group.mul(g, gens[i]);
            for j in 0..s {
                matrix.push(coeff[g][j] + i64::from(i == j) - coeff[t][j]);
            }
        }
        Ok(CoboundarySolver {
            group,
            tree: Tree {
                gens,
                coeff,
                order,
                relations,
                matrix,
            },
            smith: RwLock::new(HashMap::new()),
        })
    }

    pub fn group(&self) -> &GroupRef {
        &self.group
    }

    pub fn generators(&self) -> &[usize] {
        &self.tree.gens
    }

    fn smith_for(&self, modulus: u64) -> Arc<ModularSmith> {
        if let Some(s) = self.smith.read().expect("lock").get(&modulus) {
            return s.clone();
        }
        let s = Arc::new(ModularSmith::new(
            &self.tree.matrix,
            self.tree.relations.len(),
            self.tree.gens.len(),
            modulus,
        ));
        self.smith
            .write()
            .expect("lock")
            .entry(modulus)
            .or_insert(s)
            .clone()
    }

    pub fn decide(&self, c: &PhaseCocycle) -> Result<CoboundaryCertificate> {
        self.decide_with(c, Coefficients::Cyclic, Route::Auto)
    }

    pub fn decide_with(
        &self,
        c: &PhaseCocycle,
        coeffs: Coefficients,
        route: Route,
    ) -> Result<CoboundaryCertificate> {
        if c.group().descriptor() != self.group.descriptor()
            || c.group().order() != self.group.order()
        {
            return Err(Error::GroupMismatch(
                "cocycle lives on a different group".into(),
            ));
        }
        let n = self.group.order();
        let order = c.order();
        let witness_order = match coeffs {
            Coefficients::Cyclic => order,
            Coefficients::Circle => order * n as u64,
        };
        let scale = witness_order / order;
        let e = self.group.identity();
        let shift = c.value(e, e);

        if route == Route::Auto && self.group.is_abelian().is_ok() {
            if let Symmetry::Asymmetric { g, h, .. } = symmetry_test(c)? {
                return Ok(CoboundaryCertificate {
                    order,
                    coefficients: coeffs,
                    witness_order,
                    normalization_shift: shift,
                    decided_by: "symmetry".into(),
                    verdict: Verdict::NotCoboundary(NotCoboundaryReason::SymmetryViolation {
                        g,
                        h,
                    }),
                });
            }
        }

        let l = witness_order;
        // normalized value, lifted to Z/l
        let val = |g: usize, h: usize| -> i64 {
            (((c.value(g, h) + order - shift) % order) * scale) as i64
        };

        // b(t) = b(g) + x_i - c(g, s_i) along tree edges: constant parts
        let mut constant = vec![0i64; n];
        for &(t, edge) in &self.tree.order {
            if let Some((g, i)) = edge {
                constant[t] = (constant[g] - val(g, self.tree.gens[i])).rem_euclid(l as i64);
            }
        }
        let rhs: Vec<i64> = self
            .tree
            .relations
            .iter()
            .map(|&(g, i)| {
                let t = self.group.mul(g, self.tree.gens[i]);
                (val(g, self.tree.gens[i]) - constant[g] + constant[t]).rem_euclid(l as i64)
            })
            .collect();

        let smith = self.smith_for(l);
        let verdict = match smith.solve(&rhs) {
            None => Verdict::NotCoboundary(NotCoboundaryReason::UnsolvableSystem),
            Some(x) => {
                let li = l as i128;
                // add back the normalization: ∂(const) = const, so b += shift·scale
                let lift_shift = (shift * scale) as i128;
                let witness: Vec<u64> = (0..n)
                    .map(|g| {
                        let lin: i128 = self.tree.coeff[g]
                            .iter()
                            .zip(&x)
                            .map(|(&a, &xv)| a as i128 * xv as i128)
                            .sum();
                        (lin + constant[g] as i128 + lift_shift).rem_euclid(li) as u64
                    })
                    .collect();
                self.verify(c, &witness, l, scale)?;
                Verdict::Coboundary { witness }
            }
        };
        Ok(CoboundaryCertificate {
            order,
            coefficients: coeffs,
            witness_order,
            normalization_shift: shift,
            decided_by: "smith".into(),
            verdict,
        })
    }

    /// `∂b = c` on every pair, or [`Error::NotACocycle`] (the reduced system
    /// is only sufficient for genuine cocycles).
    fn verify(&self, c: &PhaseCocycle, b: &[u64], l: u64, scale: u64) -> Result<()> {
        let n = self.group.order();
        for g in 0..n {
            for h in 0..n {
                let lhs = (b[g] + b[h] + l - b[self.group.mul(g, h)]) % l;
                if lhs != (c.value(g, h) * scale) % l {
                    let k = self.group.identity();
                    return Err(Error::NotACocycle(g, h, k));
                }
            }
        }
        Ok(())
    }
}

/// One-shot decision with the default cap and cyclic coefficients.
pub fn coboundary_decide(c: &PhaseCocycle) -> Result<CoboundaryCertificate> {
    CoboundarySolver::new(c.group().clone())?.decide(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{restrict, standard_phase_cocycle};
    use crate::group::{IndexedGroup, SubgroupLabel, TranslationGroup};
    use crate::ring::FiniteRing;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn translations(k: u64) -> PhaseCocycle {
        let g = Arc::new(IndexedGroup::zmod(k).unwrap());
        restrict(
            &standard_phase_cocycle(&g).unwrap(),
            &SubgroupLabel::Translations,
        )
        .unwrap()
    }

    #[test]
    fn trivial_is_coboundary() {
        let g: GroupRef = Arc::new(IndexedGroup::zmod(3).unwrap());
        let cert = coboundary_decide(&PhaseCocycle::trivial(g)).unwrap();
        assert_eq!(
            cert.verdict,
            Verdict::Coboundary {
                witness: vec![0; 216]
            }
        );
    }

    #[test]
    fn random_coboundaries_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let groups: Vec<GroupRef> = vec![
            Arc::new(TranslationGroup::new(FiniteRing::zmod(3).unwrap())),
            Arc::new(TranslationGroup::new(FiniteRing::zmod(4).unwrap())),
            Arc::new(IndexedGroup::zmod(2).unwrap()),
            Arc::new(IndexedGroup::zmod(3).unwrap()),
        ];
        for g in groups {
            let solver = CoboundarySolver::new(g.clone()).unwrap();
            for l in [1u64, 2, 3, 6, 12] {
                for _ in 0..10 {
                    let b: Vec<u64> = (0..g.order()).map(|_| rng.gen_range(0..l)).collect();
                    let c = PhaseCocycle::coboundary_of(g.clone(), l, &b).unwrap();
                    let cert = solver.decide(&c).unwrap();
                    assert!(cert.verdict.is_coboundary(), "{:?} L={l}", g.descriptor());
                }
            }
        }
    }

    #[test]
    fn unnormalized_coboundary() {
        // b constant 1: ∂b ≡ 1 everywhere, so c(e,e) = 1
        let g: GroupRef = Arc::new(TranslationGroup::new(FiniteRing::zmod(3).unwrap()));
        let c = PhaseCocycle::coboundary_of(g, 5, &[1; 9]).unwrap();
        let cert = coboundary_decide(&c).unwrap();
        assert_eq!(cert.normalization_shift, 1);
        assert!(cert.verdict.is_coboundary());
    }

    #[test]
    fn symplectic_translations_are_not_coboundaries() {
        for k in 3..=6 {
            let c = translations(k);
            let solver = CoboundarySolver::new(c.group().clone()).unwrap();
            let fast = solver.decide(&c).unwrap();
            assert!(matches!(
                fast.verdict,
                Verdict::NotCoboundary(NotCoboundaryReason::SymmetryViolation { .. })
            ));
            let slow = solver
                .decide_with(&c, Coefficients::Cyclic, Route::SmithOnly)
                .unwrap();
            assert_eq!(
                slow.verdict,
                Verdict::NotCoboundary(NotCoboundaryReason::UnsolvableSystem)
            );
            let circle = solver
                .decide_with(&c, Coefficients::Circle, Route::SmithOnly)
                .unwrap();
            assert!(!circle.verdict.is_coboundary());
        }
    }

    #[test]
    fn full_group_c3_is_not_a_coboundary() {
        let g = Arc::new(IndexedGroup::zmod(3).unwrap());
        let c = standard_phase_cocycle(&g).unwrap();
        let cert = coboundary_decide(&c).unwrap();
        assert!(!cert.verdict.is_coboundary());
    }

    #[test]
    fn circle_coefficients_see_more_coboundaries() {
        // On Z/2, c(1,1) = 1 (order 2) is ∂b for b(1) = i but not for any Z/2-valued b.
        let g: GroupRef = Arc::new(TranslationGroup::new(FiniteRing::zmod(2).unwrap()));
        // restrict to the cyclic subgroup {(0,0),(0,1)}
        let sub: GroupRef = Arc::new(
            crate::group::Subgroup::new(g.as_ref(), &[0, 1], SubgroupLabel::Elements(vec![0, 1]))
                .unwrap(),
        );
        let c = PhaseCocycle::from_table(sub.clone(), 2, vec![0, 0, 0, 1]).unwrap();
        let solver = CoboundarySolver::new(sub).unwrap();
        assert!(!solver.decide(&c).unwrap().verdict.is_coboundary());
        let cert = solver
            .decide_with(&c, Coefficients::Circle, Route::Auto)
            .unwrap();
        assert_eq!(cert.witness_order, 4);
        assert!(cert.verdict.is_coboundary());
    }

    #[test]
    fn cap_and_mismatch_errors() {
        let g: GroupRef = Arc::new(IndexedGroup::zmod(5).unwrap());
        assert!(matches!(
            CoboundarySolver::new(g),
            Err(Error::CapExceeded { .. })
        ));
        let a = CoboundarySolver::new(translations(3).group().clone()).unwrap();
        assert!(a.decide(&translations(4)).is_err());
    }

    #[test]
    fn non_cocycle_input_is_reported() {
        let g: GroupRef = Arc::new(TranslationGroup::new(FiniteRing::zmod(2).unwrap()));
        let mut t = vec![0u32; 16];
        t[4 + 2] = 1;
        t[2 * 4 + 1] = 1;
        t[3 * 4 + 3] = 1;
        let c = PhaseCocycle::from_table(g, 2, t).unwrap();
        match coboundary_decide(&c) {
            Err(Error::NotACocycle(..)) => {}
            Ok(cert) => assert!(!cert.verdict.is_coboundary()),
            Err(e) => panic!("{e}"),
        }
    }
}
