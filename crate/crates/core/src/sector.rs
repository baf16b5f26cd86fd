//! Exact block reduction of `A = Σ_i λ_σ(g_i)` on `ℓ²(G)`, `G = (Z/n)² ⋊ SL_2(Z/n)`.
//!
//! Right twisted translations `ρ(x) δ_h = σ(h,x) δ_{hx}` commute with every
//! `λ_σ(g)`. On `L = {((0,t), I)}` the cocycle vanishes, so `ρ|_L` is a genuine
//! representation of `Z/n` and `ℓ²(G)` splits into the eigenspaces
//! `V_j = {f : ρ(x_t) f = e(jt/n) f}`, each invariant under `A`.
//!
//! Every right coset `hL` contains exactly one `r(s, g) = (s·col1(g), g)`: for
//! `h = (a, g)` write `a = s·col1(g) + β·col2(g)` with `s = ω(a, col2(g))`,
//! `β = ω(col1(g), a)`, so `h = r·x_β`. In the basis
//! `f_r = n^{-1/2} Σ_t e(-jt/n) ρ(x_t) δ_r` of `V_j`,
//!
//! `λ_σ(g) f_r = e(σ(g,r) - σ(r',x_β) + jβ/n) f_{r'}`, where `g·r = r'·x_β`,
//!
//! so each block is again a generalized permutation operator, of dimension
//! `|G|/n`, and `‖A‖ = max_j ‖A|V_j‖`.
//!
//! The translations `y_s = ((s,0), I)` act through `ρ` as unitaries commuting
//! with `A` and move `V_j` to `V_{j + shift(s)}`, where `e(shift(s)·t/n)` is the
//! commutator phase of `y_s` and `x_t`. Blocks in one orbit are therefore
//! unitarily equivalent, and `j = 0, …, gcd(n, shift(·)) - 1` covers all orbits.

use std::sync::Arc;

use num_integer::Integer;
use rayon::prelude::*;

use crate::cocycle::PhaseCocycle;
use crate::error::{Error, Result};
use crate::group::{FiniteGroup, IndexedGroup};
use crate::rep::{GenPermOperator, TensorSumOperator};
use crate::ring::Elem;

struct Term {
    perm: Vec<u32>,
    beta: Vec<u32>,
    /// `σ(g,r) - σ(r',x_β)` in `Z/order`.
    base: Vec<u32>,
}

pub struct SectorReduction {
    group: Arc<IndexedGroup>,
    n: u64,
    order: u64,
    shift_gcd: u64,
    sector_dim: usize,
    terms: Vec<Term>,
}

impl SectorReduction {
    /// `gens` are element indices of `group`; `cocycle` must live on `group`.
    pub fn new(group: Arc<IndexedGroup>, cocycle: &PhaseCocycle, gens: &[usize]) -> Result<Self> {
        let n = group
            .ring()
            .modulus()
            .ok_or_else(|| Error::InvalidArgument("sector reduction needs a Z/n ring".into()))?
            as u64;
        if cocycle.group().descriptor() != group.descriptor()
            || cocycle.group().order() != group.order()
        {
            return Err(Error::GroupMismatch(
                "cocycle does not live on this group".into(),
            ));
        }
        if gens.is_empty() {
            return Err(Error::InvalidArgument("no generators".into()));
        }
        if let Some(&g) = gens.iter().find(|&&g| g >= group.order()) {
            return Err(Error::NotMember(format!("index {g}")));
        }
        let order = cocycle.order().lcm(&n);
        if order > u32::MAX as u64 {
            return Err(Error::InvalidArgument(format!(
                "phase order {order} too large"
            )));
        }
        let scale = order / cocycle.order();
        let unit = order / n;
        let sig = |g: usize, h: usize| cocycle.value(g, h) * scale;
        let r = group.ring();
        let x = |t: u64| group.translation_index(r.zero(), Elem(t as u32));
        let y = |s: u64| group.translation_index(Elem(s as u32), r.zero());

        // σ vanishes on L x L, so ρ|_L is a representation
        for s in 0..n {
            for t in 0..n {
                if sig(x(s), x(t)) != 0 {
                    return Err(Error::InvalidArgument(format!(
                        "cocycle does not vanish on ((0,{s}),(0,{t}))"
                    )));
                }
            }
        }
        // commutator phases of y_s and x_t are the characters t -> shift(s)·t/n
        let mut shift_gcd = n;
        for s in 0..n {
            let comm = |t: u64| (sig(y(s), x(t)) + order - sig(x(t), y(s))) % order;
            let c1 = comm(1 % n.max(1));
            if c1 % unit != 0 {
                return Err(Error::InvalidArgument(
                    "commutator is not an n-th root of unity".into(),
                ));
            }
            let shift = c1 / unit;
            for t in 0..n {
                if comm(t) != (shift * t % n) * unit {
                    return Err(Error::InvalidArgument(
                        "commutator is not a character of L".into(),
                    ));
                }
            }
            shift_gcd = shift_gcd.gcd(&shift);
        }

        let nsl2 = group.sl2().len();
        let sector_dim = n as usize * nsl2;
        let rep_index = |s: u32, pos: usize| -> usize {
            let m = group.sl2()[pos];
            let a = r.mul(Elem(s), m.a);
            let c = r.mul(Elem(s), m.c);
            group.translation_index(a, c) + pos
        };
        let terms = gens
            .iter()
            .map(|&g| {
                let rows: Vec<(u32, u32, u32)> = (0..sector_dim)
                    .into_par_iter()
                    .map(|label| {
                        let (s, pos) = ((label / nsl2) as u32, label % nsl2);
                        let ri = rep_index(s, pos);
                        let h = group.element(group.mul(g, ri));
                        let m = h.g;
                        // s' = ω(a, col2), β = ω(col1, a)
                        let s2 = r.sub(r.mul(h.v[0], m.d), r.mul(h.v[1], m.b));
                        let beta = r.sub(r.mul(m.a, h.v[1]), r.mul(m.c, h.v[0]));
                        let pos2 = group.sl2_index(&m).expect("member");
                        let r2 = rep_index(s2.0, pos2);
                        let q = (sig(g, ri) + order - sig(r2, x(beta.0 as u64))) % order;
                        ((s2.0 as usize * nsl2 + pos2) as u32, beta.0, q as u32)
                    })
                    .collect();
                let mut t = Term {
                    perm: Vec::with_capacity(sector_dim),
                    beta: Vec::with_capacity(sector_dim),
                    base: Vec::with_capacity(sector_dim),
                };
                for (p, b, q) in rows {
                    t.perm.push(p);
                    t.beta.push(b);
                    t.base.push(q);
                }
                t
            })
            .collect();
        Ok(SectorReduction {
            group,
            n,
            order,
            shift_gcd,
            sector_dim,
            terms,
        })
    }

    pub fn group(&self) -> &Arc<IndexedGroup> {
        &self.group
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn sector_dim(&self) -> usize {
        self.sector_dim
    }

    /// One representative `j` per class of equivalent blocks.
    pub fn sectors(&self) -> Vec<u64> {
        (0..self.shift_gcd).collect()
    }

    /// Generalized permutation blocks of each generator on `V_j`.
    pub fn sector_ops(&self, j: u64) -> Result<Vec<GenPermOperator>> {
        if j >= self.n {
            return Err(Error::InvalidArgument(format!(
                "sector {j} out of range 0..{}",
                self.n
            )));
        }
        let unit = self.order / self.n;
        self.terms
            .iter()
            .map(|t| {
                let phase = t
                    .base
                    .iter()
                    .zip(&t.beta)
                    .map(|(&q, &b)| ((q as u64 + j * b as u64 % self.n * unit) % self.order) as u32)
                    .collect();
                GenPermOperator::new(t.perm.clone(), phase, self.order)
            })
            .collect()
    }

    /// `A` restricted to `V_j`.
    pub fn sector_operator(&self, j: u64) -> Result<TensorSumOperator> {
        TensorSumOperator::single(&self.sector_ops(j)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{standard_phase_cocycle, PairCocycles};
    use crate::group::EnumCaps;
    use crate::rep::{regular_op, TensorSumOperator};
    use crate::spectral::{to_dense, LinearOperator};
    use crate::word::generator_tuple;

    fn gens(g: &IndexedGroup, m: usize) -> Vec<usize> {
        generator_tuple(g, m)
            .unwrap()
            .iter()
            .map(|x| g.index(x).unwrap())
            .collect()
    }

    fn sorted_singular_values(op: &dyn LinearOperator) -> Vec<f64> {
        let mut s: Vec<f64> = to_dense(op, 4000)
            .unwrap()
            .singular_values()
            .iter()
            .copied()
            .collect();
        s.sort_by(|a, b| b.partial_cmp(a).unwrap());
        s
    }

    /// All `n` blocks together carry exactly the singular values of the full operator.
    fn check_spectrum(group: Arc<IndexedGroup>, c: &PhaseCocycle) {
        let gs = gens(&group, 3);
        let full_ops: Vec<_> = gs.iter().map(|&g| regular_op(c, g)).collect();
        let full = sorted_singular_values(&TensorSumOperator::single(&full_ops).unwrap());
        let red = SectorReduction::new(group, c, &gs).unwrap();
        let mut parts = Vec::new();
        let mut top = Vec::new();
        for j in 0..red.n() {
            let s = sorted_singular_values(&red.sector_operator(j).unwrap());
            top.push(s[0]);
            parts.extend(s);
        }
        parts.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert_eq!(parts.len(), full.len());
        for (a, b) in parts.iter().zip(&full) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        let best = red
            .sectors()
            .iter()
            .map(|&j| top[j as usize])
            .fold(0.0f64, f64::max);
        assert!((best - full[0]).abs() < 1e-9);
    }

    #[test]
    fn single_group_blocks() {
        for k in [2u64, 3, 4] {
            let g = Arc::new(IndexedGroup::zmod(k).unwrap());
            let c = standard_phase_cocycle(&g).unwrap();
            check_spectrum(g, &c);
        }
    }

    #[test]
    fn pair_blocks() {
        for (k, kp) in [(1u64, 2u64), (2, 2), (1, 3), (2, 4), (3, 3)] {
            let p = PairCocycles::build(k, kp, EnumCaps::default()).unwrap();
            check_spectrum(p.pullback.clone(), &p.tensor);
        }
    }

    #[test]
    fn orbit_representatives() {
        let g = Arc::new(IndexedGroup::zmod(3).unwrap());
        let c = standard_phase_cocycle(&g).unwrap();
        let gs = gens(&g, 3);
        assert_eq!(
            SectorReduction::new(g.clone(), &c, &gs).unwrap().sectors(),
            vec![0]
        );
        let triv = PhaseCocycle::trivial(g.clone());
        assert_eq!(
            SectorReduction::new(g, &triv, &gs).unwrap().sectors(),
            vec![0, 1, 2]
        );
        let p = PairCocycles::build(3, 4, EnumCaps::default()).unwrap();
        let gs = gens(&p.pullback, 3);
        let red = SectorReduction::new(p.pullback.clone(), &p.tensor, &gs).unwrap();
        assert_eq!(red.sectors(), vec![0, 1]);
        assert_eq!(red.sector_dim(), 12 * 1152);
    }

    #[test]
    fn rejects_bad_input() {
        let g = Arc::new(IndexedGroup::zmod(3).unwrap());
        let other = Arc::new(IndexedGroup::zmod(2).unwrap());
        let c = standard_phase_cocycle(&other).unwrap();
        assert!(SectorReduction::new(g.clone(), &c, &[0]).is_err());
        let c = standard_phase_cocycle(&g).unwrap();
        assert!(SectorReduction::new(g.clone(), &c, &[]).is_err());
        assert!(SectorReduction::new(g, &c, &[100000]).is_err());
    }
}
