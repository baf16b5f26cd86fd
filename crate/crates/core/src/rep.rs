//! Twisted regular representations as generalized permutation operators.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_integer::Integer;
use rayon::prelude::*;

use crate::cocycle::PhaseCocycle;
use crate::error::{Error, Result};
use crate::group::{FiniteGroup, IndexedGroup};
use crate::spectral::{LinearOperator, C64};
use crate::word::{reduce_word, Word};

/// Largest phase order for which a complex table is built.
pub const MAX_TABLE_ORDER: u64 = 1 << 24;

/// `exp(2πi q / L)` for `q` in `[0, L)`.
#[derive(Debug, Clone)]
pub struct PhaseTable {
    order: u64,
    table: Arc<Vec<C64>>,
}

impl PhaseTable {
    pub fn new(order: u64) -> Result<Self> {
        if order == 0 || order > MAX_TABLE_ORDER {
            return Err(Error::InvalidArgument(format!(
                "phase order {order} out of range"
            )));
        }
        let table = (0..order)
            .map(|q| C64::from_polar(1.0, std::f64::consts::TAU * q as f64 / order as f64))
            .collect();
        Ok(PhaseTable {
            order,
            table: Arc::new(table),
        })
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    #[inline]
    pub fn get(&self, q: u32) -> C64 {
        self.table[q as usize]
    }
}

/// `(A v)[perm[j]] = exp(2πi·phase[j]/order) · v[j]`.
#[derive(Debug, Clone)]
pub struct GenPermOperator {
    perm: Vec<u32>,
    phase: Vec<u32>,
    order: u64,
}

impl GenPermOperator {
    pub fn new(perm: Vec<u32>, phase: Vec<u32>, order: u64) -> Result<Self> {
        if perm.len() != phase.len() {
            return Err(Error::DimensionMismatch {
                expected: perm.len(),
                got: phase.len(),
            });
        }
        if order == 0 || order > u32::MAX as u64 {
            return Err(Error::InvalidArgument(format!(
                "phase order {order} out of range"
            )));
        }
        let n = perm.len();
        let mut seen = vec![false; n];
        for &p in &perm {
            let p = p as usize;
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidArgument("perm is not a bijection".into()));
            }
        }
        if phase.iter().any(|&q| q as u64 >= order) {
            return Err(Error::InvalidArgument("phase not below order".into()));
        }
        Ok(GenPermOperator { perm, phase, order })
    }

    pub fn identity(dim: usize) -> Self {
        GenPermOperator {
            perm: (0..dim as u32).collect(),
            phase: vec![0; dim],
            order: 1,
        }
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn perm(&self) -> &[u32] {
        &self.perm
    }

    pub fn phase(&self) -> &[u32] {
        &self.phase
    }

    /// Same operator with phases written over `new_order`.
    pub fn lift(&self, new_order: u64) -> Result<Self> {
        if !new_order.is_multiple_of(self.order) || new_order > u32::MAX as u64 {
            return Err(Error::InvalidArgument(format!(
                "cannot lift order {} to {new_order}",
                self.order
            )));
        }
        let s = (new_order / self.order) as u32;
        Ok(GenPermOperator {
            perm: self.perm.clone(),
            phase: self.phase.iter().map(|&q| q * s).collect(),
            order: new_order,
        })
    }

    fn unify(&self, other: &Self) -> Result<(Self, Self)> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        let l = self.order.lcm(&other.order);
        Ok((self.lift(l)?, other.lift(l)?))
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        let table = PhaseTable::new(self.order)?;
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        for (j, &x) in v.iter().enumerate() {
            out[self.perm[j] as usize] = table.get(self.phase[j]) * x;
        }
        Ok(out)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.unify(other)?;
        let l = a.order;
        let perm = b.perm.iter().map(|&p| a.perm[p as usize]).collect();
        let phase = b
            .perm
            .iter()
            .zip(&b.phase)
            .map(|(&p, &q)| ((a.phase[p as usize] as u64 + q as u64) % l) as u32)
            .collect();
        Ok(GenPermOperator {
            perm,
            phase,
            order: l,
        })
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim();
        let mut perm = vec![0u32; n];
        let mut phase = vec![0u32; n];
        for j in 0..n {
            let p = self.perm[j] as usize;
            perm[p] = j as u32;
            phase[p] = ((self.order - self.phase[j] as u64) % self.order) as u32;
        }
        GenPermOperator {
            perm,
            phase,
            order: self.order,
        }
    }

    /// Multiplies by the scalar `exp(2πi q / order)`.
    pub fn scale_phase(&self, q: u64) -> Self {
        let q = q % self.order;
        GenPermOperator {
            perm: self.perm.clone(),
            phase: self
                .phase
                .iter()
                .map(|&p| ((p as u64 + q) % self.order) as u32)
                .collect(),
            order: self.order,
        }
    }

    /// Entrywise complex conjugate.
    pub fn conjugate(&self) -> Self {
        GenPermOperator {
            perm: self.perm.clone(),
            phase: self
                .phase
                .iter()
                .map(|&p| ((self.order - p as u64) % self.order) as u32)
                .collect(),
            order: self.order,
        }
    }

    /// `trace / dim`, exact in the sense that only fixed points contribute.
    pub fn normalized_trace(&self) -> C64 {
        if self.dim() == 0 {
            return C64::new(0.0, 0.0);
        }
        let tau = std::f64::consts::TAU;
        let s: C64 = (0..self.dim())
            .filter(|&j| self.perm[j] as usize == j)
            .map(|j| C64::from_polar(1.0, tau * self.phase[j] as f64 / self.order as f64))
            .sum();
        s / self.dim() as f64
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let n = self.dim();
        let tau = std::f64::consts::TAU;
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            m[(self.perm[j] as usize, j)] =
                C64::from_polar(1.0, tau * self.phase[j] as f64 / self.order as f64);
        }
        m
    }

    /// `(src, phase)` with `(A v)[r] = exp(2πi·phase[r]/order) · v[src[r]]`.
    pub fn gather(&self) -> (Vec<u32>, Vec<u32>) {
        let n = self.dim();
        let mut src = vec![0u32; n];
        let mut ph = vec![0u32; n];
        for j in 0..n {
            let p = self.perm[j] as usize;
            src[p] = j as u32;
            ph[p] = self.phase[j];
        }
        (src, ph)
    }
}

impl PartialEq for GenPermOperator {
    /// Equality of the operators, after writing both over a common order.
    fn eq(&self, other: &Self) -> bool {
        match self.unify(other) {
            Ok((a, b)) => a.perm == b.perm && a.phase == b.phase,
            Err(_) => false,
        }
    }
}

impl LinearOperator for GenPermOperator {
    fn dim(&self) -> usize {
        self.perm.len()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let table = PhaseTable::new(self.order).expect("order validated");
        for (j, &v) in x.iter().enumerate() {
            y[self.perm[j] as usize] = table.get(self.phase[j]) * v;
        }
    }

    fn apply_adjoint(&self, x: &[C64], y: &mut [C64]) {
        let table = PhaseTable::new(self.order).expect("order validated");
        for (j, out) in y.iter_mut().enumerate() {
            *out = table.get(self.phase[j]).conj() * x[self.perm[j] as usize];
        }
    }
}

/// `π_c(g) δ_h = c(g,h) δ_{gh}` on any finite group carrying the cocycle.
pub fn regular_op(c: &PhaseCocycle, g: usize) -> GenPermOperator {
    let grp = c.group();
    let n = grp.order();
    let perm = (0..n).map(|h| grp.mul(g, h) as u32).collect();
    let phase = (0..n).map(|h| c.value(g, h) as u32).collect();
    GenPermOperator {
        perm,
        phase,
        order: c.order(),
    }
}

/// Twisted left-regular representation of an indexed group.
#[derive(Clone)]
pub struct ProjectiveRep {
    group: Arc<IndexedGroup>,
    cocycle: PhaseCocycle,
}

impl ProjectiveRep {
    pub fn group(&self) -> &Arc<IndexedGroup> {
        &self.group
    }

    pub fn cocycle(&self) -> &PhaseCocycle {
        &self.cocycle
    }

    pub fn dim(&self) -> usize {
        self.group.order()
    }

    pub fn op(&self, g: usize) -> GenPermOperator {
        regular_op(&self.cocycle, g)
    }

    pub fn op_word(&self, w: &Word) -> Result<GenPermOperator> {
        Ok(self.op(self.group.index(&reduce_word(w, &self.group))?))
    }
}

pub fn regular_rep(group: Arc<IndexedGroup>, c: PhaseCocycle) -> Result<ProjectiveRep> {
    if c.group().descriptor() != group.descriptor() || c.group().order() != group.order() {
        return Err(Error::GroupMismatch(
            "cocycle does not live on this group".into(),
        ));
    }
    Ok(ProjectiveRep { group, cocycle: c })
}

#[derive(Debug, Clone)]
struct GatherTerm {
    src1: Vec<u32>,
    ph1: Vec<u32>,
    src2: Vec<u32>,
    /// Already negated: the right factor enters conjugated.
    ph2: Vec<u32>,
}

/// `Σ_i A_i ⊗ conj(B_i)` on `C^{d1} ⊗ C^{d2}`, index `i1·d2 + i2`, applied matrix-free.
///
/// Each output entry is a sum over terms in a fixed order, so results do not
/// depend on how the output is split across threads.
#[derive(Debug, Clone)]
pub struct TensorSumOperator {
    d1: usize,
    d2: usize,
    order: u64,
    table: PhaseTable,
    fwd: Vec<GatherTerm>,
    adj: Vec<GatherTerm>,
}

fn negated(ph: &[u32], order: u64) -> Vec<u32> {
    ph.iter()
        .map(|&q| ((order - q as u64) % order) as u32)
        .collect()
}

impl TensorSumOperator {
    pub fn new(left: &[GenPermOperator], right: &[GenPermOperator]) -> Result<Self> {
        if left.is_empty() || left.len() != right.len() {
            return Err(Error::InvalidArgument(format!(
                "need matching non-empty term lists, got {} and {}",
                left.len(),
                right.len()
            )));
        }
        let (d1, d2) = (left[0].dim(), right[0].dim());
        for (a, b) in left.iter().zip(right) {
            if a.dim() != d1 || b.dim() != d2 {
                return Err(Error::DimensionMismatch {
                    expected: d1,
                    got: a.dim(),
                });
            }
        }
        d1.checked_mul(d2)
            .filter(|&d| d <= u32::MAX as usize)
            .ok_or_else(|| {
                Error::cap(
                    "tensor dimension",
                    u32::MAX as u64,
                    (d1 as u128) * (d2 as u128),
                )
            })?;
        let order = left
            .iter()
            .chain(right)
            .fold(1u64, |l, a| l.lcm(&a.order()));
        let table = PhaseTable::new(order)?;
        let term = |a: &GenPermOperator, b: &GenPermOperator| -> Result<GatherTerm> {
            let (src1, ph1) = a.lift(order)?.gather();
            let (src2, ph2) = b.lift(order)?.gather();
            Ok(GatherTerm {
                src1,
                ph1,
                src2,
                ph2: negated(&ph2, order),
            })
        };
        let fwd = left
            .iter()
            .zip(right)
            .map(|(a, b)| term(a, b))
            .collect::<Result<_>>()?;
        let adj = left
            .iter()
            .zip(right)
            .map(|(a, b)| term(&a.adjoint(), &b.adjoint()))
            .collect::<Result<_>>()?;
        Ok(TensorSumOperator {
            d1,
            d2,
            order,
            table,
            fwd,
            adj,
        })
    }

    /// `Σ_i A_i` with a one-dimensional trivial right factor.
    pub fn single(ops: &[GenPermOperator]) -> Result<Self> {
        let right = vec![GenPermOperator::identity(1); ops.len()];
        Self::new(ops, &right)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.d1, self.d2)
    }

    pub fn terms(&self) -> usize {
        self.fwd.len()
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// Entrywise complex conjugate of the whole operator.
    pub fn conjugated(&self) -> Self {
        let flip = |t: &GatherTerm| GatherTerm {
            src1: t.src1.clone(),
            ph1: negated(&t.ph1, self.order),
            src2: t.src2.clone(),
            ph2: negated(&t.ph2, self.order),
        };
        TensorSumOperator {
            d1: self.d1,
            d2: self.d2,
            order: self.order,
            table: self.table.clone(),
            fwd: self.fwd.iter().map(flip).collect(),
            adj: self.adj.iter().map(flip).collect(),
        }
    }

    fn run(&self, terms: &[GatherTerm], x: &[C64], y: &mut [C64]) {
        let (d2, l) = (self.d2, self.order as u32);
        if d2 == 1 {
            y.par_chunks_mut(4096).enumerate().for_each(|(chunk, out)| {
                let first = chunk * 4096;
                for (off, o) in out.iter_mut().enumerate() {
                    let r = first + off;
                    *o = terms.iter().fold(C64::new(0.0, 0.0), |acc, t| {
                        acc + self.table.get(t.ph1[r]) * x[t.src1[r] as usize]
                    });
                }
            });
            return;
        }
        let rows_per_chunk = (4096 / d2).max(1);
        y.par_chunks_mut(rows_per_chunk * d2)
            .enumerate()
            .for_each(|(chunk, out)| {
                out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
                let first = chunk * rows_per_chunk;
                for (off, row) in out.chunks_mut(d2).enumerate() {
                    let r1 = first + off;
                    for t in terms {
                        let base = t.src1[r1] as usize * d2;
                        let p1 = t.ph1[r1];
                        for (r2, o) in row.iter_mut().enumerate() {
                            let mut q = p1 + t.ph2[r2];
                            if q >= l {
                                q -= l;
                            }
                            *o += self.table.get(q) * x[base + t.src2[r2] as usize];
                        }
                    }
                }
            });
    }
}

impl LinearOperator for TensorSumOperator {
    fn dim(&self) -> usize {
        self.d1 * self.d2
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.run(&self.fwd, x, y)
    }

    fn apply_adjoint(&self, x: &[C64], y: &mut [C64]) {
        self.run(&self.adj, x, y)
    }
}

/// `Σ_i π(g_i) ⊗ conj(π'(g_i))` with each word evaluated in its own group.
pub fn tensor_sum(
    rep: &ProjectiveRep,
    rep2: &ProjectiveRep,
    words: &[Word],
) -> Result<TensorSumOperator> {
    let left = words
        .iter()
        .map(|w| rep.op_word(w))
        .collect::<Result<Vec<_>>>()?;
    let right = words
        .iter()
        .map(|w| rep2.op_word(w))
        .collect::<Result<Vec<_>>>()?;
    TensorSumOperator::new(&left, &right)
}

/// `Σ_i π(g_i)` on `ℓ²(G)`.
pub fn single_sum(rep: &ProjectiveRep, words: &[Word]) -> Result<TensorSumOperator> {
    let ops = words
        .iter()
        .map(|w| rep.op_word(w))
        .collect::<Result<Vec<_>>>()?;
    TensorSumOperator::single(&ops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::standard_phase_cocycle;
    use crate::group::GroupRef;
    use crate::spectral::{norm, random_unit_vector};
    use crate::word::generator_words;

    fn rep(k: u64) -> ProjectiveRep {
        let g = Arc::new(IndexedGroup::zmod(k).unwrap());
        let c = standard_phase_cocycle(&g).unwrap();
        regular_rep(g, c).unwrap()
    }

    #[test]
    fn validation() {
        assert!(GenPermOperator::new(vec![0, 0], vec![0, 0], 2).is_err());
        assert!(GenPermOperator::new(vec![1, 0], vec![0, 2], 2).is_err());
        assert!(GenPermOperator::new(vec![1, 0], vec![0], 2).is_err());
        assert!(GenPermOperator::new(vec![1, 0], vec![0, 1], 2).is_ok());
    }

    #[test]
    fn phase_algebra() {
        let a = GenPermOperator::new(vec![2, 0, 1], vec![1, 0, 2], 3).unwrap();
        assert_eq!(
            a.compose(&a.adjoint()).unwrap(),
            GenPermOperator::identity(3)
        );
        assert_eq!(a.scale_phase(0), a);
        let b = GenPermOperator::new(vec![1, 2, 0], vec![1, 3, 0], 4).unwrap();
        let ab = a.compose(&b).unwrap();
        assert_eq!(ab.order(), 12);
        let dense = a.to_dense() * b.to_dense();
        assert!((ab.to_dense() - dense).norm() < 1e-12);
        assert!(a.compose(&GenPermOperator::identity(4)).is_err());
    }

    #[test]
    fn identity_and_trivial_cocycle() {
        let r = rep(3);
        assert_eq!(r.op(0), GenPermOperator::identity(216));
        let plain = regular_op(
            &crate::cocycle::PhaseCocycle::trivial(r.group().clone() as GroupRef),
            5,
        );
        assert!(plain.phase().iter().all(|&q| q == 0));
    }

    #[test]
    fn multiplication_law_and_trace() {
        let r = rep(3);
        let n = r.dim();
        let ops: Vec<_> = (0..n).map(|g| r.op(g)).collect();
        for g in 0..n {
            for h in 0..n {
                let lhs = ops[g].compose(&ops[h]).unwrap();
                let rhs = ops[r.group().mul(g, h)].scale_phase(r.cocycle().value(g, h));
                assert_eq!(lhs, rhs, "g={g} h={h}");
            }
            let t = ops[g].normalized_trace();
            let want = if g == 0 { 1.0 } else { 0.0 };
            assert_eq!(t, C64::new(want, 0.0));
        }
    }

    #[test]
    fn apply_preserves_norm() {
        let r = rep(3);
        for g in [1usize, 17, 100, 215] {
            let op = r.op(g);
            for s in 0..50 {
                let v = random_unit_vector(216, s);
                let w = op.apply(&v).unwrap();
                assert!((norm(&w) - 1.0).abs() < 1e-13);
            }
            let mut e = vec![C64::new(0.0, 0.0); 216];
            e[3] = C64::new(1.0, 0.0);
            let w = op.apply(&e).unwrap();
            assert_eq!(w.iter().filter(|x| x.norm() > 0.0).count(), 1);
        }
        assert!(r.op(1).apply(&[C64::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn empty_words_give_m_identity() {
        let r = rep(2);
        let op = single_sum(&r, &[Word::empty(), Word::empty(), Word::empty()]).unwrap();
        let v = random_unit_vector(24, 3);
        let mut y = vec![C64::default(); 24];
        op.apply(&v, &mut y);
        for (a, b) in y.iter().zip(&v) {
            assert!((a - b * 3.0).norm() < 1e-15);
        }
    }

    #[test]
    fn diagonal_vector_is_fixed() {
        let r = rep(3);
        let op = tensor_sum(&r, &r, &generator_words(3).unwrap()).unwrap();
        let d = 216;
        let mut v = vec![C64::new(0.0, 0.0); d * d];
        for h in 0..d {
            v[h * d + h] = C64::new(1.0, 0.0);
        }
        let mut y = vec![C64::default(); d * d];
        op.apply(&v, &mut y);
        for (a, b) in y.iter().zip(&v) {
            assert!((a - b * 3.0).norm() < 1e-12);
        }
    }

    #[test]
    fn tensor_matches_kronecker_and_parallel_split() {
        let (a, b) = (rep(2), rep(1));
        let words = generator_words(3).unwrap();
        let op = tensor_sum(&a, &b, &words).unwrap();
        let mut dense = DMatrix::<C64>::zeros(24, 24);
        for w in &words {
            dense += a
                .op_word(w)
                .unwrap()
                .to_dense()
                .kronecker(&b.op_word(w).unwrap().to_dense().conjugate());
        }
        let v = random_unit_vector(24, 9);
        let mut y = vec![C64::default(); 24];
        op.apply(&v, &mut y);
        let want = &dense * nalgebra::DVector::from_vec(v.clone());
        for i in 0..24 {
            assert!((y[i] - want[i]).norm() < 1e-12);
        }
        let mut ya = vec![C64::default(); 24];
        op.apply_adjoint(&v, &mut ya);
        let want = dense.adjoint() * nalgebra::DVector::from_vec(v);
        for i in 0..24 {
            assert!((ya[i] - want[i]).norm() < 1e-12);
        }
    }
}
