#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use projgap_core::cocycle::standard_phase_cocycle;
use projgap_core::group::IndexedGroup;
use projgap_core::rep::{regular_rep, GenPermOperator, ProjectiveRep};
use projgap_core::word::generator_words;

pub fn rep(k: u64) -> ProjectiveRep {
    let g = Arc::new(IndexedGroup::zmod(k).unwrap());
    let c = standard_phase_cocycle(&g).unwrap();
    regular_rep(g, c).unwrap()
}

pub fn generator_ops(r: &ProjectiveRep, m: usize) -> Vec<GenPermOperator> {
    generator_words(m)
        .unwrap()
        .iter()
        .map(|w| r.op_word(w).unwrap())
        .collect()
}

fn phase(q: u32, order: u64) -> C64 {
    C64::from_polar(1.0, 2.0 * std::f64::consts::PI * q as f64 / order as f64)
}

/// Nonzero entries `(row, col, value)` of a generalized permutation matrix:
/// column `j` has its single entry in row `perm[j]`.
pub fn triplets(a: &GenPermOperator) -> Vec<(usize, usize, C64)> {
    (0..a.dim())
        .map(|j| (a.perm()[j] as usize, j, phase(a.phase()[j], a.order())))
        .collect()
}

/// `Σ_i A_i ⊗ conj(B_i)` as an explicit list of entries, index `i1·d2 + i2`.
pub struct Kronecker {
    pub dim: usize,
    pub entries: Vec<(usize, usize, C64)>,
}

impl Kronecker {
    pub fn new(left: &[GenPermOperator], right: &[GenPermOperator]) -> Self {
        let d2 = right[0].dim();
        let mut entries = Vec::new();
        for (a, b) in left.iter().zip(right) {
            let tb = triplets(b);
            for (r1, c1, v1) in triplets(a) {
                for &(r2, c2, v2) in &tb {
                    entries.push((r1 * d2 + r2, c1 * d2 + c2, v1 * v2.conj()));
                }
            }
        }
        Kronecker {
            dim: left[0].dim() * d2,
            entries,
        }
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }

    pub fn apply_adjoint(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        for &(r, c, v) in &self.entries {
            y[c] += v.conj() * x[r];
        }
        y
    }

    pub fn dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }
}

pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
