//! Smith normal form over `Z/L` and solvability of `M x ≡ r (mod L)`.
//!
//! Row and column operations are integer matrices of determinant 1 (built
//! from extended gcd steps), so they stay invertible after reduction mod `L`.
//! Entries are kept reduced in `[0, L)`, which avoids coefficient growth.
//! `L = 0` is not allowed; `L = 1` gives the zero ring where everything solves.

use crate::ring::{ext_gcd, mod_inverse};

/// Unimodular `[[u, v], [w, x]]` sending `(p, e)` to `(gcd, 0)`; the identity-like
/// step when `p | e` leaves the pivot line untouched.
fn bezout(p: i128, e: i128) -> (i128, i128, i128, i128) {
    if e % p == 0 {
        return (1, 0, -(e / p), 1);
    }
    let (g, u, v) = ext_gcd(p, e);
    (u, v, -(e / g), p / g)
}

#[derive(Debug, Clone, Copy)]
enum RowOp {
    Swap(usize, usize),
    /// `(row_i, row_j) <- (u·row_i + v·row_j, w·row_i + x·row_j)`
    Mix {
        i: usize,
        j: usize,
        u: i128,
        v: i128,
        w: i128,
        x: i128,
    },
}

/// `P·M·Q = D` over `Z/L` with `D` diagonal. `P` is kept as an operation log.
#[derive(Debug, Clone)]
pub struct ModularSmith {
    modulus: u64,
    rows: usize,
    cols: usize,
    ops: Vec<RowOp>,
    /// Column transform, row-major `cols x cols`.
    q: Vec<i128>,
    diag: Vec<u64>,
}

impl ModularSmith {
    /// `matrix` is row-major `rows x cols` with arbitrary integer entries.
    pub fn new(matrix: &[i64], rows: usize, cols: usize, modulus: u64) -> Self {
        assert!(modulus >= 1, "modulus must be positive");
        assert_eq!(matrix.len(), rows * cols);
        let l = modulus as i128;
        let md = |v: i128| v.rem_euclid(l);
        let mut a: Vec<i128> = matrix.iter().map(|&v| md(v as i128)).collect();
        let mut q = vec![0i128; cols * cols];
        for i in 0..cols {
            q[i * cols + i] = md(1);
        }
        let mut ops = Vec::new();
        let mut diag = Vec::new();
        let at = |r: usize, c: usize| r * cols + c;

        for t in 0..rows.min(cols) {
            // pivot: nonzero entry with the smallest gcd with L
            let mut best: Option<(i128, usize, usize)> = None;
            for r in t..rows {
                for c in t..cols {
                    let v = a[at(r, c)];
                    if v != 0 {
                        let g = ext_gcd(v, l).0;
                        if best.is_none_or(|(bg, _, _)| g < bg) {
                            best = Some((g, r, c));
                            if g == 1 {
                                break;
                            }
                        }
                    }
                }
                if matches!(best, Some((1, _, _))) {
                    break;
                }
            }
            let Some((_, pr, pc)) = best else { break };
            if pr != t {
                for c in 0..cols {
                    a.swap(at(pr, c), at(t, c));
                }
                ops.push(RowOp::Swap(t, pr));
            }
            if pc != t {
                for r in 0..rows {
                    a.swap(at(r, pc), at(r, t));
                }
                for r in 0..cols {
                    q.swap(r * cols + pc, r * cols + t);
                }
            }
            loop {
                for r in (t + 1)..rows {
                    let (p, e) = (a[at(t, t)], a[at(r, t)]);
                    if e == 0 {
                        continue;
                    }
                    let (u, v, w, x) = bezout(p, e);
                    for c in t..cols {
                        let (rt, rr) = (a[at(t, c)], a[at(r, c)]);
                        a[at(t, c)] = md(u * rt + v * rr);
                        a[at(r, c)] = md(w * rt + x * rr);
                    }
                    ops.push(RowOp::Mix {
                        i: t,
                        j: r,
                        u,
                        v,
                        w,
                        x,
                    });
                }
                for c in (t + 1)..cols {
                    let (p, e) = (a[at(t, t)], a[at(t, c)]);
                    if e == 0 {
                        continue;
                    }
                    let (u, v, w, x) = bezout(p, e);
                    for r in t..rows {
                        let (ct, cc) = (a[at(r, t)], a[at(r, c)]);
                        a[at(r, t)] = md(u * ct + v * cc);
                        a[at(r, c)] = md(w * ct + x * cc);
                    }
                    for r in 0..cols {
                        let (ct, cc) = (q[r * cols + t], q[r * cols + c]);
                        q[r * cols + t] = md(u * ct + v * cc);
                        q[r * cols + c] = md(w * ct + x * cc);
                    }
                }
                if ((t + 1)..rows).all(|r| a[at(r, t)] == 0) {
                    break;
                }
            }
            if a[at(t, t)] == 0 {
                break;
            }
            diag.push(a[at(t, t)] as u64);
        }
        ModularSmith {
            modulus,
            rows,
            cols,
            ops,
            q,
            diag,
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Nonzero diagonal entries `d_i` (as residues mod `L`).
    pub fn diagonal(&self) -> &[u64] {
        &self.diag
    }

    /// Solves `M x ≡ r (mod L)`; `None` when unsolvable.
    pub fn solve(&self, rhs: &[i64]) -> Option<Vec<u64>> {
        assert_eq!(rhs.len(), self.rows);
        let l = self.modulus as i128;
        let md = |v: i128| v.rem_euclid(l);
        let mut r: Vec<i128> = rhs.iter().map(|&v| md(v as i128)).collect();
        for op in &self.ops {
            match *op {
                RowOp::Swap(i, j) => r.swap(i, j),
                RowOp::Mix { i, j, u, v, w, x } => {
                    let (ri, rj) = (r[i], r[j]);
                    r[i] = md(u * ri + v * rj);
                    r[j] = md(w * ri + x * rj);
                }
            }
        }
        let rank = self.diag.len();
        if r[rank..].iter().any(|&v| v != 0) {
            return None;
        }
        let mut y = vec![0i128; self.cols];
        for (i, &d) in self.diag.iter().enumerate() {
            let g = ext_gcd(d as i128, l).0;
            if r[i] % g != 0 {
                return None;
            }
            let lg = (l / g) as u64;
            let unit = if lg == 1 {
                0
            } else {
                mod_inverse(((d as i128 / g) % lg as i128) as u64, lg)? as i128
            };
            y[i] = md((r[i] / g) * unit);
        }
        let cols = self.cols;
        Some(
            (0..cols)
                .map(|row| {
                    let s = (0..cols).fold(0i128, |acc, c| md(acc + self.q[row * cols + c] * y[c]));
                    s as u64
                })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn residual_ok(m: &[i64], rows: usize, cols: usize, x: &[u64], r: &[i64], l: u64) -> bool {
        (0..rows).all(|i| {
            let s: i128 = (0..cols)
                .map(|j| m[i * cols + j] as i128 * x[j] as i128)
                .sum();
            (s - r[i] as i128).rem_euclid(l as i128) == 0
        })
    }

    /// Exhaustive search over `(Z/L)^cols`.
    fn brute_solvable(m: &[i64], rows: usize, cols: usize, r: &[i64], l: u64) -> bool {
        let total = (l as usize).pow(cols as u32);
        (0..total).any(|mut code| {
            let x: Vec<u64> = (0..cols)
                .map(|_| {
                    let d = code % l as usize;
                    code /= l as usize;
                    d as u64
                })
                .collect();
            residual_ok(m, rows, cols, &x, r, l)
        })
    }

    #[test]
    fn small_systems() {
        // 2x ≡ 1 mod 4 has no solution; 2x ≡ 2 mod 4 does
        let s = ModularSmith::new(&[2], 1, 1, 4);
        assert!(s.solve(&[1]).is_none());
        let x = s.solve(&[2]).unwrap();
        assert_eq!((2 * x[0]) % 4, 2);
        // zero ring
        let s = ModularSmith::new(&[3, 5], 1, 2, 1);
        assert_eq!(s.solve(&[7]).unwrap(), vec![0, 0]);
    }

    proptest! {
        #[test]
        fn agrees_with_brute_force(
            l in 1u64..13,
            rows in 1usize..6,
            cols in 1usize..4,
            seed in proptest::collection::vec(-20i64..20, 24),
            rhs in proptest::collection::vec(-20i64..20, 6),
        ) {
            let m: Vec<i64> = seed[..rows * cols].to_vec();
            let r = &rhs[..rows];
            let s = ModularSmith::new(&m, rows, cols, l);
            let got = s.solve(r);
            prop_assert_eq!(got.is_some(), brute_solvable(&m, rows, cols, r, l));
            if let Some(x) = got {
                prop_assert!(residual_ok(&m, rows, cols, &x, r, l));
            }
        }
    }
}
