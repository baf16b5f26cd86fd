//! Operator norms: power iteration and restarted Lanczos on `A†A`, a dense SVD
//! oracle and the `D(m, δ)` bound.
//!
//! Start vectors come from `ChaCha8Rng::seed_from_u64(seed)`: for each
//! coordinate in order, the real part then the imaginary part are drawn as
//! `2u - 1` with `u` uniform in `[0, 1)`, and the vector is normalized. The
//! stream is portable, so estimates are bit-reproducible across platforms.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default cap on the dimension accepted by [`norm_dense`].
pub const DEFAULT_DENSE_CAP: usize = 2000;

/// Krylov basis size between Lanczos restarts.
pub const LANCZOS_BASIS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Power,
    /// Explicitly restarted Lanczos with full reorthogonalization.
    #[default]
    Lanczos,
}

impl std::str::FromStr for Solver {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "power" => Ok(Solver::Power),
            "lanczos" => Ok(Solver::Lanczos),
            other => Err(Error::Parse(format!("unknown solver {other:?}"))),
        }
    }
}

/// A square matrix-free operator with its adjoint.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    /// `y = A x`; `y` is overwritten.
    fn apply(&self, x: &[C64], y: &mut [C64]);
    /// `y = A† x`; `y` is overwritten.
    fn apply_adjoint(&self, x: &[C64], y: &mut [C64]);
}

impl<T: LinearOperator + Send + ?Sized> LinearOperator for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        (**self).apply(x, y)
    }
    fn apply_adjoint(&self, x: &[C64], y: &mut [C64]) {
        (**self).apply_adjoint(x, y)
    }
}

/// Explicit square matrix as an operator.
#[derive(Debug, Clone)]
pub struct DenseOperator(pub DMatrix<C64>);

impl LinearOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.0.nrows()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let n = self.dim();
        for (r, out) in y.iter_mut().enumerate().take(n) {
            *out = (0..n).map(|c| self.0[(r, c)] * x[c]).sum();
        }
    }

    fn apply_adjoint(&self, x: &[C64], y: &mut [C64]) {
        let n = self.dim();
        for (c, out) in y.iter_mut().enumerate().take(n) {
            *out = (0..n).map(|r| self.0[(r, c)].conj() * x[r]).sum();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerOptions {
    pub tol: f64,
    pub max_iters: usize,
    pub seeds: Vec<u64>,
    /// Keep the per-iteration estimates of every seed.
    #[serde(default)]
    pub record_history: bool,
    /// Used by [`norm_estimate`]; [`norm_power`] always runs power iteration.
    #[serde(default)]
    pub solver: Solver,
}

impl Default for PowerOptions {
    fn default() -> Self {
        PowerOptions {
            tol: 1e-8,
            max_iters: 20_000,
            seeds: vec![1, 2, 3],
            record_history: false,
            solver: Solver::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    /// `‖A v‖` for the final unit vector `v`; a lower bound on `‖A‖`.
    pub value: f64,
    /// `‖A†A v - λ v‖ / λ` with `λ = value²`.
    pub residual: f64,
    pub iterations: usize,
    pub seed: u64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    /// Largest converged estimate, or the largest estimate if none converged.
    pub best: NormEstimate,
    pub per_seed: Vec<NormEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub history: Option<Vec<Vec<f64>>>,
}

impl NormReport {
    pub fn all_converged(&self) -> bool {
        self.per_seed.iter().all(|e| e.converged)
    }

    /// `(max - min) / max` over the per-seed values.
    pub fn seed_spread(&self) -> f64 {
        relative_spread(self.per_seed.iter().map(|e| e.value))
    }
}

pub(crate) fn relative_spread(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !hi.is_finite() || hi <= 0.0 {
        0.0
    } else {
        (hi - lo) / hi
    }
}

/// Best estimate: largest converged value, falling back to the largest value.
pub(crate) fn pick_best(estimates: &[NormEstimate]) -> NormEstimate {
    let max_by = |it: &mut dyn Iterator<Item = &NormEstimate>| {
        it.fold(None::<&NormEstimate>, |acc, e| match acc {
            Some(a) if a.value >= e.value => Some(a),
            _ => Some(e),
        })
        .cloned()
    };
    max_by(&mut estimates.iter().filter(|e| e.converged))
        .or_else(|| max_by(&mut estimates.iter()))
        .expect("at least one estimate")
}

pub fn random_unit_vector(dim: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<C64> = (0..dim)
        .map(|_| {
            let re = 2.0 * rng.gen::<f64>() - 1.0;
            let im = 2.0 * rng.gen::<f64>() - 1.0;
            C64::new(re, im)
        })
        .collect();
    let n = norm(&v);
    v.iter_mut().for_each(|x| *x /= n);
    v
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// Power iteration on `A†A` from one seeded start.
pub fn power_single(
    op: &dyn LinearOperator,
    tol: f64,
    max_iters: usize,
    seed: u64,
    history: Option<&mut Vec<f64>>,
) -> NormEstimate {
    let n = op.dim();
    let mut v = random_unit_vector(n, seed);
    let mut w = vec![C64::new(0.0, 0.0); n];
    let mut u = vec![C64::new(0.0, 0.0); n];
    let mut hist = history;
    let mut est = NormEstimate {
        value: 0.0,
        residual: f64::INFINITY,
        iterations: 0,
        seed,
        converged: false,
    };
    for it in 1..=max_iters {
        op.apply(&v, &mut w);
        let lambda = w.iter().map(|x| x.norm_sqr()).sum::<f64>();
        est.iterations = it;
        est.value = lambda.sqrt();
        if let Some(h) = hist.as_deref_mut() {
            h.push(est.value);
        }
        if lambda == 0.0 {
            est.residual = 0.0;
            est.converged = true;
            return est;
        }
        op.apply_adjoint(&w, &mut u);
        let r: f64 = u
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b * lambda).norm_sqr())
            .sum::<f64>()
            .sqrt();
        est.residual = r / lambda;
        if est.residual <= tol {
            est.converged = true;
            return est;
        }
        let un = norm(&u);
        for (vi, ui) in v.iter_mut().zip(&u) {
            *vi = ui / un;
        }
    }
    est
}

/// Multi-seed power iteration; seeds run in parallel, results are seed-ordered.
pub fn norm_power(op: &dyn LinearOperator, opts: &PowerOptions) -> Result<NormReport> {
    multi_seed(op, opts, power_single)
}

/// Multi-seed estimate with the solver selected in `opts`.
pub fn norm_estimate(op: &dyn LinearOperator, opts: &PowerOptions) -> Result<NormReport> {
    match opts.solver {
        Solver::Power => multi_seed(op, opts, power_single),
        Solver::Lanczos => multi_seed(op, opts, lanczos_single),
    }
}

type SingleRun = fn(&dyn LinearOperator, f64, usize, u64, Option<&mut Vec<f64>>) -> NormEstimate;

fn multi_seed(op: &dyn LinearOperator, opts: &PowerOptions, run: SingleRun) -> Result<NormReport> {
    if op.dim() == 0 {
        return Err(Error::InvalidArgument("operator has dimension 0".into()));
    }
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    if opts.seeds.is_empty() || opts.max_iters == 0 {
        return Err(Error::InvalidArgument(
            "need at least one seed and one iteration".into(),
        ));
    }
    let runs: Vec<(NormEstimate, Vec<f64>)> = opts
        .seeds
        .par_iter()
        .map(|&seed| {
            let mut h = Vec::new();
            let e = run(
                op,
                opts.tol,
                opts.max_iters,
                seed,
                opts.record_history.then_some(&mut h),
            );
            (e, h)
        })
        .collect();
    let (per_seed, hists): (Vec<_>, Vec<_>) = runs.into_iter().unzip();
    Ok(NormReport {
        best: pick_best(&per_seed),
        per_seed,
        history: opts.record_history.then_some(hists),
    })
}

/// Top eigenpair of `A†A` by Lanczos restarted from the current Ritz vector.
///
/// `max_iters` counts applications of `A†A`. Before every restart the Ritz
/// vector `v` is certified exactly as in power iteration: `value = ‖Av‖` and
/// `residual = ‖A†Av - λv‖/λ`. History records one value per restart.
pub fn lanczos_single(
    op: &dyn LinearOperator,
    tol: f64,
    max_iters: usize,
    seed: u64,
    history: Option<&mut Vec<f64>>,
) -> NormEstimate {
    let n = op.dim();
    let basis = LANCZOS_BASIS.min(n);
    let zero = C64::new(0.0, 0.0);
    let mut v = random_unit_vector(n, seed);
    let mut av = vec![zero; n];
    let mut hv = vec![zero; n];
    let mut hist = history;
    let mut used = 0;
    let mut est = NormEstimate {
        value: 0.0,
        residual: f64::INFINITY,
        iterations: 0,
        seed,
        converged: false,
    };
    loop {
        op.apply(&v, &mut av);
        let lambda = av.iter().map(|x| x.norm_sqr()).sum::<f64>();
        op.apply_adjoint(&av, &mut hv);
        used += 1;
        est.iterations = used;
        est.value = lambda.sqrt();
        if let Some(h) = hist.as_deref_mut() {
            h.push(est.value);
        }
        if lambda == 0.0 {
            est.residual = 0.0;
            est.converged = true;
            return est;
        }
        est.residual = hv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b * lambda).norm_sqr())
            .sum::<f64>()
            .sqrt()
            / lambda;
        if est.residual <= tol {
            est.converged = true;
            return est;
        }
        if used >= max_iters {
            return est;
        }

        let mut vs = vec![std::mem::take(&mut v)];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut w = hv.clone();
        loop {
            let j = vs.len() - 1;
            let a = inner(&vs[j], &w).re;
            alpha.push(a);
            for (wi, vi) in w.iter_mut().zip(&vs[j]) {
                *wi -= vi * a;
            }
            if j > 0 {
                let b = beta[j - 1];
                for (wi, vi) in w.iter_mut().zip(&vs[j - 1]) {
                    *wi -= vi * b;
                }
            }
            for _ in 0..2 {
                for u in &vs {
                    let c = inner(u, &w);
                    for (wi, ui) in w.iter_mut().zip(u) {
                        *wi -= ui * c;
                    }
                }
            }
            let b = norm(&w);
            if vs.len() == basis || b <= 1e-14 * lambda || used >= max_iters {
                break;
            }
            beta.push(b);
            vs.push(w.iter().map(|x| x / b).collect());
            op.apply(vs.last().expect("nonempty"), &mut av);
            op.apply_adjoint(&av, &mut w);
            used += 1;
        }

        let k = alpha.len();
        let t = DMatrix::from_fn(k, k, |r, c| {
            if r == c {
                alpha[r]
            } else if r + 1 == c {
                beta[r]
            } else if c + 1 == r {
                beta[c]
            } else {
                0.0
            }
        });
        let eig = t.symmetric_eigen();
        let top = eig.eigenvalues.imax();
        let y = eig.eigenvectors.column(top);
        v = vec![zero; n];
        for (yi, u) in y.iter().zip(&vs) {
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi += ui * *yi;
            }
        }
        let vn = norm(&v);
        v.iter_mut().for_each(|x| *x /= vn);
    }
}

/// Largest singular value by full SVD.
pub fn norm_dense(m: &DMatrix<C64>) -> Result<f64> {
    norm_dense_with_cap(m, DEFAULT_DENSE_CAP)
}

pub fn norm_dense_with_cap(m: &DMatrix<C64>, cap: usize) -> Result<f64> {
    let d = m.nrows().max(m.ncols());
    if d > cap {
        return Err(Error::cap("dense dimension", cap as u64, d as u64));
    }
    if m.is_empty() {
        return Ok(0.0);
    }
    Ok(m.clone().singular_values().max())
}

/// Materializes an operator by applying it to basis vectors.
pub fn to_dense(op: &dyn LinearOperator, cap: usize) -> Result<DMatrix<C64>> {
    let n = op.dim();
    if n > cap {
        return Err(Error::cap("dense dimension", cap as u64, n as u64));
    }
    let mut out = DMatrix::zeros(n, n);
    let mut e = vec![C64::new(0.0, 0.0); n];
    let mut col = vec![C64::new(0.0, 0.0); n];
    for c in 0..n {
        e[c] = C64::new(1.0, 0.0);
        op.apply(&e, &mut col);
        for r in 0..n {
            out[(r, c)] = col[r];
        }
        e[c] = C64::new(0.0, 0.0);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapBound {
    pub m: u32,
    pub delta: f64,
    #[serde(rename = "D")]
    pub d: f64,
}

/// `D = sqrt(m² - δ²/2)` for `m ≥ 1` and `0 ≤ δ ≤ m·√2`.
pub fn gap_bound(m: u32, delta: f64) -> Result<GapBound> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    let mf = f64::from(m);
    let limit = mf * std::f64::consts::SQRT_2;
    // allow rounding at the upper end, e.g. δ = 2√2 for m = 2
    if delta.is_nan() || delta < 0.0 || delta > limit * (1.0 + 4.0 * f64::EPSILON) {
        return Err(Error::InvalidArgument(format!(
            "delta {delta} outside [0, {limit}]"
        )));
    }
    let d = (mf * mf - delta * delta / 2.0).max(0.0).sqrt();
    Ok(GapBound { m, delta, d })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(values: &[f64]) -> DenseOperator {
        DenseOperator(DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            values.len(),
            values.iter().map(|&v| C64::new(v, 0.0)),
        )))
    }

    #[test]
    fn scaled_identity() {
        let op = diag(&[3.0; 10]);
        let r = norm_power(&op, &PowerOptions::default()).unwrap();
        assert!((r.best.value - 3.0).abs() < 1e-12);
        assert!(r.best.iterations <= 2);
        assert!(r.all_converged());
    }

    #[test]
    fn diagonal_and_dense_agree() {
        let op = diag(&[1.0, 2.0, 5.0]);
        let r = norm_power(&op, &PowerOptions::default()).unwrap();
        assert!((r.best.value - 5.0).abs() < 1e-8);
        assert!((norm_dense(&op.0).unwrap() - 5.0).abs() < 1e-12);
        let id = DMatrix::<C64>::identity(7, 7);
        assert!((norm_dense(&id).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_one() {
        let u = random_unit_vector(6, 4)
            .into_iter()
            .map(|x| x * 2.0)
            .collect::<Vec<_>>();
        let v = random_unit_vector(6, 5)
            .into_iter()
            .map(|x| x * 0.5)
            .collect::<Vec<_>>();
        let m = DMatrix::from_fn(6, 6, |r, c| u[r] * v[c].conj());
        assert!((norm_dense(&m).unwrap() - norm(&u) * norm(&v)).abs() < 1e-12);
        let r = norm_power(&DenseOperator(m), &PowerOptions::default()).unwrap();
        assert!((r.best.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn history_is_monotone() {
        let m = DMatrix::from_fn(30, 30, |r, c| {
            C64::new(((r * 7 + c * 3) % 11) as f64 - 5.0, ((r + c) % 4) as f64)
        });
        let dense = norm_dense(&m).unwrap();
        let opts = PowerOptions {
            record_history: true,
            ..PowerOptions::default()
        };
        let r = norm_power(&DenseOperator(m), &opts).unwrap();
        for h in r.history.as_ref().unwrap() {
            for w in h.windows(2) {
                assert!(w[1] >= w[0] - 1e-14 * w[0].max(1.0));
            }
        }
        assert!((r.best.value - dense).abs() <= 1e-8 * dense);
        assert!(r.seed_spread() < 1e-7);
    }

    #[test]
    fn adjoint_consistency() {
        let m = DMatrix::from_fn(12, 12, |r, c| {
            C64::new((r as f64 - c as f64).sin(), (r * c) as f64 % 3.0)
        });
        let op = DenseOperator(m);
        for s in 0..20 {
            let x = random_unit_vector(12, 2 * s);
            let y = random_unit_vector(12, 2 * s + 1);
            let (mut ax, mut aty) = (vec![C64::default(); 12], vec![C64::default(); 12]);
            op.apply(&x, &mut ax);
            op.apply_adjoint(&y, &mut aty);
            let (l, r) = (inner(&ax, &y), inner(&x, &aty));
            assert!((l - r).norm() <= 1e-12 * l.norm().max(1.0));
        }
    }

    #[test]
    fn zero_operator_and_bad_options() {
        let op = diag(&[0.0; 4]);
        let r = norm_power(&op, &PowerOptions::default()).unwrap();
        assert_eq!(r.best.value, 0.0);
        assert!(r.best.converged);
        let bad = PowerOptions {
            tol: 0.0,
            ..PowerOptions::default()
        };
        assert!(norm_power(&op, &bad).is_err());
        assert!(norm_dense_with_cap(&DMatrix::<C64>::identity(5, 5), 4).is_err());
    }

    #[test]
    fn non_convergence_is_reported() {
        // two equal-modulus top singular values with different vectors still converge
        // in value, so use a cap of one iteration instead
        let op = diag(&[1.0, 2.0, 2.0 - 1e-9, 0.5]);
        let opts = PowerOptions {
            max_iters: 1,
            ..PowerOptions::default()
        };
        let r = norm_power(&op, &opts).unwrap();
        assert!(!r.best.converged);
        assert_eq!(r.best.iterations, 1);
    }

    #[test]
    fn gap_bound_values() {
        assert!((gap_bound(3, 0.0).unwrap().d - 3.0).abs() < 1e-12);
        assert!((gap_bound(3, 1.0).unwrap().d - 8.5f64.sqrt()).abs() < 1e-12);
        assert!(gap_bound(2, 2.0 * 2f64.sqrt()).unwrap().d.abs() < 1e-12);
        assert!(gap_bound(3, -0.1).is_err());
        assert!(gap_bound(3, 4.3).is_err());
        assert!(gap_bound(0, 0.0).is_err());
        let g = gap_bound(4, 0.5).unwrap();
        assert!(g.d < 4.0);
    }

    #[test]
    fn lanczos_matches_dense_and_power() {
        let m = DMatrix::from_fn(60, 60, |r, c| {
            C64::new(((r * 13 + c * 5) % 17) as f64 - 8.0, ((r * c) % 5) as f64)
        });
        let dense = norm_dense(&m).unwrap();
        let op = DenseOperator(m);
        let l = norm_estimate(&op, &PowerOptions::default()).unwrap();
        let p = norm_power(&op, &PowerOptions::default()).unwrap();
        assert!(l.all_converged() && p.all_converged());
        assert!((l.best.value - dense).abs() <= 1e-8 * dense);
        assert!((l.best.value - p.best.value).abs() <= 1e-8 * dense);
        assert!(l.best.residual <= 1e-8);
        assert!(l.best.iterations < p.best.iterations.max(LANCZOS_BASIS + 2));
    }

    #[test]
    fn lanczos_small_and_degenerate() {
        for values in [
            vec![3.0],
            vec![2.0, 2.0, 1.0],
            vec![0.0; 3],
            vec![1.0, 5.0, 5.0, 5.0 - 1e-6],
        ] {
            let top = values.iter().cloned().fold(0.0, f64::max);
            let r = norm_estimate(&diag(&values), &PowerOptions::default()).unwrap();
            assert!(r.all_converged());
            assert!(
                (r.best.value - top).abs() <= 1e-8 * top.max(1.0),
                "{values:?}"
            );
        }
        let opts = PowerOptions {
            max_iters: 1,
            ..PowerOptions::default()
        };
        let r = norm_estimate(&diag(&[1.0, 2.0, 2.0 - 1e-3, 0.5]), &opts).unwrap();
        assert!(!r.best.converged);
        assert_eq!(r.best.iterations, 1);
    }
}
