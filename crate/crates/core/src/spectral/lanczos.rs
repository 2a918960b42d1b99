//! Lanczos iteration with full reorthogonalization for the largest
//! eigenvalues of an implicitly applied symmetric operator.
//!
//! Ritz values come from Sturm-sequence bisection on the tridiagonal matrix
//! and the matching Ritz vectors from inverse iteration, so every
//! convergence check costs O(k·m) instead of a full eigendecomposition.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LanczosOptions {
    /// Residual tolerance relative to the Ritz value.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RitzPairs {
    /// Descending.
    pub values: Vec<f64>,
    /// Unit Ritz vectors, present when requested.
    pub vectors: Vec<Vec<f64>>,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (t, &v) in y.iter_mut().zip(x) {
        *t += alpha * v;
    }
}

fn random_unit<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let r = norm(&v);
        if r > 0.0 {
            return v.into_iter().map(|x| x / r).collect();
        }
    }
}

fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, w);
            axpy(-c, q, w);
        }
    }
}

/// Number of eigenvalues of the tridiagonal `(diag, off)` below `x`.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..diag.len() {
        let b2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        d = diag[i] - x - if i == 0 { 0.0 } else { b2 / d };
        if d == 0.0 {
            d = -f64::EPSILON * (x.abs() + 1.0);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `r`-th largest eigenvalue (`r = 0` is the largest).
fn tridiagonal_eigenvalue(diag: &[f64], off: &[f64], r: usize) -> f64 {
    let m = diag.len();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..m {
        let radius = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < m { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - radius);
        hi = hi.max(diag[i] + radius);
    }
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    lo -= f64::EPSILON * scale;
    hi += f64::EPSILON * scale;
    // want x with exactly m - r - 1 eigenvalues below it
    let target = m - r;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solve `(T − shift) x = b` by Gaussian elimination with partial pivoting
/// on the tridiagonal band.
fn tridiagonal_solve(diag: &[f64], off: &[f64], shift: f64, b: &mut [f64]) {
    let m = diag.len();
    let tiny = f64::EPSILON * (shift.abs() + diag.iter().chain(off).fold(0.0f64, |a, v| a.max(v.abs())) + 1e-300);
    // rows hold (main, super1, super2) after pivoting
    let mut d: Vec<f64> = diag.iter().map(|v| v - shift).collect();
    let mut u1: Vec<f64> = off.to_vec();
    u1.push(0.0);
    let mut u2 = vec![0.0; m];
    let mut lower: Vec<f64> = off.to_vec();
    for i in 0..m.saturating_sub(1) {
        if lower[i].abs() > d[i].abs() {
            // swap rows i and i+1
            let (a0, a1, a2) = (d[i], u1[i], u2[i]);
            d[i] = lower[i];
            u1[i] = d[i + 1];
            u2[i] = u1[i + 1];
            lower[i] = a0;
            d[i + 1] = a1;
            u1[i + 1] = a2;
            b.swap(i, i + 1);
        }
        if d[i] == 0.0 {
            d[i] = tiny;
        }
        let l = lower[i] / d[i];
        d[i + 1] -= l * u1[i];
        if i + 1 < m {
            u1[i + 1] -= l * u2[i];
        }
        b[i + 1] -= l * b[i];
    }
    if m > 0 && d[m - 1] == 0.0 {
        d[m - 1] = tiny;
    }
    for i in (0..m).rev() {
        let mut s = b[i];
        if i + 1 < m {
            s -= u1[i] * b[i + 1];
        }
        if i + 2 < m {
            s -= u2[i] * b[i + 2];
        }
        b[i] = s / d[i];
    }
}

/// Unit eigenvectors of the tridiagonal matrix for the given eigenvalues,
/// mutually orthogonalized.
fn tridiagonal_vectors(diag: &[f64], off: &[f64], values: &[f64]) -> Vec<Vec<f64>> {
    let m = diag.len();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(values.len());
    for (idx, &theta) in values.iter().enumerate() {
        let mut s: Vec<f64> = (0..m).map(|i| 1.0 + 0.1 * ((i * 7 + idx * 3) % 11) as f64).collect();
        for _ in 0..3 {
            tridiagonal_solve(diag, off, theta, &mut s);
            orthogonalize(&mut s, &out);
            let r = norm(&s);
            if r == 0.0 || !r.is_finite() {
                break;
            }
            s.iter_mut().for_each(|v| *v /= r);
        }
        out.push(s);
    }
    out
}

/// Largest `k` eigenpairs of the symmetric operator `op` acting on ℝⁿ.
pub fn largest_eigenpairs<F>(n: usize, k: usize, mut op: F, opts: &LanczosOptions, want_vectors: bool) -> Result<RitzPairs>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    if k == 0 || k > n {
        return Err(Error::param(format!("cannot extract {k} eigenpairs in dimension {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x1A2C_0500 ^ n as u64);
    let max_steps = n.min(opts.max_iter.max(k));
    let mut basis: Vec<Vec<f64>> = vec![random_unit(&mut rng, n)];
    let mut diag: Vec<f64> = Vec::new();
    let mut off: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut scale = 0.0f64;

    for step in 0..max_steps {
        let q = &basis[step];
        op(q, &mut w)?;
        let alpha = dot(q, &w);
        axpy(-alpha, q, &mut w);
        if step > 0 {
            axpy(-off[step - 1], &basis[step - 1], &mut w);
        }
        orthogonalize(&mut w, &basis);
        let beta = norm(&w);
        diag.push(alpha);
        scale = scale.max(alpha.abs()).max(beta);
        let m = step + 1;
        let exhausted = m == n;
        let breakdown = beta <= 1e-13 * scale.max(f64::MIN_POSITIVE);

        if m >= k {
            let values: Vec<f64> = (0..k).map(|r| tridiagonal_eigenvalue(&diag, &off, r)).collect();
            let vectors = tridiagonal_vectors(&diag, &off, &values);
            let converged = exhausted
                || breakdown
                || values
                    .iter()
                    .zip(&vectors)
                    .all(|(&theta, s)| beta * s[m - 1].abs() <= opts.tol * theta.abs().max(1e-300));
            if converged {
                let ritz = if want_vectors {
                    vectors
                        .iter()
                        .map(|s| {
                            let mut y = vec![0.0; n];
                            for (coef, q) in s.iter().zip(&basis) {
                                axpy(*coef, q, &mut y);
                            }
                            let r = norm(&y);
                            y.iter_mut().for_each(|v| *v /= r);
                            y
                        })
                        .collect()
                } else {
                    Vec::new()
                };
                return Ok(RitzPairs {
                    values,
                    vectors: ritz,
                    iterations: m,
                });
            }
        }
        if exhausted {
            break;
        }
        if breakdown {
            // invariant subspace below k: continue from a fresh direction
            let mut fresh = random_unit(&mut rng, n);
            orthogonalize(&mut fresh, &basis);
            let r = norm(&fresh);
            fresh.iter_mut().for_each(|v| *v /= r);
            off.push(0.0);
            basis.push(fresh);
        } else {
            off.push(beta);
            basis.push(w.iter().map(|v| v / beta).collect());
        }
    }
    Err(Error::NotConverged {
        what: "Lanczos iteration",
        iterations: max_steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn tridiagonal_eigenvalues_match_dense() {
        let diag = [2.0, -1.0, 4.0, 0.5, 3.0];
        let off = [1.0, 0.3, -2.0, 0.7];
        let dense = DMatrix::from_fn(5, 5, |i, j| {
            if i == j {
                diag[i]
            } else if i + 1 == j {
                off[i]
            } else if j + 1 == i {
                off[j]
            } else {
                0.0
            }
        });
        let mut ev: Vec<f64> = dense.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        for (r, e) in ev.iter().enumerate() {
            assert!((tridiagonal_eigenvalue(&diag, &off, r) - e).abs() < 1e-12);
        }
        let vecs = tridiagonal_vectors(&diag, &off, &ev[..2]);
        for (v, &e) in vecs.iter().zip(&ev) {
            let dv = nalgebra::DVector::from_column_slice(v);
            let res = (&dense * &dv - dv.clone() * e).norm();
            assert!(res < 1e-10, "{res}");
        }
    }

    #[test]
    fn finds_top_eigenvalues_of_diagonal_operator() {
        let n = 200;
        let d: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * 0.01).collect();
        let op = |x: &[f64], y: &mut [f64]| {
            for i in 0..x.len() {
                y[i] = d[i] * x[i];
            }
            Ok(())
        };
        let r = largest_eigenpairs(n, 2, op, &LanczosOptions::default(), true).unwrap();
        assert!((r.values[0] - d[n - 1]).abs() < 1e-9);
        assert!((r.values[1] - d[n - 2]).abs() < 1e-9);
        assert!(r.vectors[0][n - 1].abs() > 1.0 - 1e-8);
    }

    #[test]
    fn rank_one_operator_breaks_down_cleanly() {
        let n = 10;
        let op = |x: &[f64], y: &mut [f64]| {
            let s: f64 = x.iter().sum();
            y.iter_mut().for_each(|v| *v = s);
            Ok(())
        };
        let r = largest_eigenpairs(n, 2, op, &LanczosOptions::default(), false).unwrap();
        assert!((r.values[0] - n as f64).abs() < 1e-10);
        assert!(r.values[1].abs() < 1e-10);
    }
}
