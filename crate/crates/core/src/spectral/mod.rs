//! Extremal singular values, exact singularity, norms and the dominant
//! eigenpair of 0/1 matrices.
//!
//! Small matrices go through a dense SVD. Above `n_dense` the largest
//! singular values come from Lanczos on `AᵀA` and the smallest from Lanczos
//! on `(AᵀA)⁻¹`, applied through one LU factorization.

pub mod distance;
pub mod lanczos;
pub mod lu;
pub mod modular;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SparseBinaryMatrix;
use crate::models::GraphModel;
use lanczos::{largest_eigenpairs, LanczosOptions};
use lu::Lu;

pub use distance::{distance_column_to_span, distance_via_quadratic_form, DistanceInstance, DistanceKind, DistanceValue};
pub use modular::{certify_singularity, exact_rank, Singularity};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpectralOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Largest size handled by the dense SVD.
    pub n_dense: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10_000,
            n_dense: 256,
        }
    }
}

impl SpectralOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::param(format!("tol = {} must lie in (0, 1)", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::param("max_iter must be positive"));
        }
        Ok(())
    }

    fn lanczos(&self) -> LanczosOptions {
        LanczosOptions {
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularExtremes {
    pub s_min: f64,
    pub s2: f64,
    pub s_max: f64,
}

fn require_square(a: &SparseBinaryMatrix) -> Result<usize> {
    if !a.is_square() || a.rows() == 0 {
        return Err(Error::Dimension(format!("{}x{} matrix is not square and nonempty", a.rows(), a.cols())));
    }
    Ok(a.rows())
}

/// All singular values, descending.
pub fn dense_singular_values(a: &SparseBinaryMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = a.to_dense().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// `(s_min, s₂, s_max)`. For `n = 1`, `s₂ = s_max`.
pub fn singular_extremes(a: &SparseBinaryMatrix, opts: &SpectralOptions) -> Result<SingularExtremes> {
    singular_extremes_with(a, opts, None)
}

/// As [`singular_extremes`], skipping the inverse iteration when the matrix
/// is already known to be exactly singular.
pub fn singular_extremes_with(a: &SparseBinaryMatrix, opts: &SpectralOptions, known: Option<Singularity>) -> Result<SingularExtremes> {
    opts.validate()?;
    let n = require_square(a)?;
    if n <= opts.n_dense {
        let s = dense_singular_values(a);
        let s_min = if known == Some(Singularity::Singular) { 0.0 } else { s[n - 1] };
        return Ok(SingularExtremes {
            s_min,
            s2: s[1.min(n - 1)],
            s_max: s[0],
        });
    }
    let (s_max, s2) = largest_two(a, opts)?;
    let s_min = if known == Some(Singularity::Singular) {
        0.0
    } else {
        smallest(a, opts, false)?.0
    };
    Ok(SingularExtremes {
        s_min: s_min.min(s2),
        s2,
        s_max,
    })
}

fn largest_two(a: &SparseBinaryMatrix, opts: &SpectralOptions) -> Result<(f64, f64)> {
    let n = a.rows();
    let mut tmp = vec![0.0; n];
    let op = |x: &[f64], y: &mut [f64]| {
        a.mul_vec(x, &mut tmp);
        a.mul_vec_t(&tmp, y);
        Ok(())
    };
    let r = largest_eigenpairs(n, 2, op, &opts.lanczos(), false)?;
    Ok((r.values[0].max(0.0).sqrt(), r.values[1].max(0.0).sqrt()))
}

/// Smallest singular value and, when asked, a unit right singular vector.
fn smallest(a: &SparseBinaryMatrix, opts: &SpectralOptions, want_vector: bool) -> Result<(f64, Option<Vec<f64>>)> {
    let n = a.rows();
    let lu = Lu::factor(a)?;
    if lu.has_zero_pivot() {
        // exact zero pivots: ask the modular certificate before trusting it
        if certify_singularity(a) == Singularity::Singular {
            let v = if want_vector { Some(dense_smallest_vector(a)) } else { None };
            return Ok((0.0, v));
        }
        let dense = dense_singular_values(a);
        let v = if want_vector { Some(dense_smallest_vector(a)) } else { None };
        return Ok((dense[n - 1], v));
    }
    let mut tmp = vec![0.0; n];
    // (AᵀA)⁻¹ = A⁻¹ A⁻ᵀ
    let op = |x: &[f64], y: &mut [f64]| {
        tmp.copy_from_slice(x);
        lu.solve_transpose_in_place(&mut tmp)?;
        lu.solve_in_place(&mut tmp)?;
        y.copy_from_slice(&tmp);
        Ok(())
    };
    let r = largest_eigenpairs(n, 1, op, &opts.lanczos(), want_vector)?;
    let mu = r.values[0];
    let s = if mu.is_finite() && mu > 0.0 { 1.0 / mu.sqrt() } else { 0.0 };
    Ok((s, r.vectors.into_iter().next()))
}

fn dense_smallest_vector(a: &SparseBinaryMatrix) -> Vec<f64> {
    let svd = a.to_dense().svd(false, true);
    let vt = svd.v_t.expect("requested V");
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .expect("nonempty");
    vt.row(k).iter().copied().collect()
}

/// Smallest singular value with a unit right singular vector `v`
/// (`‖Av‖ = s_min`).
pub fn smallest_singular_pair(a: &SparseBinaryMatrix, opts: &SpectralOptions) -> Result<(f64, Vec<f64>)> {
    opts.validate()?;
    let n = require_square(a)?;
    if n <= opts.n_dense {
        let s = dense_singular_values(a);
        return Ok((s[n - 1], dense_smallest_vector(a)));
    }
    let (s, v) = smallest(a, opts, true)?;
    Ok((s, v.expect("requested vector")))
}

/// `(σ, σ̃) = (s_max/s_min, s₂/s_min)`, infinite for singular matrices.
pub fn condition_numbers(s: &SingularExtremes, exact: Singularity) -> (f64, f64) {
    if s.s_min == 0.0 || exact == Singularity::Singular {
        return (f64::INFINITY, f64::INFINITY);
    }
    (s.s_max / s.s_min, s.s2 / s.s_min)
}

/// `‖A − EA‖` with the mean applied in closed form.
pub fn centered_operator_norm(a: &SparseBinaryMatrix, model: &GraphModel, opts: &SpectralOptions) -> Result<f64> {
    opts.validate()?;
    let n = require_square(a)?;
    if n != model.n {
        return Err(Error::Dimension(format!("matrix has size {n}, model has n = {}", model.n)));
    }
    let mean = model.expected_matrix();
    let mut t1 = vec![0.0; n];
    let mut t2 = vec![0.0; n];
    // EA is symmetric, so (A − EA)ᵀ y = Aᵀy − EA·y
    let op = |x: &[f64], y: &mut [f64]| {
        a.mul_vec(x, &mut t1);
        mean.mul_vec(x, &mut t2);
        t1.iter_mut().zip(&t2).for_each(|(u, v)| *u -= v);
        a.mul_vec_t(&t1, y);
        mean.mul_vec(&t1, &mut t2);
        y.iter_mut().zip(&t2).for_each(|(u, v)| *u -= v);
        Ok(())
    };
    let r = largest_eigenpairs(n, 1, op, &opts.lanczos(), false)?;
    Ok(r.values[0].max(0.0).sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct TopEigenpair {
    pub lambda0: f64,
    /// Unit vector with `⟨v₀, 𝟏⟩ ≥ 0`.
    pub v0: Vec<f64>,
    /// `‖v₀ − n^{-1/2}𝟏‖₂`.
    pub eigvec_dev: f64,
    pub iterations: usize,
}

/// Dominant real eigenpair of a nonnegative matrix.
///
/// Power iteration runs on `A + I`; the shift keeps the Perron root strictly
/// dominant even when `A` is periodic, e.g. bipartite.
pub fn top_eigenpair(a: &SparseBinaryMatrix, opts: &SpectralOptions) -> Result<TopEigenpair> {
    opts.validate()?;
    let n = require_square(a)?;
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut av = vec![0.0; n];
    for it in 1..=opts.max_iter {
        a.mul_vec(&v, &mut av);
        let lambda: f64 = v.iter().zip(&av).map(|(x, y)| x * y).sum();
        let res = av.iter().zip(&v).map(|(y, x)| (y - lambda * x).powi(2)).sum::<f64>().sqrt();
        if res <= opts.tol * lambda.abs().max(f64::MIN_POSITIVE) || (res == 0.0) {
            let s: f64 = v.iter().sum();
            if s < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            let c = 1.0 / (n as f64).sqrt();
            let eigvec_dev = v.iter().map(|x| (x - c).powi(2)).sum::<f64>().sqrt();
            return Ok(TopEigenpair {
                lambda0: lambda,
                v0: v,
                eigvec_dev,
                iterations: it,
            });
        }
        let mut norm = 0.0;
        for (x, y) in v.iter_mut().zip(&av) {
            *x += y;
            norm += *x * *x;
        }
        let norm = norm.sqrt();
        if norm == 0.0 || !norm.is_finite() {
            break;
        }
        v.iter_mut().for_each(|x| *x /= norm);
    }
    Err(Error::NotConverged {
        what: "power iteration",
        iterations: opts.max_iter,
    })
}

/// `‖A⁻¹‖_HS` from `n` solves against one LU factorization.
pub fn hs_norm_inverse(a: &SparseBinaryMatrix) -> Result<f64> {
    let n = require_square(a)?;
    if certify_singularity(a) != Singularity::Invertible {
        return Err(Error::Singular);
    }
    let lu = Lu::factor(a)?;
    let mut total = 0.0;
    let mut e = vec![0.0; n];
    for k in 0..n {
        e.iter_mut().for_each(|x| *x = 0.0);
        e[k] = 1.0;
        lu.solve_in_place(&mut e)?;
        total += e.iter().map(|x| x * x).sum::<f64>();
    }
    Ok(total.sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    pub s_min: f64,
    pub s2: f64,
    pub s_max: f64,
    pub centered_norm: f64,
    #[serde(with = "crate::serde_inf")]
    pub sigma: f64,
    #[serde(with = "crate::serde_inf")]
    pub sigma_tilde: f64,
    /// Missing when power iteration did not converge or was not requested.
    #[serde(with = "crate::serde_inf::option")]
    pub lambda0: Option<f64>,
    #[serde(with = "crate::serde_inf::option")]
    pub eigvec_dev: Option<f64>,
    pub singular_exact: Singularity,
}

impl SpectralSummary {
    pub fn extremes(&self) -> SingularExtremes {
        SingularExtremes {
            s_min: self.s_min,
            s2: self.s2,
            s_max: self.s_max,
        }
    }
}

/// Everything in [`SpectralSummary`] for one sampled matrix.
pub fn summarize(a: &SparseBinaryMatrix, model: &GraphModel, opts: &SpectralOptions, eigenpair: bool) -> Result<SpectralSummary> {
    let exact = certify_singularity(a);
    let ext = singular_extremes_with(a, opts, Some(exact))?;
    let (sigma, sigma_tilde) = condition_numbers(&ext, exact);
    let centered_norm = centered_operator_norm(a, model, opts)?;
    let top = if eigenpair { top_eigenpair(a, opts).ok() } else { None };
    Ok(SpectralSummary {
        s_min: ext.s_min,
        s2: ext.s2,
        s_max: ext.s_max,
        centered_norm,
        sigma,
        sigma_tilde,
        lambda0: top.as_ref().map(|t| t.lambda0),
        eigvec_dev: top.as_ref().map(|t| t.eigvec_dev),
        singular_exact: exact,
    })
}
