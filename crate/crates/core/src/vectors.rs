//! Vector classes used to split the unit sphere: sparse, compressible,
//! dominated and incompressible vectors, rank slicing, and an empirical
//! small-ball (Lévy concentration) estimator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const UNIT_TOLERANCE: f64 = 1e-12;

/// A vector together with the permutation sorting its magnitudes in
/// non-increasing order. Equal magnitudes keep ascending index order.
#[derive(Clone, Debug, PartialEq)]
pub struct RankedVector {
    x: Vec<f64>,
    /// `order[r]` is the coordinate of rank `r + 1`.
    order: Vec<usize>,
}

impl RankedVector {
    pub fn new(x: Vec<f64>) -> Self {
        let mut order: Vec<usize> = (0..x.len()).collect();
        // stable sort keeps ascending indices among ties
        order.sort_by(|&a, &b| x[b].abs().total_cmp(&x[a].abs()));
        Self { x, order }
    }

    pub fn values(&self) -> &[f64] {
        &self.x
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// `x_{[m1:m2]}`: `x` on the coordinates ranked `m1..=m2` (1-based), zero
    /// elsewhere.
    pub fn slice(&self, m1: usize, m2: usize) -> Result<Vec<f64>> {
        let n = self.x.len();
        if !(1 <= m1 && m1 <= m2 && m2 <= n) {
            return Err(Error::param(format!("rank slice [{m1}:{m2}] outside [1:{n}]")));
        }
        let mut out = vec![0.0; n];
        for &j in &self.order[m1 - 1..m2] {
            out[j] = self.x[j];
        }
        Ok(out)
    }

    /// `‖x_{[m+1:n]}‖₂`, the 2-norm of everything below the top `m` ranks.
    pub fn tail_norm(&self, m: usize) -> f64 {
        self.order.iter().skip(m).map(|&j| self.x[j] * self.x[j]).sum::<f64>().sqrt()
    }

    /// `‖x_{[m+1:n]}‖_∞`.
    pub fn tail_max(&self, m: usize) -> f64 {
        self.order.get(m).map_or(0.0, |&j| self.x[j].abs())
    }
}

pub fn slice_by_rank(x: &[f64], m1: usize, m2: usize) -> Result<Vec<f64>> {
    RankedVector::new(x.to_vec()).slice(m1, m2)
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn check_unit(x: &[f64]) -> Result<()> {
    let r = norm(x);
    if (r - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::param(format!("expected a unit vector, got norm {r}")));
    }
    Ok(())
}

fn check_m(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::param("sparsity level m must be positive"));
    }
    Ok(())
}

/// Euclidean distance from a unit vector to the `m`-sparse vectors.
pub fn distance_to_sparse(x: &[f64], m: usize) -> Result<f64> {
    check_unit(x)?;
    check_m(m)?;
    Ok(RankedVector::new(x.to_vec()).tail_norm(m))
}

pub fn is_compressible(x: &[f64], m: usize, delta: f64) -> Result<bool> {
    if !(delta > 0.0) {
        return Err(Error::param("delta must be positive"));
    }
    Ok(distance_to_sparse(x, m)? <= delta)
}

pub fn is_incompressible(x: &[f64], m: usize, delta: f64) -> Result<bool> {
    is_compressible(x, m, delta).map(|c| !c)
}

/// `‖x_{[m+1:n]}‖₂ ≤ α·√m·‖x_{[m+1:n]}‖_∞`.
pub fn is_dominated(x: &[f64], m: usize, alpha: f64) -> Result<bool> {
    check_unit(x)?;
    check_m(m)?;
    if !(alpha > 0.0) {
        return Err(Error::param("alpha must be positive"));
    }
    let r = RankedVector::new(x.to_vec());
    Ok(r.tail_norm(m) <= alpha * (m as f64).sqrt() * r.tail_max(m))
}

/// Which points are tried as ball centers by the Lévy estimator.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum LevyCenters {
    /// Every sample point plus the sample mean.
    #[default]
    SamplesAndMean,
    /// The default grid extended by caller-supplied centers.
    WithExtra(Vec<Vec<f64>>),
}

/// Empirical `sup_u P(‖Z − u‖₂ ≤ ε)` over a finite grid of centers.
pub fn levy_concentration_estimate(samples: &[Vec<f64>], eps: f64, centers: &LevyCenters) -> Result<f64> {
    let first = samples
        .first()
        .ok_or_else(|| Error::param("Lévy estimate needs at least one sample"))?;
    if !(eps > 0.0) {
        return Err(Error::param("eps must be positive"));
    }
    let dim = first.len();
    if samples.iter().any(|s| s.len() != dim) {
        return Err(Error::Dimension("samples have differing lengths".into()));
    }
    let mut mean = vec![0.0; dim];
    for s in samples {
        for (m, v) in mean.iter_mut().zip(s) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= samples.len() as f64);

    let extra: &[Vec<f64>] = match centers {
        LevyCenters::SamplesAndMean => &[],
        LevyCenters::WithExtra(c) => c,
    };
    if extra.iter().any(|c| c.len() != dim) {
        return Err(Error::Dimension("center has wrong length".into()));
    }
    let eps2 = eps * eps;
    let covered = |u: &[f64]| {
        samples
            .iter()
            .filter(|s| s.iter().zip(u).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= eps2)
            .count()
    };
    let best = samples
        .iter()
        .chain(std::iter::once(&mean))
        .chain(extra)
        .map(|u| covered(u))
        .max()
        .unwrap_or(0);
    Ok(best as f64 / samples.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VectorClassParams {
    /// Sparsity level.
    pub m: usize,
    /// Compressibility radius.
    pub delta: f64,
    /// Domination constant.
    pub alpha: f64,
    /// Norm-event constant `K ≥ 1`.
    pub k: f64,
    /// Calibration knob in the `ℓ₀` formula.
    pub c_star: f64,
    /// Calibration knob in the `ρ` formula; must stay below `k`.
    pub c_tilde: f64,
}

impl Default for VectorClassParams {
    fn default() -> Self {
        Self {
            m: 1,
            delta: 0.1,
            alpha: 1.0,
            k: 2.0,
            c_star: 1.0,
            c_tilde: 0.1,
        }
    }
}

impl VectorClassParams {
    pub fn validate(&self) -> Result<()> {
        check_m(self.m)?;
        if !(self.delta > 0.0 && self.alpha > 0.0 && self.c_star > 0.0 && self.c_tilde > 0.0) {
            return Err(Error::param("delta, alpha, c_star and c_tilde must be positive"));
        }
        if !(self.k >= 1.0) {
            return Err(Error::param("K must be at least 1"));
        }
        if self.c_tilde >= self.k {
            return Err(Error::param("c_tilde must be smaller than K"));
        }
        Ok(())
    }
}

/// `ℓ₀ = ⌈log(c*/p) / log √(np)⌉` and `ρ = (c̃/K)^{2ℓ₀+1}`.
///
/// A ratio within 1e-12 (relative) of an integer is treated as that integer
/// before taking the ceiling.
pub fn compute_rho_ell0(n: usize, p: f64, params: &VectorClassParams) -> Result<(u32, f64)> {
    params.validate()?;
    let np = n as f64 * p;
    if !(np > 1.0) {
        return Err(Error::param(format!("np = {np} must exceed 1")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::param(format!("p = {p} must lie in (0, 1)")));
    }
    let numerator = (params.c_star / p).ln();
    if !(numerator > 0.0) {
        return Err(Error::param("c_star / p must exceed 1"));
    }
    let ratio = numerator / np.sqrt().ln();
    let nearest = ratio.round();
    let ratio = if (ratio - nearest).abs() <= 1e-12 * ratio.abs() { nearest } else { ratio };
    let ell0 = ratio.ceil() as u32;
    let rho = (params.c_tilde / params.k).powi(2 * ell0 as i32 + 1);
    Ok((ell0, rho))
}

/// `M₀ = n·√(log log n) / log n`.
pub fn spread_threshold(n: usize) -> f64 {
    let ln = (n as f64).ln();
    n as f64 * ln.ln().sqrt() / ln
}
