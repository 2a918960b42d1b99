//! Distance from a column to the span of the others, directly by
//! projection and through the quadratic form of the complementary block.
//!
//! Indices are 0-based. For the quadratic form the distinguished column is
//! column 0; `C` is the transpose of the block left after deleting row 0 and
//! column 0.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::lu::Lu;
use super::modular::{certify_singularity, exact_rank, Singularity};
use crate::error::{Error, Result};
use crate::matrix::SparseBinaryMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct DistanceInstance {
    pub a: SparseBinaryMatrix,
    pub c: SparseBinaryMatrix,
    /// Row 0 of `A` without `a₀₀`.
    pub x: Vec<f64>,
    /// Column 0 of `A` without `a₀₀`.
    pub y: Vec<f64>,
    pub a11: f64,
}

impl DistanceInstance {
    pub fn new(a: &SparseBinaryMatrix) -> Result<Self> {
        if !a.is_square() || a.rows() == 0 {
            return Err(Error::Dimension(format!("{}x{} matrix is not square and nonempty", a.rows(), a.cols())));
        }
        let n = a.rows() - 1;
        let mut x = vec![0.0; n];
        for &j in a.row(0).iter().filter(|&&j| j > 0) {
            x[j - 1] = 1.0;
        }
        let mut y = vec![0.0; n];
        for &i in a.col(0).iter().filter(|&&i| i > 0) {
            y[i - 1] = 1.0;
        }
        // C[j][i] = A[i+1][j+1]
        let entries = a.entries().filter(|&(i, j)| i > 0 && j > 0).map(|(i, j)| (j - 1, i - 1));
        let c = SparseBinaryMatrix::from_entries(n, n, entries)?;
        Ok(Self {
            a: a.clone(),
            c,
            x,
            y,
            a11: if a.get(0, 0) { 1.0 } else { 0.0 },
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DistanceKind {
    /// The distance itself.
    Exact,
    /// A lower bound on the distance (`C` singular).
    LowerBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceValue {
    pub value: f64,
    pub kind: DistanceKind,
}

/// Distance from column `j` of `A` to the span of its other columns, by
/// projection onto an orthonormal basis from a column-pivoted QR.
pub fn distance_column_to_span(a: &SparseBinaryMatrix, j: usize) -> Result<f64> {
    let (rows, cols) = (a.rows(), a.cols());
    if j >= cols {
        return Err(Error::Dimension(format!("column {j} out of range for {cols} columns")));
    }
    let mut b = DVector::zeros(rows);
    for &i in a.col(j) {
        b[i] = 1.0;
    }
    if cols == 1 {
        return Ok(b.norm());
    }
    let others: Vec<usize> = (0..cols).filter(|&k| k != j).collect();
    let sub = SparseBinaryMatrix::from_entries(
        rows,
        cols - 1,
        a.entries().filter(|&(_, k)| k != j).map(|(i, k)| (i, if k > j { k - 1 } else { k })),
    )?;
    let r = exact_rank(&sub);
    if r == 0 {
        return Ok(b.norm());
    }
    let m = DMatrix::from_fn(rows, others.len(), |i, k| if a.get(i, others[k]) { 1.0 } else { 0.0 });
    let q = m.col_piv_qr().q();
    let basis = q.columns(0, r);
    let mut res = b;
    for _ in 0..2 {
        let coef = basis.transpose() * &res;
        res -= basis * coef;
    }
    Ok(res.norm())
}

/// The same distance for column 0, from `C⁻¹x` when `C` is invertible and
/// otherwise a lower bound `‖P_Ker(C) y‖`.
pub fn distance_via_quadratic_form(inst: &DistanceInstance) -> Result<DistanceValue> {
    let n = inst.c.rows();
    if n == 0 {
        return Ok(DistanceValue {
            value: inst.a11.abs(),
            kind: DistanceKind::Exact,
        });
    }
    if certify_singularity(&inst.c) == Singularity::Invertible {
        let lu = Lu::factor(&inst.c)?;
        let mut u = inst.x.clone();
        lu.solve_in_place(&mut u)?;
        // two rounds of iterative refinement
        let mut cu = vec![0.0; n];
        for _ in 0..2 {
            inst.c.mul_vec(&u, &mut cu);
            let mut r: Vec<f64> = inst.x.iter().zip(&cu).map(|(a, b)| a - b).collect();
            lu.solve_in_place(&mut r)?;
            u.iter_mut().zip(&r).for_each(|(a, b)| *a += b);
        }
        let q: f64 = u.iter().zip(&inst.y).map(|(a, b)| a * b).sum();
        let norm2: f64 = u.iter().map(|v| v * v).sum();
        return Ok(DistanceValue {
            value: (q - inst.a11).abs() / (1.0 + norm2).sqrt(),
            kind: DistanceKind::Exact,
        });
    }
    let kernel_dim = n - exact_rank(&inst.c);
    let svd = inst.c.to_dense().svd(false, true);
    let vt = svd.v_t.expect("requested V");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &k| svd.singular_values[i].total_cmp(&svd.singular_values[k]));
    let y = DVector::from_column_slice(&inst.y);
    let value = order[..kernel_dim]
        .iter()
        .map(|&k| vt.row(k).transpose().dot(&y).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(DistanceValue {
        value,
        kind: DistanceKind::LowerBound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{GraphModel, ModelKind};
    use crate::rng::SeededRng;

    #[test]
    fn projection_examples() {
        assert!((distance_column_to_span(&SparseBinaryMatrix::identity(4), 0).unwrap() - 1.0).abs() < 1e-15);
        let dup = SparseBinaryMatrix::from_entries(3, 3, [(0, 0), (0, 1), (1, 0), (1, 1), (2, 2)]).unwrap();
        assert!(distance_column_to_span(&dup, 0).unwrap() < 1e-14);
        let a = SparseBinaryMatrix::from_entries(2, 2, [(0, 1), (1, 0), (1, 1)]).unwrap();
        assert!((distance_column_to_span(&a, 0).unwrap() - 0.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn quadratic_form_examples() {
        // [[0,1],[1,1]]
        let a = SparseBinaryMatrix::from_entries(2, 2, [(0, 1), (1, 0), (1, 1)]).unwrap();
        let inst = DistanceInstance::new(&a).unwrap();
        assert_eq!((inst.x.clone(), inst.y.clone(), inst.a11), (vec![1.0], vec![1.0], 0.0));
        let d = distance_via_quadratic_form(&inst).unwrap();
        assert_eq!(d.kind, DistanceKind::Exact);
        assert!((d.value - 0.5f64.sqrt()).abs() < 1e-15);
        // [[1,1],[1,0]]: C = [0]
        let a = SparseBinaryMatrix::from_entries(2, 2, [(0, 0), (0, 1), (1, 0)]).unwrap();
        let d = distance_via_quadratic_form(&DistanceInstance::new(&a).unwrap()).unwrap();
        assert_eq!(d.kind, DistanceKind::LowerBound);
        assert!((d.value - 1.0).abs() < 1e-15);
        assert!((distance_column_to_span(&a, 0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn instance_uses_transposed_block() {
        // A = [[0,0,0],[0,0,1],[0,0,0]]: block [[0,1],[0,0]], C = [[0,0],[1,0]]
        let a = SparseBinaryMatrix::from_entries(3, 3, [(1, 2)]).unwrap();
        let inst = DistanceInstance::new(&a).unwrap();
        assert!(inst.c.get(1, 0) && inst.c.nnz() == 1);
    }

    #[test]
    fn identity_holds_on_random_instances() {
        let mut exact = 0;
        for seed in 0..500u64 {
            let kind = ModelKind::ALL[seed as usize % 3];
            let model = GraphModel::new(kind, 10, 0.45).unwrap();
            let a = model.sample(&SeededRng::new(seed, 17)).unwrap();
            let d = distance_via_quadratic_form(&DistanceInstance::new(&a).unwrap()).unwrap();
            let oracle = distance_column_to_span(&a, 0).unwrap();
            match d.kind {
                DistanceKind::Exact => {
                    exact += 1;
                    assert!((d.value - oracle).abs() <= 1e-9 * oracle.max(1e-300) || (d.value - oracle).abs() < 1e-12, "seed {seed}: {} vs {oracle}", d.value);
                }
                DistanceKind::LowerBound => assert!(d.value <= oracle + 1e-8, "seed {seed}"),
            }
        }
        assert!(exact > 100);
    }
}
