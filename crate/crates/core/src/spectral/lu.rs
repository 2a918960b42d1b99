//! Dense LU factorization with partial pivoting, row-major.

use crate::error::{Error, Result};
use crate::matrix::SparseBinaryMatrix;

#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    /// Unit-lower `L` below the diagonal, `U` on and above it.
    lu: Vec<f64>,
    /// Row `k` of the factorization came from row `perm[k]` of the input.
    perm: Vec<usize>,
    zero_pivot: bool,
    min_pivot: f64,
}

impl Lu {
    pub fn factor(a: &SparseBinaryMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension(format!("{}x{} matrix is not square", a.rows(), a.cols())));
        }
        Ok(Self::factor_dense(a.rows(), a.to_row_major()))
    }

    pub fn factor_dense(n: usize, mut lu: Vec<f64>) -> Self {
        assert_eq!(lu.len(), n * n);
        let mut perm: Vec<usize> = (0..n).collect();
        let mut zero_pivot = false;
        let mut min_pivot = f64::INFINITY;
        for k in 0..n {
            let (mut best, mut best_abs) = (k, lu[k * n + k].abs());
            for r in k + 1..n {
                let v = lu[r * n + k].abs();
                if v > best_abs {
                    best = r;
                    best_abs = v;
                }
            }
            min_pivot = min_pivot.min(best_abs);
            if best_abs == 0.0 {
                zero_pivot = true;
                continue;
            }
            if best != k {
                let (head, tail) = lu.split_at_mut(best * n);
                head[k * n..(k + 1) * n].swap_with_slice(&mut tail[..n]);
                perm.swap(k, best);
            }
            let (top, below) = lu.split_at_mut((k + 1) * n);
            let pivot_row = &top[k * n..];
            let pivot = pivot_row[k];
            for row in below.chunks_exact_mut(n) {
                if row[k] == 0.0 {
                    continue;
                }
                let l = row[k] / pivot;
                row[k] = l;
                for (x, &u) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                    *x -= l * u;
                }
            }
        }
        Self {
            n,
            lu,
            perm,
            zero_pivot,
            min_pivot,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// An exactly zero pivot column was met; the solves are unavailable.
    pub fn has_zero_pivot(&self) -> bool {
        self.zero_pivot
    }

    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    fn check(&self, len: usize) -> Result<()> {
        if self.zero_pivot {
            return Err(Error::Singular);
        }
        if len != self.n {
            return Err(Error::Dimension(format!("rhs of length {len} for n = {}", self.n)));
        }
        Ok(())
    }

    /// Solve `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) -> Result<()> {
        self.check(b.len())?;
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: f64 = row.iter().zip(&x[..i]).map(|(l, v)| l * v).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n..(i + 1) * n];
            let s: f64 = row[i + 1..].iter().zip(&x[i + 1..]).map(|(u, v)| u * v).sum();
            x[i] = (x[i] - s) / row[i];
        }
        b.copy_from_slice(&x);
        Ok(())
    }

    /// Solve `Aᵀ x = b` in place.
    pub fn solve_transpose_in_place(&self, b: &mut [f64]) -> Result<()> {
        self.check(b.len())?;
        let n = self.n;
        // Aᵀ = Uᵀ Lᵀ P, so solve Uᵀ z = b, Lᵀ w = z, x = Pᵀ w.
        let mut z = b.to_vec();
        for i in 0..n {
            z[i] /= self.lu[i * n + i];
            let zi = z[i];
            let row = &self.lu[i * n..(i + 1) * n];
            for (t, &u) in z[i + 1..].iter_mut().zip(&row[i + 1..]) {
                *t -= u * zi;
            }
        }
        for i in (0..n).rev() {
            let zi = z[i];
            let row = &self.lu[i * n..i * n + i];
            for (t, &l) in z[..i].iter_mut().zip(row) {
                *t -= l * zi;
            }
        }
        for (k, &p) in self.perm.iter().enumerate() {
            b[p] = z[k];
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_systems() {
        // [[0,1,1],[1,1,0],[1,0,1]]
        let a = SparseBinaryMatrix::from_entries(3, 3, [(0, 1), (0, 2), (1, 0), (1, 1), (2, 0), (2, 2)]).unwrap();
        let lu = Lu::factor(&a).unwrap();
        assert!(!lu.has_zero_pivot());
        let x_true = [1.0, -2.0, 3.0];
        let mut b = vec![0.0; 3];
        a.mul_vec(&x_true, &mut b);
        lu.solve_in_place(&mut b).unwrap();
        for (x, t) in b.iter().zip(x_true) {
            assert!((x - t).abs() < 1e-14);
        }
        let mut c = vec![0.0; 3];
        a.mul_vec_t(&x_true, &mut c);
        lu.solve_transpose_in_place(&mut c).unwrap();
        for (x, t) in c.iter().zip(x_true) {
            assert!((x - t).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_column_reports_zero_pivot() {
        let a = SparseBinaryMatrix::from_entries(2, 2, [(0, 0), (1, 0)]).unwrap();
        let lu = Lu::factor(&a).unwrap();
        assert!(lu.has_zero_pivot());
        assert!(matches!(lu.solve_in_place(&mut [1.0, 1.0]), Err(Error::Singular)));
    }
}
