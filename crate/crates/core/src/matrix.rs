//! Compressed 0/1 matrices.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A 0/1 matrix stored as sorted row supports plus the matching column index.
///
/// Both indices describe the same set of positions; the structure is
/// immutable once built, so the two views can never drift apart.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SparseBinaryMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    col_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl SparseBinaryMatrix {
    /// Build from one support list per row. Lists may arrive unsorted;
    /// duplicates and out-of-range indices are rejected.
    pub fn from_row_supports(rows: usize, cols: usize, supports: Vec<Vec<usize>>) -> Result<Self> {
        if supports.len() != rows {
            return Err(Error::Dimension(format!(
                "{} row supports for {} rows",
                supports.len(),
                rows
            )));
        }
        let mut row_ptr = Vec::with_capacity(rows + 1);
        row_ptr.push(0);
        let mut row_idx = Vec::with_capacity(supports.iter().map(Vec::len).sum());
        for (i, mut support) in supports.into_iter().enumerate() {
            support.sort_unstable();
            for w in support.windows(2) {
                if w[0] == w[1] {
                    return Err(Error::param(format!("duplicate entry ({}, {})", i, w[0])));
                }
            }
            if let Some(&last) = support.last() {
                if last >= cols {
                    return Err(Error::param(format!(
                        "column index {last} out of range in row {i} ({cols} columns)"
                    )));
                }
            }
            row_idx.extend_from_slice(&support);
            row_ptr.push(row_idx.len());
        }
        Ok(Self::from_csr(rows, cols, row_ptr, row_idx))
    }

    /// Build from `(row, col)` positions, 0-indexed.
    pub fn from_entries<I>(rows: usize, cols: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut supports = vec![Vec::new(); rows];
        for (i, j) in entries {
            if i >= rows {
                return Err(Error::param(format!(
                    "row index {i} out of range ({rows} rows)"
                )));
            }
            supports[i].push(j);
        }
        Self::from_row_supports(rows, cols, supports)
    }

    /// Caller guarantees sorted, in-range, duplicate-free rows.
    pub(crate) fn from_csr(rows: usize, cols: usize, row_ptr: Vec<usize>, row_idx: Vec<usize>) -> Self {
        let mut counts = vec![0usize; cols + 1];
        for &j in &row_idx {
            counts[j + 1] += 1;
        }
        for j in 0..cols {
            counts[j + 1] += counts[j];
        }
        let col_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0usize; row_idx.len()];
        for i in 0..rows {
            for &j in &row_idx[row_ptr[i]..row_ptr[i + 1]] {
                col_idx[next[j]] = i;
                next[j] += 1;
            }
        }
        Self {
            rows,
            cols,
            row_ptr,
            row_idx,
            col_ptr,
            col_idx,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_csr(rows, cols, vec![0; rows + 1], Vec::new())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_csr(n, n, (0..=n).collect(), (0..n).collect())
    }

    pub fn ones(rows: usize, cols: usize) -> Self {
        let row_ptr = (0..=rows).map(|i| i * cols).collect();
        let row_idx = (0..rows).flat_map(|_| 0..cols).collect();
        Self::from_csr(rows, cols, row_ptr, row_idx)
    }

    /// Rounds every entry of a dense matrix to 0/1; anything nonzero is a 1.
    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let supports = (0..m.nrows())
            .map(|i| (0..m.ncols()).filter(|&j| m[(i, j)] != 0.0).collect())
            .collect();
        Self::from_row_supports(m.nrows(), m.ncols(), supports).expect("dense supports are valid")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    /// Sorted column indices of the ones in row `i`.
    pub fn row(&self, i: usize) -> &[usize] {
        &self.row_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    /// Sorted row indices of the ones in column `j`.
    pub fn col(&self, j: usize) -> &[usize] {
        &self.col_idx[self.col_ptr[j]..self.col_ptr[j + 1]]
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.row(i).binary_search(&j).is_ok()
    }

    /// Row-major iterator over the positions of the ones.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.rows).flat_map(move |i| self.row(i).iter().map(move |&j| (i, j)))
    }

    pub fn transpose(&self) -> Self {
        Self {
            rows: self.cols,
            cols: self.rows,
            row_ptr: self.col_ptr.clone(),
            row_idx: self.col_idx.clone(),
            col_ptr: self.row_ptr.clone(),
            col_idx: self.row_idx.clone(),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| self.row(i) == self.col(i))
    }

    /// Copy with one additional entry; a no-op if it is already present.
    pub fn with_entry(&self, i: usize, j: usize) -> Result<Self> {
        if i >= self.rows || j >= self.cols {
            return Err(Error::param(format!("entry ({i}, {j}) out of range")));
        }
        let mut supports: Vec<Vec<usize>> = (0..self.rows).map(|r| self.row(r).to_vec()).collect();
        if let Err(pos) = supports[i].binary_search(&j) {
            supports[i].insert(pos, j);
        }
        Self::from_row_supports(self.rows, self.cols, supports)
    }

    /// `out = A x`.
    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().map(|&j| x[j]).sum();
        }
    }

    /// `out = Aᵀ x`.
    pub fn mul_vec_t(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        for (j, o) in out.iter_mut().enumerate() {
            *o = self.col(j).iter().map(|&i| x[i]).sum();
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for (i, j) in self.entries() {
            m[(i, j)] = 1.0;
        }
        m
    }

    /// Row-major dense copy.
    pub fn to_row_major(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rows * self.cols];
        for (i, j) in self.entries() {
            out[i * self.cols + j] = 1.0;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn views_agree() {
        let a = SparseBinaryMatrix::from_entries(3, 4, [(0, 1), (2, 3), (0, 3), (1, 1)]).unwrap();
        assert_eq!(a.row(0), &[1, 3]);
        assert_eq!(a.col(1), &[0, 1]);
        assert_eq!(a.col(3), &[0, 2]);
        assert!(a.col(0).is_empty());
        assert_eq!(a.nnz(), 4);
        let t = a.transpose();
        assert_eq!(t.rows(), 4);
        assert_eq!(t.row(3), &[0, 2]);
        assert_eq!(t.transpose(), a);
    }

    #[test]
    fn rejects_duplicates_and_out_of_range() {
        assert!(SparseBinaryMatrix::from_entries(2, 2, [(0, 0), (0, 0)]).is_err());
        assert!(SparseBinaryMatrix::from_entries(2, 2, [(0, 2)]).is_err());
        assert!(SparseBinaryMatrix::from_entries(2, 2, [(2, 0)]).is_err());
    }

    #[test]
    fn matvec_matches_dense() {
        let a = SparseBinaryMatrix::from_entries(2, 3, [(0, 0), (0, 2), (1, 1)]).unwrap();
        let mut y = [0.0; 2];
        a.mul_vec(&[1.0, 2.0, 3.0], &mut y);
        assert_eq!(y, [4.0, 2.0]);
        let mut z = [0.0; 3];
        a.mul_vec_t(&[1.0, 5.0], &mut z);
        assert_eq!(z, [1.0, 5.0, 1.0]);
        assert_eq!(SparseBinaryMatrix::from_dense(&a.to_dense()), a);
    }
}
