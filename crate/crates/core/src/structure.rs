//! Combinatorial audits of a realized 0/1 matrix: zero lines, light columns,
//! the folded matrix, the six typical-structure properties and the
//! single-entry row scan.
//!
//! Every threshold of the form `c·n·p` is compared exactly against integer
//! support sizes (see [`crate::exact`]). Light columns are always computed on
//! the matrix that is passed in.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{count_le_product, product_le};
use crate::matrix::SparseBinaryMatrix;
use crate::rng::SeededRng;

const EXHAUSTIVE_EXTENSION_MAX_N: usize = 20;
const MAX_EXTENSION_WITNESSES: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroLines {
    pub zero_rows: Vec<usize>,
    pub zero_cols: Vec<usize>,
    pub omega0: bool,
}

pub fn detect_zero_lines(a: &SparseBinaryMatrix) -> ZeroLines {
    let zero_rows: Vec<usize> = (0..a.rows()).filter(|&i| a.row(i).is_empty()).collect();
    let zero_cols: Vec<usize> = (0..a.cols()).filter(|&j| a.col(j).is_empty()).collect();
    let omega0 = !zero_rows.is_empty() || !zero_cols.is_empty();
    ZeroLines {
        zero_rows,
        zero_cols,
        omega0,
    }
}

/// Probability that an `n × n` matrix with i.i.d. Bernoulli(`p`) entries has
/// a zero column: `1 − (1 − (1−p)ⁿ)ⁿ`.
pub fn omega_col_probability(n: usize, p: f64) -> f64 {
    let n = n as f64;
    let q = (n * (-p).ln_1p()).exp();
    -(n * (-q).ln_1p()).exp_m1()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StructureParams {
    /// Light-column threshold δ₀ ∈ (0, 1/10).
    pub delta0: f64,
    /// Heavy row/column constant.
    pub c_heavy: f64,
    /// Bound on light columns touching one column.
    pub r0: usize,
    /// Subset sizes for the extension property run up to `c_ext / p`.
    pub c_ext: f64,
    /// Random subsets per size class for the extension property once
    /// `n > 20`; smaller matrices are checked exhaustively.
    pub n_sub: usize,
}

impl Default for StructureParams {
    fn default() -> Self {
        Self {
            delta0: 0.05,
            c_heavy: 10.0,
            r0: 20,
            c_ext: 0.1,
            n_sub: 200,
        }
    }
}

impl StructureParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta0 > 0.0 && self.delta0 < 0.1) {
            return Err(Error::param(format!("delta0 = {} must lie in (0, 0.1)", self.delta0)));
        }
        if !(self.c_heavy > 0.0 && self.c_heavy.is_finite()) {
            return Err(Error::param("c_heavy must be positive"));
        }
        if self.r0 == 0 {
            return Err(Error::param("r0 must be positive"));
        }
        if !(self.c_ext > 0.0 && self.c_ext.is_finite()) {
            return Err(Error::param("c_ext must be positive"));
        }
        Ok(())
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::param(format!("p = {p} must lie in (0, 1)")));
    }
    Ok(())
}

/// Columns whose support size is at most `δ₀·n·p`, with `n` the column count.
pub fn light_columns(a: &SparseBinaryMatrix, p: f64, params: &StructureParams) -> Vec<usize> {
    let n = a.cols() as f64;
    (0..a.cols())
        .filter(|&j| count_le_product(a.col(j).len(), &[params.delta0, n, p]))
        .collect()
}

/// `fold(B) = B₁ − B₂`, with `B₁`, `B₂` the first and next `⌊n/2⌋` rows.
///
/// Entries are ±1; zeros are not stored. A trailing odd row is dropped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldedMatrix {
    frows: usize,
    cols: usize,
    rows: Vec<Vec<(usize, i8)>>,
    col_support: Vec<Vec<usize>>,
}

impl FoldedMatrix {
    pub fn frows(&self) -> usize {
        self.frows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Nonzero `(column, ±1)` pairs of row `i`, sorted by column.
    pub fn row(&self, i: usize) -> &[(usize, i8)] {
        &self.rows[i]
    }

    /// Sorted rows where column `j` is nonzero.
    pub fn col_support(&self, j: usize) -> &[usize] {
        &self.col_support[j]
    }

    pub fn get(&self, i: usize, j: usize) -> i8 {
        match self.rows[i].binary_search_by_key(&j, |&(c, _)| c) {
            Ok(k) => self.rows[i][k].1,
            Err(_) => 0,
        }
    }

    /// `fold(A)·x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(j, s)| s as f64 * x[j]).sum())
            .collect()
    }
}

pub fn fold_matrix(a: &SparseBinaryMatrix) -> Result<FoldedMatrix> {
    if a.rows() < 2 {
        return Err(Error::param("folding needs at least two rows"));
    }
    let half = a.rows() / 2;
    let mut rows = Vec::with_capacity(half);
    let mut col_support = vec![Vec::new(); a.cols()];
    for i in 0..half {
        let (top, bottom) = (a.row(i), a.row(i + half));
        let mut merged = Vec::with_capacity(top.len() + bottom.len());
        let (mut s, mut t) = (0, 0);
        while s < top.len() || t < bottom.len() {
            match (top.get(s), bottom.get(t)) {
                (Some(&x), Some(&y)) if x == y => {
                    s += 1;
                    t += 1;
                }
                (Some(&x), Some(&y)) if x < y => {
                    merged.push((x, 1));
                    s += 1;
                }
                (Some(_), Some(&y)) => {
                    merged.push((y, -1));
                    t += 1;
                }
                (Some(&x), None) => {
                    merged.push((x, 1));
                    s += 1;
                }
                (None, Some(&y)) => {
                    merged.push((y, -1));
                    t += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        for &(j, _) in &merged {
            col_support[j].push(i);
        }
        rows.push(merged);
    }
    Ok(FoldedMatrix {
        frows: half,
        cols: a.cols(),
        rows,
        col_support,
    })
}

pub fn fold_vector(y: &[f64]) -> Result<Vec<f64>> {
    if y.len() < 2 {
        return Err(Error::param("folding needs a vector of length at least 2"));
    }
    let half = y.len() / 2;
    Ok((0..half).map(|i| y[i] - y[i + half]).collect())
}

/// Violation witnesses; every list is empty when its property holds.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StructureWitnesses {
    /// Property 1: rows and columns with more than `C·np` ones.
    pub heavy_rows: Vec<usize>,
    pub heavy_cols: Vec<usize>,
    /// Property 2: pairs of light columns sharing a row.
    pub overlapping_light_pairs: Vec<(usize, usize)>,
    /// Property 3: `(column, number of light columns touching it)`.
    pub crowded_cols: Vec<(usize, usize)>,
    /// Property 4: `(normal column, overlap with light fold supports)`.
    pub normal_light_overlaps: Vec<(usize, usize)>,
    /// Property 5: violating subsets (first few) with their overlap excess.
    pub extension_violations: Vec<(Vec<usize>, usize)>,
    pub extension_subsets_checked: usize,
    pub extension_subsets_violated: usize,
    /// Property 6: `(column, | |supp col(A)| − |supp col(fold A)| |)`.
    pub fold_size_gaps: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructuralReport {
    pub n: usize,
    pub p: f64,
    pub params: StructureParams,
    pub zero_rows: Vec<usize>,
    pub zero_cols: Vec<usize>,
    pub omega0: bool,
    pub light_cols: Vec<usize>,
    pub prop1_no_heavy: bool,
    pub prop2_light_disjoint: bool,
    pub prop3_bounded_multiplicity: bool,
    pub prop4_normal_light_overlap: bool,
    pub prop5_extension: bool,
    pub prop6_fold_support_gap: bool,
    pub witnesses: StructureWitnesses,
}

impl StructuralReport {
    pub fn properties(&self) -> [bool; 6] {
        [
            self.prop1_no_heavy,
            self.prop2_light_disjoint,
            self.prop3_bounded_multiplicity,
            self.prop4_normal_light_overlap,
            self.prop5_extension,
            self.prop6_fold_support_gap,
        ]
    }

    pub fn all_properties(&self) -> bool {
        self.properties().iter().all(|&b| b)
    }
}

/// Evaluate the six typical-structure properties with the configured
/// constants. `rng` drives the subset sample of the extension property when
/// `n > 20`.
pub fn check_typical_structure(
    a: &SparseBinaryMatrix,
    p: f64,
    params: &StructureParams,
    rng: &SeededRng,
) -> Result<StructuralReport> {
    check_p(p)?;
    params.validate()?;
    if !a.is_square() {
        return Err(Error::Dimension(format!("{}x{} matrix is not square", a.rows(), a.cols())));
    }
    let n = a.cols();
    let nf = n as f64;
    let zero = detect_zero_lines(a);
    let light = light_columns(a, p, params);
    let mut is_light = vec![false; n];
    for &j in &light {
        is_light[j] = true;
    }
    let mut w = StructureWitnesses::default();

    // (1) no heavy rows or columns
    let heavy = |count: usize| !count_le_product(count, &[params.c_heavy, nf, p]);
    w.heavy_rows = (0..a.rows()).filter(|&i| heavy(a.row(i).len())).collect();
    w.heavy_cols = (0..n).filter(|&j| heavy(a.col(j).len())).collect();

    // (2) light columns have disjoint supports
    let mut light_by_row: Vec<Vec<usize>> = vec![Vec::new(); a.rows()];
    for &j in &light {
        for &i in a.col(j) {
            light_by_row[i].push(j);
        }
    }
    let mut pairs = Vec::new();
    for cols in &light_by_row {
        for (s, &x) in cols.iter().enumerate() {
            for &y in &cols[s + 1..] {
                pairs.push((x, y));
            }
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    w.overlapping_light_pairs = pairs;

    // (3) bounded number of light columns touching any column
    let mut seen = vec![usize::MAX; n];
    for j in 0..n {
        let mut count = 0;
        for &i in a.col(j) {
            for &l in &light_by_row[i] {
                if seen[l] != j {
                    seen[l] = j;
                    count += 1;
                }
            }
        }
        if count > params.r0 {
            w.crowded_cols.push((j, count));
        }
    }

    // (4), (5), (6) are statements about the folded matrix
    let fold = fold_matrix(a)?;
    let mut touched_by_light = vec![false; fold.frows()];
    for &l in &light {
        for &i in fold.col_support(l) {
            touched_by_light[i] = true;
        }
    }
    let slack16 = params.delta0 / 16.0;
    for j in (0..n).filter(|&j| !is_light[j]) {
        let overlap = fold.col_support(j).iter().filter(|&&i| touched_by_light[i]).count();
        if !count_le_product(overlap, &[slack16, nf, p]) {
            w.normal_light_overlaps.push((j, overlap));
        }
    }

    check_extension(&fold, p, params, rng, &mut w);

    for j in 0..n {
        let gap = a.col(j).len().abs_diff(fold.col_support(j).len());
        if !count_le_product(gap, &[params.delta0 / 8.0, nf, p]) {
            w.fold_size_gaps.push((j, gap));
        }
    }

    Ok(StructuralReport {
        n,
        p,
        params: *params,
        zero_rows: zero.zero_rows,
        zero_cols: zero.zero_cols,
        omega0: zero.omega0,
        light_cols: light,
        prop1_no_heavy: w.heavy_rows.is_empty() && w.heavy_cols.is_empty(),
        prop2_light_disjoint: w.overlapping_light_pairs.is_empty(),
        prop3_bounded_multiplicity: w.crowded_cols.is_empty(),
        prop4_normal_light_overlap: w.normal_light_overlaps.is_empty(),
        prop5_extension: w.extension_subsets_violated == 0,
        prop6_fold_support_gap: w.fold_size_gaps.is_empty(),
        witnesses: w,
    })
}

/// Largest subset size `s ≤ n` with `s·p ≤ c_ext`.
fn extension_max_size(n: usize, p: f64, c_ext: f64) -> usize {
    let (mut lo, mut hi) = (0usize, n);
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if product_le(&[mid as f64, p], c_ext) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo
}

/// Excess overlap `Σ|supp| − |∪ supp|` of the fold columns in `subset`.
fn union_excess(fold: &FoldedMatrix, subset: &[usize], marks: &mut [u32], stamp: u32) -> usize {
    let mut total = 0;
    let mut union = 0;
    for &j in subset {
        for &i in fold.col_support(j) {
            total += 1;
            if marks[i] != stamp {
                marks[i] = stamp;
                union += 1;
            }
        }
    }
    total - union
}

fn check_extension(
    fold: &FoldedMatrix,
    p: f64,
    params: &StructureParams,
    rng: &SeededRng,
    w: &mut StructureWitnesses,
) {
    let n = fold.cols();
    let max_size = extension_max_size(n, p, params.c_ext);
    if max_size < 2 {
        return;
    }
    let nf = n as f64;
    let slack = params.delta0 / 16.0;
    let mut marks = vec![0u32; fold.frows()];
    let mut stamp = 0u32;
    let mut visit = |subset: &[usize], w: &mut StructureWitnesses| {
        stamp = stamp.wrapping_add(1);
        if stamp == 0 {
            marks.iter_mut().for_each(|m| *m = 0);
            stamp = 1;
        }
        let excess = union_excess(fold, subset, &mut marks, stamp);
        w.extension_subsets_checked += 1;
        if !count_le_product(excess, &[slack, nf, p, subset.len() as f64]) {
            w.extension_subsets_violated += 1;
            if w.extension_violations.len() < MAX_EXTENSION_WITNESSES {
                w.extension_violations.push((subset.to_vec(), excess));
            }
        }
    };

    if n <= EXHAUSTIVE_EXTENSION_MAX_N {
        for mask in 1u32..(1u32 << n) {
            let size = mask.count_ones() as usize;
            if size < 2 || size > max_size {
                continue;
            }
            let subset: Vec<usize> = (0..n).filter(|&j| mask >> j & 1 == 1).collect();
            visit(&subset, w);
        }
    } else {
        let mut r = rng.aux(0x5e7);
        for size in 2..=max_size {
            for _ in 0..params.n_sub {
                let mut subset = index::sample(&mut r, n, size).into_vec();
                subset.sort_unstable();
                visit(&subset, w);
            }
        }
    }
}

/// Rows `i ∈ [⌊n/2⌋] \ (J̄ ∪ J̄′)` of the fold with exactly one nonzero among
/// the columns `J`, no nonzero among the other columns of `J ∪ J′`, and no
/// nonzero in any light column. `J̄` collects the fold rows `j` with `j ∈ J`
/// or `j + ⌊n/2⌋ ∈ J`.
pub fn scan_single_entry_rows(
    fold: &FoldedMatrix,
    j_set: &[usize],
    jp_set: &[usize],
    light_cols: &[usize],
) -> Result<Vec<usize>> {
    let n = fold.cols();
    let half = fold.frows();
    let mut class = vec![0u8; n];
    const IN_J: u8 = 1;
    const IN_JP: u8 = 2;
    for &j in j_set {
        if j >= n {
            return Err(Error::param(format!("column {j} out of range")));
        }
        class[j] = IN_J;
    }
    for &j in jp_set {
        if j >= n {
            return Err(Error::param(format!("column {j} out of range")));
        }
        if class[j] == IN_J {
            return Err(Error::param(format!("J and J' both contain column {j}")));
        }
        class[j] = IN_JP;
    }
    let mut light = vec![false; n];
    for &j in light_cols {
        if j >= n {
            return Err(Error::param(format!("light column {j} out of range")));
        }
        light[j] = true;
    }
    let mut excluded = vec![false; half];
    for &j in j_set.iter().chain(jp_set) {
        if j < half {
            excluded[j] = true;
        } else if j < 2 * half {
            excluded[j - half] = true;
        }
    }

    Ok((0..half)
        .filter(|&i| !excluded[i])
        .filter(|&i| {
            let mut hits_j = 0;
            for &(j, _) in fold.row(i) {
                if light[j] || class[j] == IN_JP {
                    return false;
                }
                if class[j] == IN_J {
                    hits_j += 1;
                }
            }
            hits_j == 1
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::sample_bipartite_block;

    fn mat(n: usize, entries: &[(usize, usize)]) -> SparseBinaryMatrix {
        SparseBinaryMatrix::from_entries(n, n, entries.iter().copied()).unwrap()
    }

    #[test]
    fn zero_lines_examples() {
        let z = detect_zero_lines(&SparseBinaryMatrix::ones(3, 3));
        assert_eq!(z, ZeroLines { zero_rows: vec![], zero_cols: vec![], omega0: false });
        let z = detect_zero_lines(&SparseBinaryMatrix::zeros(2, 2));
        assert_eq!(z, ZeroLines { zero_rows: vec![0, 1], zero_cols: vec![0, 1], omega0: true });
        let z = detect_zero_lines(&mat(3, &[(0, 1), (1, 0), (1, 2)]));
        assert_eq!(z.zero_rows, vec![2]);
        assert!(z.zero_cols.is_empty());
        assert!(z.omega0);
    }

    /// P(zero column) by enumerating every n×n 0/1 matrix.
    fn enumerate_zero_column_probability(n: usize, p: f64) -> f64 {
        let cells = n * n;
        let mut total = 0.0;
        for bits in 0u64..(1 << cells) {
            let ones = bits.count_ones() as i32;
            let weight = p.powi(ones) * (1.0 - p).powi(cells as i32 - ones);
            let zero_col = (0..n).any(|j| (0..n).all(|i| bits >> (i * n + j) & 1 == 0));
            if zero_col {
                total += weight;
            }
        }
        total
    }

    #[test]
    fn omega_col_closed_form() {
        assert_eq!(omega_col_probability(7, 1.0), 0.0);
        assert!((omega_col_probability(1, 0.3) - 0.7).abs() < 1e-15);
        let oracle = enumerate_zero_column_probability(2, 0.5);
        assert!((oracle - 0.4375).abs() < 1e-15);
        assert!((omega_col_probability(2, 0.5) - 0.4375).abs() < 1e-15);
        for (n, p) in [(3, 0.2), (3, 0.7), (4, 0.35)] {
            let oracle = enumerate_zero_column_probability(n, p);
            assert!((omega_col_probability(n, p) - oracle).abs() < 1e-12, "{n} {p}");
        }
        // tiny p: 1 - (1 - q)^n with q ≈ 1 must not cancel to garbage
        let v = omega_col_probability(1000, 1e-12);
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn light_column_threshold() {
        let params = StructureParams { delta0: 0.05, ..Default::default() };
        let mut entries = vec![(0, 0), (1, 0), (0, 1), (1, 1), (2, 1)];
        entries.extend((0..100).map(|i| (i, 2)));
        let a = SparseBinaryMatrix::from_entries(100, 100, entries).unwrap();
        let light = light_columns(&a, 0.5, &params);
        // 2 ≤ 2.5 light, 3 > 2.5 normal, 100 normal, the 97 empty columns light
        assert!(light.contains(&0));
        assert!(!light.contains(&1));
        assert!(!light.contains(&2));
        assert_eq!(light.len(), 98);
        assert!(light_columns(&SparseBinaryMatrix::ones(10, 10), 0.5, &params).is_empty());
    }

    #[test]
    fn fold_vector_examples() {
        assert_eq!(fold_vector(&[1.0, 2.0, 3.0, 4.0]).unwrap(), vec![-2.0, -2.0]);
        assert_eq!(fold_vector(&[1.0, 2.0, 3.0, 4.0, 9.0]).unwrap(), vec![-2.0, -2.0]);
        assert!(fold_vector(&[1.0]).is_err());
    }

    #[test]
    fn fold_matrix_matches_dense_definition() {
        for seed in 0..20 {
            let n = 5 + seed as usize % 4;
            let a = sample_bipartite_block(n, 0.4, &SeededRng::new(seed, 0)).unwrap();
            let f = fold_matrix(&a).unwrap();
            assert_eq!(f.frows(), n / 2);
            for i in 0..n / 2 {
                for j in 0..n {
                    let expect = a.get(i, j) as i8 - a.get(i + n / 2, j) as i8;
                    assert_eq!(f.get(i, j), expect);
                }
                assert!(f.row(i).iter().all(|&(_, s)| s == 1 || s == -1));
            }
            for j in 0..n {
                let expect: Vec<usize> = (0..n / 2).filter(|&i| f.get(i, j) != 0).collect();
                assert_eq!(f.col_support(j), expect.as_slice());
            }
        }
        assert!(fold_matrix(&SparseBinaryMatrix::zeros(1, 3)).is_err());
    }

    #[test]
    fn identical_halves_fold_to_zero() {
        let a = mat(4, &[(0, 1), (2, 1), (1, 3), (3, 3)]);
        let f = fold_matrix(&a).unwrap();
        assert!((0..2).all(|i| f.row(i).is_empty()));
    }

    #[test]
    fn fold_norm_at_most_twice() {
        for seed in 0..30 {
            let a = sample_bipartite_block(9, 0.3, &SeededRng::new(seed, 1)).unwrap();
            let f = fold_matrix(&a).unwrap();
            let x: Vec<f64> = (0..9).map(|k| ((k * 7 + seed as usize) % 5) as f64 - 2.0).collect();
            let mut ax = vec![0.0; 9];
            a.mul_vec(&x, &mut ax);
            let norm = |v: &[f64]| v.iter().map(|t| t * t).sum::<f64>().sqrt();
            assert!(norm(&f.mul_vec(&x)) <= 2.0 * norm(&ax) + 1e-12);
        }
    }

    #[test]
    fn zero_matrix_satisfies_everything() {
        let params = StructureParams::default();
        for n in [6, 25] {
            let r = check_typical_structure(&SparseBinaryMatrix::zeros(n, n), 0.3, &params, &SeededRng::new(0, 0)).unwrap();
            assert!(r.all_properties(), "{r:?}");
            assert_eq!(r.light_cols.len(), n);
        }
    }

    #[test]
    fn cyclic_singletons_are_disjoint_light_columns() {
        let cyclic = |n: usize| SparseBinaryMatrix::from_entries(n, n, (0..n).map(|i| (i, (i + 1) % n))).unwrap();
        // n = 4: δ₀np < 1, so a singleton column is not light and prop 2 holds vacuously
        let r = check_typical_structure(&cyclic(4), 0.5, &StructureParams::default(), &SeededRng::new(0, 0)).unwrap();
        assert!(r.light_cols.is_empty());
        assert!(r.prop2_light_disjoint);
        // n = 40, p = 0.5, δ₀ = 0.09: δ₀np = 1.8, every singleton column is light
        let params = StructureParams { delta0: 0.09, ..Default::default() };
        let r = check_typical_structure(&cyclic(40), 0.5, &params, &SeededRng::new(0, 0)).unwrap();
        assert_eq!(r.light_cols.len(), 40);
        assert!(r.prop2_light_disjoint);
        assert!(r.prop3_bounded_multiplicity);
    }

    #[test]
    fn shared_row_breaks_light_disjointness() {
        // n = 40, p = 0.5, δ₀ = 0.09: light means at most 1.8 ones.
        let n = 40;
        let mut entries = vec![(0, 0), (0, 1)];
        for j in 2..n {
            entries.extend((0..n).map(|i| (i, j)));
        }
        let a = SparseBinaryMatrix::from_entries(n, n, entries).unwrap();
        let params = StructureParams { delta0: 0.09, ..Default::default() };
        let r = check_typical_structure(&a, 0.5, &params, &SeededRng::new(0, 0)).unwrap();
        assert_eq!(r.light_cols, vec![0, 1]);
        assert!(!r.prop2_light_disjoint);
        assert_eq!(r.witnesses.overlapping_light_pairs, vec![(0, 1)]);
    }

    #[test]
    fn heavy_and_gap_witnesses() {
        let n = 30;
        let a = SparseBinaryMatrix::ones(n, n);
        let params = StructureParams { c_heavy: 1.0, ..Default::default() };
        let r = check_typical_structure(&a, 0.5, &params, &SeededRng::new(0, 0)).unwrap();
        // 30 > 1 · 30 · 0.5 = 15
        assert!(!r.prop1_no_heavy);
        assert_eq!(r.witnesses.heavy_rows.len(), n);
        // every fold column is zero: the gap is 30 per column
        assert!(!r.prop6_fold_support_gap);
        assert_eq!(r.witnesses.fold_size_gaps[0], (0, 30));
    }

    fn brute_force_scan(f: &FoldedMatrix, j: &[usize], jp: &[usize], light: &[usize]) -> Vec<usize> {
        let half = f.frows();
        let in_bar = |i: usize, set: &[usize]| set.iter().any(|&c| c == i || c == i + half);
        (0..half)
            .filter(|&i| !in_bar(i, j) && !in_bar(i, jp))
            .filter(|&i| {
                let hits: Vec<usize> = j.iter().copied().filter(|&c| f.get(i, c).abs() == 1).collect();
                hits.len() == 1
                    && jp.iter().all(|&c| f.get(i, c) == 0)
                    && light.iter().all(|&c| f.get(i, c) == 0)
            })
            .collect()
    }

    #[test]
    fn scan_examples() {
        let a = mat(4, &[(0, 3)]);
        let f = fold_matrix(&a).unwrap();
        assert_eq!(scan_single_entry_rows(&f, &[3], &[], &[]).unwrap(), vec![0]);
        // J̄ contains row 1 because 3 = 1 + ⌊4/2⌋; row 0 survives
        let a = mat(4, &[(0, 2), (0, 3)]);
        let f = fold_matrix(&a).unwrap();
        assert!(scan_single_entry_rows(&f, &[2, 3], &[], &[]).unwrap().is_empty());
        assert!(scan_single_entry_rows(&f, &[1], &[1], &[]).is_err());
    }

    #[test]
    fn scan_matches_brute_force() {
        use rand::seq::SliceRandom;
        for seed in 0..200u64 {
            let a = sample_bipartite_block(12, 0.3, &SeededRng::new(seed, 9)).unwrap();
            let f = fold_matrix(&a).unwrap();
            let mut r = SeededRng::new(seed, 9).aux(1);
            let mut cols: Vec<usize> = (0..12).collect();
            cols.shuffle(&mut r);
            let j = &cols[..1 + seed as usize % 3];
            let jp = &cols[4..4 + seed as usize % 4];
            let light = light_columns(&a, 0.3, &StructureParams { delta0: 0.09, ..Default::default() });
            let got = scan_single_entry_rows(&f, j, jp, &light).unwrap();
            assert_eq!(got, brute_force_scan(&f, j, jp, &light), "seed {seed}");
        }
    }

    #[test]
    fn extension_max_size_is_exact() {
        assert_eq!(extension_max_size(100, 0.05, 0.1), 2);
        assert_eq!(extension_max_size(100, 0.5, 0.1), 0);
        assert_eq!(extension_max_size(5, 0.001, 0.1), 5);
        assert_eq!(extension_max_size(2000, (2000f64.ln() + 2.0) / 2000.0, 0.1), 20);
    }
}
