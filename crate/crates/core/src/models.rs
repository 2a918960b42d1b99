//! Random adjacency-matrix ensembles and their mean matrices.

use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SparseBinaryMatrix;
use crate::rng::SeededRng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    /// Undirected Erdős–Rényi graph: symmetric, zero diagonal.
    #[serde(rename = "undirected", alias = "UndirectedER")]
    UndirectedEr,
    /// Directed Erdős–Rényi graph: each pair carries an edge with probability
    /// `2p`, oriented by a fair coin.
    #[serde(rename = "directed", alias = "DirectedER")]
    DirectedEr,
    /// The `n × n` biadjacency block of a random bipartite graph: i.i.d.
    /// Bernoulli entries, diagonal included.
    #[serde(rename = "bipartite", alias = "BipartiteBlock")]
    BipartiteBlock,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [
        ModelKind::UndirectedEr,
        ModelKind::DirectedEr,
        ModelKind::BipartiteBlock,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::UndirectedEr => "undirected",
            ModelKind::DirectedEr => "directed",
            ModelKind::BipartiteBlock => "bipartite",
        }
    }

    /// Whether matrix entries are i.i.d. (required by the zero-column formula).
    pub fn is_iid(self) -> bool {
        matches!(self, ModelKind::BipartiteBlock)
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "undirected" | "UndirectedER" => Ok(ModelKind::UndirectedEr),
            "directed" | "DirectedER" => Ok(ModelKind::DirectedEr),
            "bipartite" | "BipartiteBlock" => Ok(ModelKind::BipartiteBlock),
            other => Err(Error::param(format!("unknown model '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphModel {
    pub kind: ModelKind,
    pub n: usize,
    pub p: f64,
}

/// `EA` in closed form: `off_diagonal` everywhere except the diagonal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanMatrix {
    pub n: usize,
    pub off_diagonal: f64,
    pub diagonal: f64,
}

impl MeanMatrix {
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diagonal
        } else {
            self.off_diagonal
        }
    }

    /// `out = EA · x` in O(n).
    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        let total: f64 = x.iter().sum();
        let shift = self.diagonal - self.off_diagonal;
        for (o, &xi) in out.iter_mut().zip(x) {
            *o = self.off_diagonal * total + shift * xi;
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::param("n must be at least 1"));
    }
    Ok(())
}

fn check_p(p: f64, upper: f64) -> Result<()> {
    if !(p > 0.0 && p < upper) {
        return Err(Error::param(format!("p = {p} must lie in (0, {upper})")));
    }
    Ok(())
}

impl GraphModel {
    pub fn new(kind: ModelKind, n: usize, p: f64) -> Result<Self> {
        let model = Self { kind, n, p };
        model.validate()?;
        Ok(model)
    }

    /// Model with `np = log n + k`.
    pub fn with_offset(kind: ModelKind, n: usize, k: f64) -> Result<Self> {
        check_n(n)?;
        Self::new(kind, n, ((n as f64).ln() + k) / n as f64)
    }

    pub fn validate(&self) -> Result<()> {
        check_n(self.n)?;
        match self.kind {
            ModelKind::DirectedEr => check_p(self.p, 0.5),
            _ => check_p(self.p, 1.0),
        }
    }

    pub fn np(&self) -> f64 {
        self.n as f64 * self.p
    }

    pub fn sample(&self, rng: &SeededRng) -> Result<SparseBinaryMatrix> {
        match self.kind {
            ModelKind::UndirectedEr => sample_undirected(self.n, self.p, rng),
            ModelKind::DirectedEr => sample_directed(self.n, self.p, rng),
            ModelKind::BipartiteBlock => sample_bipartite_block(self.n, self.p, rng),
        }
    }

    pub fn expected_matrix(&self) -> MeanMatrix {
        expected_matrix(self)
    }
}

/// Positions in `lo..hi` that succeed under i.i.d. Bernoulli(`p`) trials,
/// generated by geometric skips.
fn bernoulli_positions<R: Rng>(rng: &mut R, geom: &Geometric, lo: usize, hi: usize, mut emit: impl FnMut(usize, &mut R)) {
    let mut pos = lo as u64;
    let hi = hi as u64;
    loop {
        pos = pos.saturating_add(geom.sample(rng));
        if pos >= hi {
            break;
        }
        emit(pos as usize, rng);
        pos += 1;
    }
}

fn geometric(p: f64) -> Geometric {
    Geometric::new(p).expect("probability validated in (0, 1)")
}

pub fn sample_undirected(n: usize, p: f64, rng: &SeededRng) -> Result<SparseBinaryMatrix> {
    check_n(n)?;
    check_p(p, 1.0)?;
    let geom = geometric(p);
    let mut supports = vec![Vec::new(); n];
    for i in 0..n {
        let mut r = rng.row(i);
        bernoulli_positions(&mut r, &geom, i + 1, n, |j, _| {
            supports[i].push(j);
            supports[j].push(i);
        });
    }
    SparseBinaryMatrix::from_row_supports(n, n, supports)
}

/// Pairs `i < j` carry an edge with probability `2p` (the pair indicator);
/// a fair coin then sends it to `(i, j)` or `(j, i)`.
pub fn sample_directed(n: usize, p: f64, rng: &SeededRng) -> Result<SparseBinaryMatrix> {
    check_n(n)?;
    check_p(p, 0.5)?;
    let geom = geometric(2.0 * p);
    let mut supports = vec![Vec::new(); n];
    for i in 0..n {
        let mut r = rng.row(i);
        bernoulli_positions(&mut r, &geom, i + 1, n, |j, r| {
            if r.random::<bool>() {
                supports[i].push(j);
            } else {
                supports[j].push(i);
            }
        });
    }
    SparseBinaryMatrix::from_row_supports(n, n, supports)
}

pub fn sample_bipartite_block(n: usize, p: f64, rng: &SeededRng) -> Result<SparseBinaryMatrix> {
    check_n(n)?;
    check_p(p, 1.0)?;
    let geom = geometric(p);
    let mut row_ptr = Vec::with_capacity(n + 1);
    row_ptr.push(0);
    let mut row_idx = Vec::new();
    for i in 0..n {
        let mut r = rng.row(i);
        bernoulli_positions(&mut r, &geom, 0, n, |j, _| row_idx.push(j));
        row_ptr.push(row_idx.len());
    }
    Ok(SparseBinaryMatrix::from_csr(n, n, row_ptr, row_idx))
}

pub fn expected_matrix(model: &GraphModel) -> MeanMatrix {
    let p = model.p;
    match model.kind {
        // DirectedEr: 2p · 1/2 per ordered pair.
        ModelKind::UndirectedEr | ModelKind::DirectedEr => MeanMatrix {
            n: model.n,
            off_diagonal: p,
            diagonal: 0.0,
        },
        ModelKind::BipartiteBlock => MeanMatrix {
            n: model.n,
            off_diagonal: p,
            diagonal: p,
        },
    }
}

/// Full `2n × 2n` adjacency `[[0, B], [Bᵀ, 0]]` of the bipartite graph whose
/// biadjacency block is `block`.
pub fn bipartite_full_adjacency(block: &SparseBinaryMatrix) -> SparseBinaryMatrix {
    let (m, n) = (block.rows(), block.cols());
    let entries = block
        .entries()
        .flat_map(|(i, j)| [(i, m + j), (m + j, i)]);
    SparseBinaryMatrix::from_entries(m + n, m + n, entries).expect("block entries are in range")
}
