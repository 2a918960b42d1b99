//! Exact rank of 0/1 matrices by Gaussian elimination over prime fields.
//!
//! Rank modulo a prime never exceeds the rational rank, so full rank modulo
//! any prime certifies invertibility. A matrix that is rank deficient modulo
//! two independent random primes near 2⁶² is declared singular; the chance
//! of that happening to an invertible matrix is below 2⁻⁶⁰.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::matrix::SparseBinaryMatrix;

/// Outcome of an exact invertibility check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Singularity {
    Invertible,
    Singular,
    Unknown,
}

/// Arithmetic modulo an odd prime below 2⁶³ in Montgomery form.
#[derive(Clone, Copy, Debug)]
pub struct Montgomery {
    modulus: u64,
    neg_inv: u64,
    r2: u64,
}

impl Montgomery {
    pub fn new(modulus: u64) -> Self {
        assert!(modulus % 2 == 1 && modulus < 1 << 63, "modulus must be odd and below 2^63");
        // Newton iteration for modulus⁻¹ mod 2⁶⁴
        let mut inv = modulus;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(modulus.wrapping_mul(inv)));
        }
        let r = ((1u128 << 64) % modulus as u128) as u64;
        let r2 = ((r as u128 * r as u128) % modulus as u128) as u64;
        Self {
            modulus,
            neg_inv: inv.wrapping_neg(),
            r2,
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    #[inline(always)]
    fn reduce(&self, t: u128) -> u64 {
        let m = (t as u64).wrapping_mul(self.neg_inv);
        let u = ((t + m as u128 * self.modulus as u128) >> 64) as u64;
        if u >= self.modulus {
            u - self.modulus
        } else {
            u
        }
    }

    #[inline(always)]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        self.reduce(a as u128 * b as u128)
    }

    #[inline(always)]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }

    pub fn to_mont(&self, a: u64) -> u64 {
        self.mul(a % self.modulus, self.r2)
    }

    pub fn from_mont(&self, a: u64) -> u64 {
        self.reduce(a as u128)
    }

    pub fn pow(&self, base: u64, mut exp: u64) -> u64 {
        let mut acc = self.to_mont(1);
        let mut b = base;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        acc
    }

    /// Inverse of a nonzero element, both in Montgomery form.
    pub fn inv(&self, a: u64) -> u64 {
        self.pow(a, self.modulus - 2)
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin; the first twelve prime bases are exact for
/// every 64-bit input.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'bases: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// A uniformly drawn prime in `[2⁶² − 2⁴⁰, 2⁶²)`.
pub fn random_prime_near_2_62<R: Rng>(rng: &mut R) -> u64 {
    let lo = (1u64 << 62) - (1u64 << 40);
    loop {
        let candidate = rng.random_range(lo..1u64 << 62) | 1;
        if is_prime(candidate) {
            return candidate;
        }
    }
}

/// The two primes used by [`certify_singularity`]; fixed per process so
/// results are reproducible.
pub fn default_primes() -> [u64; 2] {
    static PRIMES: OnceLock<[u64; 2]> = OnceLock::new();
    *PRIMES.get_or_init(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(0x0005_EED0_F262);
        let first = random_prime_near_2_62(&mut rng);
        let mut second = random_prime_near_2_62(&mut rng);
        while second == first {
            second = random_prime_near_2_62(&mut rng);
        }
        [first, second]
    })
}

/// Rank of a 0/1 matrix modulo `prime`.
///
/// Dense elimination that only touches the nonzero positions of each pivot
/// row, with the sparsest candidate row chosen as pivot to delay fill-in.
pub fn rank_mod(a: &SparseBinaryMatrix, prime: u64) -> usize {
    let field = Montgomery::new(prime);
    let (rows, cols) = (a.rows(), a.cols());
    if rows == 0 || cols == 0 {
        return 0;
    }
    let one = field.to_mont(1);
    let mut m = vec![0u64; rows * cols];
    let mut count = vec![0usize; rows];
    for (i, j) in a.entries() {
        m[i * cols + j] = one;
        count[i] += 1;
    }

    let mut rank = 0;
    let mut pivot_nz: Vec<usize> = Vec::with_capacity(cols);
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let pivot = (rank..rows)
            .filter(|&r| m[r * cols + col] != 0)
            .min_by_key(|&r| count[r]);
        let Some(pr) = pivot else { continue };
        if pr != rank {
            let (a_row, b_row) = (pr.min(rank), pr.max(rank));
            let (head, tail) = m.split_at_mut(b_row * cols);
            head[a_row * cols..(a_row + 1) * cols].swap_with_slice(&mut tail[..cols]);
            count.swap(pr, rank);
        }
        let (top, below) = m.split_at_mut((rank + 1) * cols);
        let prow = &top[rank * cols..];
        pivot_nz.clear();
        pivot_nz.extend((col + 1..cols).filter(|&j| prow[j] != 0));
        let inv = field.inv(prow[col]);

        for (offset, r) in below.chunks_exact_mut(cols).enumerate() {
            let v = r[col];
            if v == 0 {
                continue;
            }
            let f = field.mul(v, inv);
            r[col] = 0;
            let mut delta: isize = -1;
            for &j in &pivot_nz {
                let old = r[j];
                let new = field.sub(old, field.mul(f, prow[j]));
                delta += (old == 0) as isize - (new == 0) as isize;
                r[j] = new;
            }
            let c = &mut count[rank + 1 + offset];
            *c = (*c as isize + delta) as usize;
        }
        rank += 1;
    }
    rank
}

/// Largest prime below 2²⁰, for the fast first pass.
pub const SMALL_PRIME: u64 = 1_048_573;

/// Rank of a 0/1 matrix modulo a prime below 2²⁰, in exact f64 arithmetic.
///
/// Entries are reduced lazily: each update adds less than `p²` in absolute
/// value, so the trailing block is swept back into `[0, p)` only once every
/// `2⁵² / p²` pivots, and the inner loop is a plain multiply-subtract
/// (products stay below 2⁴⁰, so every operation is exact).
pub fn rank_mod_small(a: &SparseBinaryMatrix, prime: u64) -> usize {
    assert!(prime < 1 << 20 && prime > 2, "prime must lie in (2, 2^20)");
    let (rows, cols) = (a.rows(), a.cols());
    if rows == 0 || cols == 0 {
        return 0;
    }
    let p = prime as f64;
    let pinv = 1.0 / p;
    let reduce = |x: f64| -> f64 {
        let t = x - p * (x * pinv).floor();
        if t < 0.0 {
            t + p
        } else if t >= p {
            t - p
        } else {
            t
        }
    };
    let budget = ((1u64 << 52) / (prime * prime)).max(1) as usize;
    let mut m = vec![0.0f64; rows * cols];
    for (i, j) in a.entries() {
        m[i * cols + j] = 1.0;
    }
    let mut rank = 0;
    let mut since_sweep = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        if since_sweep >= budget {
            for x in m[rank * cols..].iter_mut() {
                *x = reduce(*x);
            }
            since_sweep = 0;
        }
        let mut pivot = None;
        for r in rank..rows {
            let v = reduce(m[r * cols + col]);
            m[r * cols + col] = v;
            if v != 0.0 && pivot.is_none() {
                pivot = Some(r);
            }
        }
        let Some(pr) = pivot else { continue };
        if pr != rank {
            let (head, tail) = m.split_at_mut(pr * cols);
            head[rank * cols..(rank + 1) * cols].swap_with_slice(&mut tail[..cols]);
        }
        let (top, below) = m.split_at_mut((rank + 1) * cols);
        let prow = &mut top[rank * cols..];
        for x in prow[col..].iter_mut() {
            *x = reduce(*x);
        }
        // scale the pivot row to a unit pivot so multipliers need no inverse
        let inv = pow_mod(prow[col] as u64, prime - 2, prime) as f64;
        for x in prow[col..].iter_mut() {
            *x = reduce(*x * inv);
        }
        let prow = &prow[col + 1..];
        for r in below.chunks_exact_mut(cols) {
            let f = r[col];
            if f == 0.0 {
                continue;
            }
            r[col] = 0.0;
            for (x, &u) in r[col + 1..].iter_mut().zip(prow) {
                *x -= f * u;
            }
        }
        rank += 1;
        since_sweep += 1;
    }
    rank
}

/// Best available lower bound on the rational rank: the larger of the ranks
/// modulo the two default primes (equal to the rational rank except with
/// probability below 2⁻⁶⁰).
pub fn exact_rank(a: &SparseBinaryMatrix) -> usize {
    let full = a.rows().min(a.cols());
    let r = rank_mod_small(a, SMALL_PRIME);
    if r == full {
        return r;
    }
    let [p, q] = default_primes();
    let r = r.max(rank_mod(a, p));
    if r == full {
        return r;
    }
    r.max(rank_mod(a, q))
}

/// Exact invertibility of a square 0/1 matrix.
///
/// A zero row or column settles the question immediately; otherwise full
/// rank modulo any prime certifies invertibility. The cheap small prime is
/// tried first, and only a deficient result there brings in the two large
/// primes that back a singular verdict.
pub fn certify_singularity(a: &SparseBinaryMatrix) -> Singularity {
    if !a.is_square() {
        return Singularity::Singular;
    }
    let n = a.rows();
    if (0..n).any(|i| a.row(i).is_empty() || a.col(i).is_empty()) {
        return Singularity::Singular;
    }
    if rank_mod_small(a, SMALL_PRIME) == n {
        return Singularity::Invertible;
    }
    let [p, q] = default_primes();
    if rank_mod(a, p) == n || rank_mod(a, q) == n {
        Singularity::Invertible
    } else {
        Singularity::Singular
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn montgomery_matches_u128() {
        let [p, _] = default_primes();
        let f = Montgomery::new(p);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let a = rng.random_range(0..p);
            let b = rng.random_range(0..p);
            let prod = f.from_mont(f.mul(f.to_mont(a), f.to_mont(b)));
            assert_eq!(prod, mul_mod(a, b, p));
            if a != 0 {
                let inv = f.from_mont(f.inv(f.to_mont(a)));
                assert_eq!(mul_mod(a, inv, p), 1);
            }
        }
    }

    #[test]
    fn primes_are_prime_and_near_2_62() {
        for p in default_primes() {
            assert!(is_prime(p));
            assert!(p < 1 << 62 && p > (1 << 62) - (1 << 40));
        }
        assert!(is_prime(2_305_843_009_213_693_951)); // 2^61 - 1
        assert!(!is_prime(2_305_843_009_213_693_953));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to 2, 3, 5, 7
    }

    #[test]
    fn small_certificates() {
        assert_eq!(certify_singularity(&SparseBinaryMatrix::identity(6)), Singularity::Invertible);
        let zero_row = SparseBinaryMatrix::from_entries(3, 3, [(0, 0), (1, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(certify_singularity(&zero_row), Singularity::Singular);
        let dup = SparseBinaryMatrix::from_entries(3, 3, [(0, 0), (0, 1), (1, 0), (1, 1), (2, 2)]).unwrap();
        assert_eq!(certify_singularity(&dup), Singularity::Singular);
        assert_eq!(exact_rank(&dup), 2);
        assert_eq!(exact_rank(&SparseBinaryMatrix::ones(4, 7)), 1);
        assert_eq!(exact_rank(&SparseBinaryMatrix::zeros(3, 3)), 0);
    }

    #[test]
    fn small_prime_rank_matches_montgomery_rank() {
        use crate::models::{GraphModel, ModelKind};
        use crate::rng::SeededRng;
        assert!(is_prime(SMALL_PRIME) && !(SMALL_PRIME + 1..1 << 20).any(is_prime));
        for seed in 0..40 {
            let kind = ModelKind::ALL[seed as usize % 3];
            let a = GraphModel::with_offset(kind, 90, -1.0 + (seed % 5) as f64).unwrap().sample(&SeededRng::new(seed, 1)).unwrap();
            assert_eq!(rank_mod_small(&a, SMALL_PRIME), rank_mod(&a, SMALL_PRIME), "seed {seed}");
        }
        // a tiny prime forces many lazy-reduction sweeps
        for seed in 0..40 {
            let a = GraphModel::new(ModelKind::BipartiteBlock, 40, 0.5).unwrap().sample(&SeededRng::new(seed, 2)).unwrap();
            assert_eq!(rank_mod_small(&a, 3), rank_mod(&a, 3), "seed {seed}");
            assert_eq!(rank_mod_small(&a, 1021), rank_mod(&a, 1021), "seed {seed}");
        }
    }

    #[test]
    fn rank_agrees_with_rational_elimination() {
        use crate::models::sample_bipartite_block;
        use crate::rng::SeededRng;
        for seed in 0..200 {
            let n = 2 + seed as usize % 7;
            let a = sample_bipartite_block(n, 0.35, &SeededRng::new(seed, 0)).unwrap();
            assert_eq!(exact_rank(&a), rational_rank(&a), "seed {seed}");
        }
    }

    /// Integer elimination with each row reduced by its gcd, exact for
    /// small matrices.
    fn rational_rank(a: &SparseBinaryMatrix) -> usize {
        fn gcd(a: i128, b: i128) -> i128 {
            if b == 0 { a.abs() } else { gcd(b, a % b) }
        }
        let (rows, cols) = (a.rows(), a.cols());
        let mut m: Vec<Vec<i128>> = (0..rows)
            .map(|i| (0..cols).map(|j| a.get(i, j) as i128).collect())
            .collect();
        let mut rank = 0;
        for col in 0..cols {
            let Some(pr) = (rank..rows).find(|&r| m[r][col] != 0) else { continue };
            m.swap(pr, rank);
            let (head, tail) = m.split_at_mut(rank + 1);
            let pivot = &head[rank];
            for row in tail {
                let (p, f) = (pivot[col], row[col]);
                for (x, &u) in row.iter_mut().zip(pivot) {
                    *x = p * *x - f * u;
                }
                let g = row.iter().fold(0, |g, &v| gcd(g, v));
                if g > 1 {
                    row.iter_mut().for_each(|v| *v /= g);
                }
            }
            rank += 1;
        }
        rank
    }
}
