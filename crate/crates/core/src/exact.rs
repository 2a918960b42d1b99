//! Exact comparisons between integer counts and products of floats.
//!
//! Thresholds such as `δ₀·n·p` are compared against support sizes without
//! rounding: the product is carried as a nonoverlapping floating-point
//! expansion (Shewchuk) and only its sign is inspected.

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bv = s - a;
    let av = s - bv;
    (s, (a - av) + (b - bv))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Exact real number as a sum of floats, smallest magnitude first.
#[derive(Clone, Debug)]
struct Expansion(Vec<f64>);

impl Expansion {
    fn from(x: f64) -> Self {
        Expansion(vec![x])
    }

    fn grow(&mut self, b: f64) {
        let mut q = b;
        let mut out = Vec::with_capacity(self.0.len() + 1);
        for &e in &self.0 {
            let (s, h) = two_sum(q, e);
            if h != 0.0 {
                out.push(h);
            }
            q = s;
        }
        out.push(q);
        self.0 = out;
    }

    fn scale(&self, b: f64) -> Self {
        let mut acc = Expansion(vec![0.0]);
        for &e in &self.0 {
            let (hi, lo) = two_prod(e, b);
            acc.grow(lo);
            acc.grow(hi);
        }
        acc
    }

    fn signum(&self) -> i8 {
        match self.0.iter().rev().find(|&&c| c != 0.0) {
            Some(&c) if c > 0.0 => 1,
            Some(_) => -1,
            None => 0,
        }
    }
}

/// `count ≤ ∏ factors`, evaluated exactly on the given float values.
pub fn count_le_product(count: usize, factors: &[f64]) -> bool {
    debug_assert!(factors.iter().all(|f| f.is_finite()));
    let mut prod = Expansion::from(1.0);
    for &f in factors {
        prod = prod.scale(f);
    }
    // sign(count - prod)
    prod = prod.scale(-1.0);
    prod.grow(count as f64);
    prod.signum() <= 0
}

/// `∏ factors ≤ bound`, evaluated exactly.
pub fn product_le(factors: &[f64], bound: f64) -> bool {
    let mut prod = Expansion::from(-1.0);
    for &f in factors {
        prod = prod.scale(f);
    }
    prod.grow(bound);
    prod.signum() >= 0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_boundary() {
        assert!(count_le_product(2, &[0.05, 100.0, 0.5]));
        assert!(!count_le_product(3, &[0.05, 100.0, 0.5]));
        // stored 0.1 is slightly above 1/10
        assert!(count_le_product(3, &[0.1, 30.0]));
        assert!(count_le_product(1, &[0.1, 10.0]));
        // stored 0.3 is slightly below 3/10, yet 10.0 * 0.3 rounds to 3.0
        assert_eq!(10.0 * 0.3, 3.0);
        assert!(!count_le_product(3, &[0.3, 10.0]));
        assert!(count_le_product(0, &[0.0]));
        assert!(!count_le_product(1, &[0.0, 5.0]));
        assert!(!product_le(&[10.0, 0.1], 1.0));
        assert!(product_le(&[10.0, 0.3], 3.0));
        assert!(product_le(&[2.0, 0.05], 0.1));
    }
}
