//! Deterministic sample streams.
//!
//! Every random quantity in the crate is a pure function of `(seed, key,
//! index)`. Point clouds come from a randomly shifted Kronecker sequence
//! (the `R_d` additive recurrence) evaluated in 64-bit fixed point, so the
//! `i`-th point can be produced independently of all others. That keeps
//! parallel evaluation order-independent and lets several estimators share
//! the same underlying points (common random numbers).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed and a path of keys.
pub fn derive_seed(seed: u64, keys: &[u64]) -> u64 {
    keys.iter().fold(mix64(seed), |acc, k| mix64(acc ^ mix64(*k)))
}

/// Seeded pseudo-random generator for the few places that need iid draws.
pub fn rng(seed: u64, keys: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, keys))
}

/// Stable 64-bit key for a string label (FNV-1a).
pub fn label_key(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Positive root of `x^(d+1) = x + 1`.
fn harmonious_ratio(d: usize) -> f64 {
    let p = (d + 1) as i32;
    let mut x = 1.5f64;
    for _ in 0..64 {
        let f = x.powi(p) - x - 1.0;
        let df = p as f64 * x.powi(p - 1) - 1.0;
        x -= f / df;
    }
    x
}

/// Randomly shifted `R_d` low-discrepancy stream on `[0,1)^d`.
#[derive(Clone, Debug)]
pub struct QmcStream {
    step: Vec<u64>,
    shift: Vec<u64>,
}

impl QmcStream {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim > 0, "stream dimension must be positive");
        let g = harmonious_ratio(dim);
        let step = (1..=dim)
            .map(|j| {
                let a = (1.0 / g.powi(j as i32)).fract();
                (a * TWO_POW_64) as u64
            })
            .collect();
        let mut r = ChaCha8Rng::seed_from_u64(mix64(seed));
        let shift = (0..dim).map(|_| r.gen::<u64>()).collect();
        QmcStream { step, shift }
    }

    pub fn dim(&self) -> usize {
        self.step.len()
    }

    /// Writes the `i`-th point of the stream into `out`.
    pub fn fill(&self, i: u64, out: &mut [f64]) {
        let k = i.wrapping_add(1);
        for ((o, s), a) in out.iter_mut().zip(&self.shift).zip(&self.step) {
            let v = s.wrapping_add(k.wrapping_mul(*a));
            // top 53 bits give an exactly representable value in [0,1)
            *o = (v >> 11) as f64 / (1u64 << 53) as f64;
        }
    }

    pub fn point(&self, i: u64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.fill(i, &mut out);
        out
    }
}

/// `count` index triples `[i, j, k]` below `len`, drawn uniformly.
pub fn index_triples(len: usize, count: usize, seed: u64) -> Vec<[usize; 3]> {
    if len == 0 {
        return Vec::new();
    }
    let mut r = rng(seed, &[]);
    (0..count).map(|_| [r.gen_range(0..len), r.gen_range(0..len), r.gen_range(0..len)]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_ratio_in_one_dimension() {
        let g = harmonious_ratio(1);
        assert!((g - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn stream_is_deterministic_and_uniform() {
        let a = QmcStream::new(2, 7);
        let b = QmcStream::new(2, 7);
        assert_eq!(a.point(12345), b.point(12345));
        let n = 1 << 14;
        // fraction of points in the quarter disc should be close to pi/4
        let mut hits = 0;
        for i in 0..n {
            let p = a.point(i);
            assert!(p.iter().all(|c| (0.0..1.0).contains(c)));
            if p[0] * p[0] + p[1] * p[1] < 1.0 {
                hits += 1;
            }
        }
        let frac = hits as f64 / n as f64;
        assert!((frac - std::f64::consts::FRAC_PI_4).abs() < 2e-3, "{frac}");
    }

    #[test]
    fn different_seeds_shift_differently() {
        assert_ne!(QmcStream::new(3, 1).point(0), QmcStream::new(3, 2).point(0));
        assert_ne!(derive_seed(1, &[2]), derive_seed(1, &[3]));
    }
}
