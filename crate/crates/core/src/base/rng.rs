//! Seeded random streams.
//!
//! Algorithm version `chacha8-v1`: the 64-bit seed is expanded to a 256-bit
//! ChaCha8 key with SplitMix64, and the derived stream index selects the
//! ChaCha stream. On top of the raw `u64` output:
//!
//! * `uniform` takes the top 53 bits: `(u >> 11) · 2⁻⁵³`, giving `[0, 1)`;
//! * `symmetric` is `2·uniform − 1`;
//! * `normal` is the Box–Muller transform of two uniforms, both outputs used;
//! * `below(n)` is Lemire's multiply-and-reject on 64-bit words;
//! * sampling without replacement is a partial Fisher–Yates shuffle.
//!
//! Stored seeds reproduce bit-identical weights as long as this version
//! string is unchanged.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub const RNG_ALGORITHM: &str = "chacha8-v1";

#[derive(Clone, Debug)]
pub struct Rng {
    inner: ChaCha8Rng,
    spare_normal: Option<f64>,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self::derive(seed, 0)
    }

    /// Independent stream `stream` of generator `seed`.
    pub fn derive(seed: u64, stream: u64) -> Self {
        let mut state = seed;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut inner = ChaCha8Rng::from_seed(key);
        inner.set_stream(stream);
        Self {
            inner,
            spare_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[-1, 1)`.
    pub fn symmetric(&mut self) -> f64 {
        2.0 * self.uniform() - 1.0
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal draw.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // 1 - u lies in (0, 1], keeping the logarithm finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        self.spare_normal = Some(radius * angle.sin());
        radius * angle.cos()
    }

    /// Uniform integer in `0..n`; `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        let n = n as u64;
        let threshold = n.wrapping_neg() % n;
        loop {
            let product = (self.next_u64() as u128) * (n as u128);
            if (product as u64) >= threshold {
                return (product >> 64) as usize;
            }
        }
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    /// `k` distinct indices from `0..n` in draw order (`k ≤ n`).
    pub fn sample_without_replacement(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n, "cannot draw {k} distinct values from {n}");
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below(n - i);
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_seeds_equal_streams() {
        let mut a = Rng::new(1234);
        let mut b = Rng::new(1234);
        for _ in 0..10_000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut c = Rng::new(1235);
        let mut a = Rng::new(1234);
        assert!((0..8).any(|_| a.next_u64() != c.next_u64()));
    }

    #[test]
    fn derived_streams_differ() {
        let mut a = Rng::derive(7, 0);
        let mut b = Rng::derive(7, 1);
        assert!((0..8).any(|_| a.next_u64() != b.next_u64()));
    }

    #[test]
    fn distributions_in_support() {
        let mut r = Rng::new(3);
        let mut sum = 0.0;
        let mut sq = 0.0;
        let n = 20_000;
        for _ in 0..n {
            let u = r.uniform();
            assert!((0.0..1.0).contains(&u));
            let s = r.symmetric();
            assert!((-1.0..1.0).contains(&s));
            let z = r.normal();
            sum += z;
            sq += z * z;
            assert!(r.below(7) < 7);
        }
        let mean = sum / n as f64;
        let var = sq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.05, "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "var {var}");
    }

    #[test]
    fn sampling_is_distinct() {
        let mut r = Rng::new(9);
        for _ in 0..100 {
            let mut s = r.sample_without_replacement(10, 5);
            assert_eq!(s.len(), 5);
            s.sort_unstable();
            s.dedup();
            assert_eq!(s.len(), 5);
            assert!(s.iter().all(|&i| i < 10));
        }
        let mut all = r.sample_without_replacement(4, 4);
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2, 3]);
    }
}
