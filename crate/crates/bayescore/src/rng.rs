//! Counter-based, splittable pseudo-random number generator.
//!
//! Output at position `ctr` is a SplitMix64-style bit-mix of
//! `key + ctr * GOLDEN`, so the stream is a pure function of
//! `(seed, stream, counter)`: identical seeds reproduce identical draw
//! sequences, and [`Rng::split`] derives statistically independent
//! streams (one per Markov chain) without any shared state.

use crate::math;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic random number generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rng {
    key: u64,
    ctr: u64,
}

impl Rng {
    /// Generator for the given seed, stream 0.
    pub fn new(seed: u64) -> Self {
        Rng {
            key: mix(seed ^ GOLDEN),
            ctr: 0,
        }
    }

    /// Independent stream derived from this generator's key.
    ///
    /// Streams with distinct indices never share outputs; the parent is
    /// left untouched, so chains can be split up front and run in any
    /// order (or in parallel) with identical results.
    pub fn split(&self, stream: u64) -> Self {
        Rng {
            key: mix(self.key ^ mix(stream.wrapping_add(1).wrapping_mul(GOLDEN))),
            ctr: 0,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let out = mix(self.key.wrapping_add(self.ctr.wrapping_mul(GOLDEN)));
        self.ctr += 1;
        out
    }

    /// Uniform draw in the open interval (0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        // 53 significant bits, shifted into (0, 1): never exactly 0 or 1.
        (((self.next_u64() >> 11) as f64) + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform draw in [0, n).
    #[inline]
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        // Multiply-shift reduction; the modulo bias is < 2^-53 for our n.
        ((self.next_u64() >> 11) % n.max(1)) as u64
    }

    /// Standard normal draw (Box-Muller).
    pub fn standard_normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        math::sqrt(-2.0 * math::ln(u1)) * math::cos(2.0 * math::PI * u2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = Rng::new(42);
        let mut b = Rng::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn split_streams_are_disjoint_and_reproducible() {
        let root = Rng::new(7);
        let mut c0 = root.split(0);
        let mut c1 = root.split(1);
        let mut c0b = root.split(0);
        let mut overlap = 0;
        for _ in 0..1000 {
            let x = c0.next_u64();
            assert_eq!(x, c0b.next_u64());
            if x == c1.next_u64() {
                overlap += 1;
            }
        }
        assert_eq!(overlap, 0);
    }

    #[test]
    fn uniform_in_open_interval_with_sane_mean() {
        let mut rng = Rng::new(3);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let u = rng.uniform();
            assert!(u > 0.0 && u < 1.0);
            sum += u;
        }
        let mean = sum / n as f64;
        // 4 standard errors of a U(0,1) mean.
        assert!((mean - 0.5).abs() < 4.0 * (1.0 / 12.0f64).sqrt() / (n as f64).sqrt());
    }

    #[test]
    fn standard_normal_moments() {
        let mut rng = Rng::new(11);
        let n = 200_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let z = rng.standard_normal();
            s1 += z;
            s2 += z * z;
        }
        let mean = s1 / n as f64;
        let var = s2 / n as f64 - mean * mean;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt());
        assert!((var - 1.0).abs() < 4.0 * (2.0f64).sqrt() / (n as f64).sqrt());
    }
}
