//! Seeded randomness.
//!
//! Every random choice in the crate goes through [`Rng`], a xoshiro256++
//! generator seeded through SplitMix64 (the `rand_xoshiro` seeding routine).
//! The derived operations are pinned here so they can be reproduced in any
//! language:
//!
//! * `uniform()` = `(next_u64 >> 11) * 2^-53`, a double in `[0, 1)`.
//! * `below(n)` = Lemire's multiply-shift with rejection on the low word.
//! * `shuffle` = Fisher–Yates from the last index down, `j = below(i + 1)`.
//! * `derive_seed(seed, stream)` = SplitMix64 finalizer of
//!   `seed ^ (stream + 1) * 0x9E3779B97F4A7C15`.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

#[derive(Debug, Clone)]
pub struct Rng {
    inner: Xoshiro256PlusPlus,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform double in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform double in `[lo, hi)`.
    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Unbiased integer in `[0, n)`. `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        let n = n as u64;
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = (self.next_u64() as u128) * (n as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as usize;
            }
        }
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    /// Poisson draw by sequential inversion; large rates are split into
    /// chunks of at most 30 so `exp(-rate)` never underflows.
    pub fn poisson(&mut self, rate: f64) -> u64 {
        let mut remaining = rate;
        let mut total = 0u64;
        while remaining > 0.0 {
            let lambda = if remaining > 30.0 { 30.0 } else { remaining };
            remaining -= lambda;
            let mut k = 0u64;
            let mut p = libm::exp(-lambda);
            let mut cdf = p;
            let u = self.uniform();
            while u > cdf {
                k += 1;
                p *= lambda / k as f64;
                cdf += p;
                if p < 1e-300 && k as f64 > lambda {
                    break;
                }
            }
            total += k;
        }
        total
    }
}

/// Independent child seed for stream `stream` of `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn same_seed_same_stream() {
        let a: Vec<u64> = {
            let mut r = Rng::new(7);
            (0..8).map(|_| r.next_u64()).collect()
        };
        let mut r = Rng::new(7);
        let b: Vec<u64> = (0..8).map(|_| r.next_u64()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn below_stays_in_range() {
        let mut r = Rng::new(1);
        for n in 1..50 {
            for _ in 0..50 {
                assert!(r.below(n) < n);
            }
        }
    }

    #[test]
    fn uniform_in_unit_interval() {
        let mut r = Rng::new(3);
        for _ in 0..10_000 {
            let u = r.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn poisson_mean_is_close_to_rate() {
        let mut r = Rng::new(11);
        for &rate in &[0.5, 4.0, 75.0] {
            let n = 20_000;
            let sum: u64 = (0..n).map(|_| r.poisson(rate)).sum();
            let mean = sum as f64 / n as f64;
            // 5 standard errors
            assert!((mean - rate).abs() < 5.0 * libm::sqrt(rate / n as f64), "{rate} {mean}");
        }
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
        assert_eq!(derive_seed(9, 4), derive_seed(9, 4));
    }
}
