//! Seedable PRNG with published constants and bit-exact cross-platform output.
//!
//! Replay evaluation must produce identical shuffles and exploration draws on
//! every platform and toolchain, so randomness never goes through the
//! platform default generator. The generator here is xoshiro256++ seeded
//! through SplitMix64, both with their published constants. Uniform index
//! sampling uses unbiased rejection, floats take the top 53 bits, and
//! Gaussian draws use Box-Muller, so every consumer of randomness in this
//! crate is pinned to one documented stream.

use serde::{Deserialize, Serialize};

/// SplitMix64 stream, used to expand a 64-bit seed into generator state.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

/// xoshiro256++ generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Xoshiro256PlusPlus {
    s: [u64; 4],
}

impl Xoshiro256PlusPlus {
    /// Seed the full 256-bit state from a 64-bit seed via SplitMix64.
    pub fn seed_from_u64(seed: u64) -> Self {
        let mut sm = SplitMix64::new(seed);
        Self {
            s: [sm.next_u64(), sm.next_u64(), sm.next_u64(), sm.next_u64()],
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.s;
        let result = s[0].wrapping_add(s[3]).rotate_left(23).wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform float in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)`, unbiased via rejection sampling.
    ///
    /// Panics if `n == 0`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0) is undefined");
        // 2^64 mod n; values under this threshold would bias the modulus.
        let threshold = n.wrapping_neg() % n;
        loop {
            let r = self.next_u64();
            if r >= threshold {
                return r % n;
            }
        }
    }

    /// Standard normal draw (Box-Muller, cosine branch; consumes two uniforms).
    pub fn next_gaussian(&mut self) -> f64 {
        // Shift u1 into (0, 1] so the log is finite.
        let u1 = ((self.next_u64() >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64);
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, slice: &mut [T]) {
        for i in (1..slice.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            slice.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference outputs frozen from an independent Python implementation of
    // the published SplitMix64 / xoshiro256++ algorithms.

    #[test]
    fn splitmix64_reference_vectors() {
        let mut sm = SplitMix64::new(0);
        assert_eq!(sm.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(sm.next_u64(), 0x6E78_9E6A_A1B9_65F4);
        assert_eq!(sm.next_u64(), 0x06C4_5D18_8009_454F);

        let mut sm = SplitMix64::new(42);
        assert_eq!(sm.next_u64(), 0xBDD7_3226_2FEB_6E95);
        assert_eq!(sm.next_u64(), 0x28EF_E333_B266_F103);
    }

    #[test]
    fn xoshiro_reference_vectors() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(0);
        assert_eq!(rng.next_u64(), 0x5317_5D61_490B_23DF);
        assert_eq!(rng.next_u64(), 0x61DA_6F3D_C380_D507);
        assert_eq!(rng.next_u64(), 0x5C0F_DF91_EC9A_7BFC);
        assert_eq!(rng.next_u64(), 0x02EE_BF8C_3BBE_5E1A);

        let mut rng = Xoshiro256PlusPlus::seed_from_u64(1);
        assert_eq!(rng.next_u64(), 0xCFC5_D07F_6F03_C29B);
        assert_eq!(rng.next_u64(), 0xBF42_4132_963F_E08D);
    }

    #[test]
    fn f64_reference_vectors() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(7);
        assert_eq!(rng.next_f64(), 0.05536043647833311);
        assert_eq!(rng.next_f64(), 0.17211585444811772);
        assert_eq!(rng.next_f64(), 0.7175761283586594);
        assert_eq!(rng.next_f64(), 0.42720981929150526);
    }

    #[test]
    fn f64_stays_in_unit_interval() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(99);
        for _ in 0..10_000 {
            let v = rng.next_f64();
            assert!((0.0..1.0).contains(&v));
        }
    }

    #[test]
    fn below_is_in_range() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(5);
        for n in 1..50u64 {
            for _ in 0..200 {
                assert!(rng.below(n) < n);
            }
        }
    }

    #[test]
    fn shuffle_reference_permutations() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(123);
        let mut v: Vec<usize> = (0..8).collect();
        rng.shuffle(&mut v);
        assert_eq!(v, vec![1, 7, 5, 0, 6, 3, 4, 2]);

        let mut rng = Xoshiro256PlusPlus::seed_from_u64(2026);
        let mut v: Vec<usize> = (0..5).collect();
        rng.shuffle(&mut v);
        assert_eq!(v, vec![2, 0, 1, 4, 3]);
    }

    #[test]
    fn gaussian_moments_are_sane() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(31);
        let n = 200_000;
        let draws: Vec<f64> = (0..n).map(|_| rng.next_gaussian()).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }
}
