//! Seedable deterministic random stream.
//!
//! A 64-bit seed is expanded with splitmix64 into the 256-bit state of a
//! xoshiro256** generator (Blackman/Vigna). Both algorithms are fixed here
//! so that any consumer can reproduce the stream bit-for-bit from the seed
//! alone:
//!
//! - splitmix64: `x += 0x9e3779b97f4a7c15; z = x; z = (z ^ z>>30) * 0xbf58476d1ce4e5b9;
//!   z = (z ^ z>>27) * 0x94d049bb133111eb; return z ^ z>>31`
//! - xoshiro256**: `result = rotl(s1 * 5, 7) * 9` followed by the standard
//!   state transition with shifts 17/45.
//! - `next_f64` takes the top 53 bits: `(next_u64() >> 11) * 2^-53`.

/// Deterministic xoshiro256** stream seeded via splitmix64.
#[derive(Debug, Clone)]
pub struct Rng {
    state: [u64; 4],
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        let mut x = seed;
        let mut next = || {
            x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
            let mut z = x;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
            z ^ (z >> 31)
        };
        Rng {
            state: [next(), next(), next(), next()],
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.state;
        let result = s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform in [0, 1) with 53-bit resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in [0, n). Uses simple modulo rejection to stay unbiased.
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % n;
            }
        }
    }

    /// Fisher-Yates shuffle, back to front.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }

    /// Derive an independent stream for a sub-task; `salt` distinguishes streams.
    pub fn fork(&self, salt: u64) -> Rng {
        let mut base = self.clone();
        Rng::new(base.next_u64() ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Expected values computed with an independent implementation of the
    // published splitmix64/xoshiro256** algorithms.
    #[test]
    fn matches_reference_stream_seed_7() {
        let mut r = Rng::new(7);
        let got: Vec<u64> = (0..5).map(|_| r.next_u64()).collect();
        assert_eq!(
            got,
            vec![
                12923355070828475994,
                5142052590334782674,
                15488392906492639638,
                18098058644649177664,
                18278145976438096664,
            ]
        );
        let f: Vec<f64> = (0..3).map(|_| r.next_f64()).collect();
        assert_eq!(f[0], 0.872773938745132);
        assert_eq!(f[1], 0.060752079492816136);
        assert_eq!(f[2], 0.1044357892428116);
    }

    #[test]
    fn matches_reference_stream_seed_0() {
        let mut r = Rng::new(0);
        assert_eq!(r.next_u64(), 11091344671253066420);
        assert_eq!(r.next_u64(), 13793997310169335082);
        assert_eq!(r.next_u64(), 1900383378846508768);
    }

    #[test]
    fn below_is_in_range_and_deterministic() {
        let mut a = Rng::new(42);
        let mut b = Rng::new(42);
        for _ in 0..1000 {
            let x = a.below(13);
            assert!(x < 13);
            assert_eq!(x, b.below(13));
        }
    }

    #[test]
    fn shuffle_is_a_permutation() {
        let mut r = Rng::new(3);
        let mut v: Vec<usize> = (0..50).collect();
        r.shuffle(&mut v);
        let mut sorted = v.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn next_f64_in_unit_interval() {
        let mut r = Rng::new(99);
        for _ in 0..10_000 {
            let x = r.next_f64();
            assert!((0.0..1.0).contains(&x));
        }
    }
}
