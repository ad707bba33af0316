//! Counter-based deterministic random numbers.
//!
//! Every draw is a pure function of `(seed, stream, counter)`, so parallel
//! consumers of randomness can each own a stream and produce identical
//! values regardless of scheduling or worker count.

/// The 64-bit finalizer used as the mixing function: one additive round of
/// the golden-ratio increment followed by two xor-multiply shuffles.
pub fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The raw 64-bit value for `(seed, stream, counter)`.
pub fn mix(seed: u64, stream: u64, counter: u64) -> u64 {
    let h = splitmix64(seed);
    let h = splitmix64(h ^ stream);
    splitmix64(h ^ counter)
}

/// A uniform draw in [0, 1) with 53 random mantissa bits.
pub fn u01(seed: u64, stream: u64, counter: u64) -> f64 {
    (mix(seed, stream, counter) >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
}

/// One logical stream of draws: a cursor over the counter dimension.
#[derive(Debug, Clone, Copy)]
pub struct StreamRng {
    seed: u64,
    stream: u64,
    counter: u64,
}

impl StreamRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        StreamRng {
            seed,
            stream,
            counter: 0,
        }
    }

    /// Next uniform draw in [0, 1).
    pub fn next_u01(&mut self) -> f64 {
        let v = u01(self.seed, self.stream, self.counter);
        self.counter += 1;
        v
    }

    /// Next uniform draw in [lo, hi).
    pub fn next_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_u01()
    }

    /// Bernoulli draw with success probability `p`.
    pub fn next_bool(&mut self, p: f64) -> bool {
        self.next_u01() < p
    }
}
