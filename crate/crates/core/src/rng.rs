//! Deterministic counter-based random numbers for the Monte Carlo pieces.
//!
//! The generator is SplitMix64 used in counter mode: the n-th draw of stream
//! `s` under seed `k` is
//!
//! ```text
//! mix(k ^ (s * 0x9E3779B97F4A7C15) + n * 0x9E3779B97F4A7C15)
//! ```
//!
//! where `mix` is the SplitMix64 finalizer (Steele, Lea & Flood 2014).
//! Every draw is a pure function of `(seed, stream, counter)`, so independent
//! streams can be generated in any order — or concurrently — and always
//! produce the same values. Output is platform-independent at the integer
//! level. Not cryptographic.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One independent substream of the counter-based generator.
#[derive(Clone, Debug)]
pub struct Stream {
    key: u64,
    counter: u64,
}

impl Stream {
    /// Substream `stream` under `seed`. Streams with distinct ids are
    /// statistically independent.
    pub fn new(seed: u64, stream: u64) -> Self {
        Stream {
            key: seed ^ stream.wrapping_mul(GOLDEN),
            counter: 0,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let v = mix(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)));
        self.counter += 1;
        v
    }

    /// Uniform in [0, 1) with 53 significant bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Exponential with the given rate (events per unit time).
    pub fn exponential(&mut self, rate: f64) -> f64 {
        debug_assert!(rate > 0.0);
        -(1.0 - self.next_f64()).ln() / rate
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        let u1 = (1.0 - self.next_f64()).max(f64::MIN_POSITIVE);
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Bernoulli trial with probability `p`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Poisson sample; Knuth's product method for small means, rounded
    /// normal approximation above 30 (adequate for count-noise tests).
    pub fn poisson(&mut self, mean: f64) -> u64 {
        if mean <= 0.0 {
            return 0;
        }
        if mean < 30.0 {
            let limit = (-mean).exp();
            let mut product = self.next_f64();
            let mut count = 0u64;
            while product > limit {
                product *= self.next_f64();
                count += 1;
            }
            count
        } else {
            let v = mean + mean.sqrt() * self.normal();
            if v < 0.0 {
                0
            } else {
                v.round() as u64
            }
        }
    }
}
