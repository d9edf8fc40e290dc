//! Counter-based pseudo-random numbers with a fully pinned algorithm, so seeded
//! fixtures come out bit-identical in any implementation.
//!
//! Algorithm:
//!
//! * The `k`-th raw word (`k = 0, 1, 2, ...`) of a stream with key `s` is
//!   `mix(s + (k + 1) * 0x9E3779B97F4A7C15)` with wrapping arithmetic, where
//!   `mix` is the SplitMix64 finalizer:
//!   `z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27; z *= 0x94D049BB133111EB; z ^= z >> 31`.
//! * A uniform double in `[0, 1)` is `(word >> 11) * 2^-53`.
//! * A complex standard Gaussian (`E|z|² = 1`) consumes two uniforms `u1, u2`:
//!   `r = sqrt(-ln(1 - u1))`, `θ = 2π u2`, `z = r (cos θ + i sin θ)`.
//! * A real standard Gaussian consumes two uniforms the same way and returns
//!   `sqrt(-2 ln(1 - u1)) cos(2π u2)`.
//! * Child streams use the key `mix(s ^ mix(stream + 0x632BE59BD9B4E019))`.

use num_complex::Complex64;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const STREAM_SALT: u64 = 0x632B_E59B_D9B4_E019;

/// 64-bit reproducibility token.
pub type Seed = u64;

#[inline]
fn mix(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: Seed) -> Self {
        Self {
            key: seed,
            counter: 0,
        }
    }

    /// Independent stream derived from `seed` and a stream index.
    pub fn stream(seed: Seed, stream: u64) -> Self {
        Self::new(Self::derive(seed, stream))
    }

    pub fn derive(seed: Seed, stream: u64) -> Seed {
        mix(seed ^ mix(stream.wrapping_add(STREAM_SALT)))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix(self
            .key
            .wrapping_add(self.counter.wrapping_mul(GOLDEN_GAMMA)))
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn complex_normal(&mut self) -> Complex64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-(1.0 - u1).ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        Complex64::new(r * theta.cos(), r * theta.sin())
    }

    /// Uniform integer in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0);
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }
}
