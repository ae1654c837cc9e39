//! Deterministic random source.
//!
//! The generator is xoshiro256++ (Blackman & Vigna), seeded by expanding a
//! 64-bit seed through SplitMix64. Both algorithms are pure integer
//! arithmetic, so streams are bit-reproducible across platforms and process
//! invocations. Gaussian samples use the Box-Muller transform on 53-bit
//! uniforms. Independent streams come from [`RandomState::split`], which
//! seeds a child from the parent's output stream.

use crate::error::{Error, Result};
use crate::numerics::Vector;

/// Seedable xoshiro256++ stream. Identical seeds produce identical sample
/// sequences; one instance is owned by exactly one consumer at a time.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomState {
    s: [u64; 4],
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

impl RandomState {
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        RandomState {
            s: [
                splitmix64(&mut sm),
                splitmix64(&mut sm),
                splitmix64(&mut sm),
                splitmix64(&mut sm),
            ],
        }
    }

    /// Derives an independent child stream and advances this one.
    pub fn split(&mut self) -> RandomState {
        RandomState::new(self.next_u64())
    }

    /// Core xoshiro256++ step.
    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[0]
            .wrapping_add(self.s[3])
            .rotate_left(23)
            .wrapping_add(self.s[0]);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `(0, 1]`, safe as a logarithm argument.
    fn next_f64_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller; consumes two uniforms per sample.
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = self.next_f64_open();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Uniform index in `0..n` (Lemire multiply-shift; the residual bias of
    /// at most n/2^64 is irrelevant at desk scale).
    pub fn next_index(&mut self, n: usize) -> usize {
        assert!(n > 0, "next_index requires n > 0");
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }
}

/// Mean-zero i.i.d. Gaussian vector with per-coordinate standard deviation
/// `sigma`, advancing `rs`. `sigma == 0` returns the zero vector without
/// consuming randomness.
pub fn gaussian(rs: &mut RandomState, d: usize, sigma: f64) -> Result<Vector> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::invalid(format!(
            "gaussian standard deviation must be finite and >= 0, got {sigma}"
        )));
    }
    if d == 0 {
        return Err(Error::Empty("gaussian dimension"));
    }
    if sigma == 0.0 {
        return Ok(Vector::zeros(d));
    }
    Ok(Vector::from_raw(
        (0..d).map(|_| sigma * rs.next_gaussian()).collect(),
    ))
}
