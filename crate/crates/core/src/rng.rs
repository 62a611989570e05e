//! Counter-based random number generation for reproducible simulation.
//!
//! Every output is a pure function of `(key, counter)`: the generator walks a
//! Weyl sequence and finalizes it with the SplitMix64 mixer. Independent
//! substreams are derived from a `(tag, index)` pair, so parallel workers can
//! draw from disjoint streams without sharing state and a run is
//! bit-reproducible for a given seed regardless of worker count.
//!
//! Not cryptographically secure; simulation use only.

use num_complex::Complex64;
use std::f64::consts::TAU;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic counter-based RNG with cheap substream derivation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterRng {
    key: u64,
    ctr: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self {
            key: mix64(seed ^ GOLDEN),
            ctr: 0,
        }
    }

    /// Derive an independent stream identified by `(tag, index)`. Does not
    /// advance `self`; deriving the same pair twice yields the same stream.
    pub fn substream(&self, tag: u64, index: u64) -> Self {
        let token = mix64(tag.wrapping_mul(GOLDEN) ^ index.wrapping_add(GOLDEN));
        Self {
            key: mix64(self.key ^ token),
            ctr: 0,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.ctr = self.ctr.wrapping_add(1);
        mix64(self.key.wrapping_add(self.ctr.wrapping_mul(GOLDEN)))
    }

    /// Uniform in [0, 1) with 53-bit resolution.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform phase in [0, 2π).
    #[inline]
    pub fn next_phase(&mut self) -> f64 {
        TAU * self.next_f64()
    }

    /// Zero-mean circularly-symmetric complex Gaussian with E|w|² = `variance`
    /// (squared modulus exponential, phase uniform).
    pub fn next_cgauss(&mut self, variance: f64) -> Complex64 {
        if variance == 0.0 {
            // consume the same number of draws so downstream streams align
            let _ = self.next_u64();
            let _ = self.next_u64();
            return Complex64::new(0.0, 0.0);
        }
        let u = 1.0 - self.next_f64(); // (0, 1]
        let r = (-u.ln() * variance).sqrt();
        Complex64::from_polar(r, self.next_phase())
    }
}
