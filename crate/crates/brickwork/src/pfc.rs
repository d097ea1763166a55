//! The structural `P·F·C` composite: a keyed basis permutation `P`, a keyed
//! `±1` diagonal phase `F`, and a random Clifford `C`, applied in the order
//! `C`, then `F`, then `P`.
//!
//! Only the structure is reproduced here; the keyed round functions are plain
//! 64-bit mixing hashes and no cryptographic security is claimed.

use serde::{Deserialize, Serialize};

use crate::clifford::{sample_random_clifford, CliffordElement};
use crate::error::{Error, Result};
use crate::rng::{mix64, RngStream};

/// A keyed Feistel permutation on `n`-bit strings: 4 rounds, balanced split
/// for even `n` and a `⌈n/2⌉ / ⌊n/2⌋` split for odd `n`. The round function
/// is a keyed 64-bit mixing hash truncated to the half width.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeistelPermutation {
    pub n_bits: usize,
    pub key: u64,
}

pub const FEISTEL_ROUNDS: usize = 4;

impl FeistelPermutation {
    pub fn new(n_bits: usize, key: u64) -> Result<Self> {
        if n_bits == 0 || n_bits > 63 {
            return Err(Error::InvalidInput(format!("Feistel width {n_bits} outside 1..=63")));
        }
        Ok(Self { n_bits, key })
    }

    fn halves(&self) -> (usize, usize) {
        let hi = self.n_bits.div_ceil(2); // left/high half, ⌈n/2⌉ bits
        (hi, self.n_bits - hi)
    }

    fn round_fn(&self, round: usize, input: u64, width: usize) -> u64 {
        let mixed = mix64(self.key ^ mix64(round as u64) ^ input);
        if width == 0 {
            0
        } else {
            mixed & ((1u64 << width) - 1)
        }
    }

    pub fn forward(&self, x: u64) -> u64 {
        let (hi_bits, lo_bits) = self.halves();
        let lo_mask = if lo_bits == 0 { 0 } else { (1u64 << lo_bits) - 1 };
        let mut hi = x >> lo_bits;
        let mut lo = x & lo_mask;
        for round in 0..FEISTEL_ROUNDS {
            if round % 2 == 0 {
                hi ^= self.round_fn(round, lo, hi_bits);
            } else {
                lo ^= self.round_fn(round, hi, lo_bits);
            }
        }
        (hi << lo_bits) | lo
    }

    pub fn inverse(&self, y: u64) -> u64 {
        let (hi_bits, lo_bits) = self.halves();
        let lo_mask = if lo_bits == 0 { 0 } else { (1u64 << lo_bits) - 1 };
        let mut hi = y >> lo_bits;
        let mut lo = y & lo_mask;
        for round in (0..FEISTEL_ROUNDS).rev() {
            if round % 2 == 0 {
                hi ^= self.round_fn(round, lo, hi_bits);
            } else {
                lo ^= self.round_fn(round, hi, lo_bits);
            }
        }
        (hi << lo_bits) | lo
    }
}

/// `U = P · F · C` on `n` qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PfcUnitary {
    pub n: usize,
    pub clifford: CliffordElement,
    pub phase_key: u64,
    pub permutation: FeistelPermutation,
}

impl PfcUnitary {
    /// Derive all three components from a single key seed.
    pub fn from_key(n: usize, key_seed: u64) -> Result<Self> {
        if n == 0 || n > 20 {
            return Err(Error::SizeCap(format!("PFC composite supports 1..=20 qubits, got {n}")));
        }
        let mut rng = RngStream::with_stream(key_seed, 0x50fc).rng();
        let clifford = sample_random_clifford(n, &mut rng)?;
        Ok(Self {
            n,
            clifford,
            phase_key: mix64(key_seed ^ 0xf00d),
            permutation: FeistelPermutation::new(n, mix64(key_seed ^ 0x9e3d))?,
        })
    }

    /// The `±1` diagonal entry of `F` on basis string `x`.
    pub fn phase_sign(&self, x: u64) -> f64 {
        if mix64(self.phase_key ^ x) >> 63 == 1 {
            -1.0
        } else {
            1.0
        }
    }
}
