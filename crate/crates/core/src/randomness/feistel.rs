//! Balanced-ish Feistel network over an `n`-bit index.

use serde::{Deserialize, Serialize};

/// splitmix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Keyed 64-bit pseudorandom function.
#[inline]
pub fn keyed_mix(key: u64, x: u64) -> u64 {
    mix64(key ^ mix64(x.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

/// Luby-Rackoff network. The index is split into a high half `L` of
/// `ceil(n/2)` bits and a low half `R` of `floor(n/2)` bits. Even rounds
/// update `L ^= F_r(R)`, odd rounds `R ^= F_r(L)`; every round is an
/// involution, so the inverse runs the rounds backwards.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeistelNetwork {
    n: u32,
    round_keys: Vec<u64>,
}

impl FeistelNetwork {
    pub fn new(n: u32, round_keys: Vec<u64>) -> Self {
        FeistelNetwork { n, round_keys }
    }

    pub fn rounds(&self) -> usize {
        self.round_keys.len()
    }

    pub fn round_keys(&self) -> &[u64] {
        &self.round_keys
    }

    #[inline]
    fn right_bits(&self) -> u32 {
        self.n / 2
    }

    #[inline]
    fn left_bits(&self) -> u32 {
        self.n - self.n / 2
    }

    /// Apply a single round (its own inverse).
    #[inline]
    pub fn round(&self, r: usize, x: usize) -> usize {
        let wr = self.right_bits();
        let wl = self.left_bits();
        let rmask = (1u64 << wr) - 1;
        let lmask = (1u64 << wl) - 1;
        let x = x as u64;
        let mut right = x & rmask;
        let mut left = x >> wr;
        let key = self.round_keys[r];
        if r.is_multiple_of(2) {
            left ^= keyed_mix(key, right) & lmask;
        } else {
            right ^= keyed_mix(key, left) & rmask;
        }
        ((left << wr) | right) as usize
    }

    #[inline]
    pub fn forward(&self, x: usize) -> usize {
        (0..self.rounds()).fold(x, |acc, r| self.round(r, acc))
    }

    #[inline]
    pub fn inverse(&self, y: usize) -> usize {
        (0..self.rounds()).rev().fold(y, |acc, r| self.round(r, acc))
    }
}
