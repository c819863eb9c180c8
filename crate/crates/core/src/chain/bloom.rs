//! 2048-bit log bloom filter with three probes per entry.
//!
//! Probe `i` takes bytes `2i` and `2i+1` of `keccak256(entry)` as a
//! big-endian number modulo 2048. Bit `n` lives in byte `255 - n / 8`.

use std::fmt;

use crate::keccak::keccak256;

pub const BLOOM_BYTES: usize = 256;
pub const BLOOM_BITS: usize = BLOOM_BYTES * 8;
pub const BLOOM_PROBES: usize = 3;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bloom(pub [u8; BLOOM_BYTES]);

impl Default for Bloom {
    fn default() -> Self {
        Bloom([0; BLOOM_BYTES])
    }
}

impl fmt::Debug for Bloom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let set: u32 = self.0.iter().map(|b| b.count_ones()).sum();
        write!(f, "Bloom({set} bits set)")
    }
}

fn positions(entry: &[u8]) -> [usize; BLOOM_PROBES] {
    let d = keccak256(entry);
    std::array::from_fn(|i| (((d.0[2 * i] as usize) << 8) | d.0[2 * i + 1] as usize) % BLOOM_BITS)
}

fn locate(bit: usize) -> (usize, u8) {
    (BLOOM_BYTES - 1 - bit / 8, 1 << (bit % 8))
}

impl Bloom {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, entry: &[u8]) {
        for bit in positions(entry) {
            let (byte, mask) = locate(bit);
            self.0[byte] |= mask;
        }
    }

    /// Functional form of [`Bloom::insert`].
    pub fn with(mut self, entry: &[u8]) -> Bloom {
        self.insert(entry);
        self
    }

    /// False means definitely absent; true may be a false positive.
    pub fn contains(&self, entry: &[u8]) -> bool {
        positions(entry).into_iter().all(|bit| {
            let (byte, mask) = locate(bit);
            self.0[byte] & mask != 0
        })
    }

    pub fn accrue(&mut self, other: &Bloom) {
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a |= b;
        }
    }

    /// Every bit of `other` is set in `self`.
    pub fn covers(&self, other: &Bloom) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a & b == *b)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&b| b == 0)
    }
}
