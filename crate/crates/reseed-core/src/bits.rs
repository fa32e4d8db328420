//! Fixed-width bit vectors used for coverage rows and covered sets.
//!
//! The hot operations during training and campaigns are `union_with` and
//! `count_new_in` (popcount of `self & !other`), so the representation is a
//! plain `Vec<u64>` worked on word-at-a-time.

use std::fmt;

const WORD_BITS: usize = 64;

/// A fixed-length bit vector. Length is set at construction and all binary
/// operations require both operands to share it.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitSet {
    nbits: usize,
    words: Vec<u64>,
}

impl BitSet {
    pub fn new(nbits: usize) -> Self {
        BitSet {
            nbits,
            words: vec![0; nbits.div_ceil(WORD_BITS)],
        }
    }

    pub fn from_indices(nbits: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = BitSet::new(nbits);
        for i in indices {
            s.set(i);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.nbits
    }

    pub fn is_empty(&self) -> bool {
        self.nbits == 0
    }

    /// Sets bit `i`. Panics if out of range.
    pub fn set(&mut self, i: usize) {
        assert!(i < self.nbits, "bit {i} out of range ({})", self.nbits);
        self.words[i / WORD_BITS] |= 1u64 << (i % WORD_BITS);
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.nbits, "bit {i} out of range ({})", self.nbits);
        self.words[i / WORD_BITS] & (1u64 << (i % WORD_BITS)) != 0
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// In-place union. Panics on length mismatch (callers validate first).
    pub fn union_with(&mut self, other: &BitSet) {
        assert_eq!(self.nbits, other.nbits, "bitset length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    /// Number of bits set in `self` but not in `other`.
    pub fn count_new_in(&self, other: &BitSet) -> usize {
        assert_eq!(self.nbits, other.nbits, "bitset length mismatch");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & !b).count_ones() as usize)
            .sum()
    }

    /// Number of bits set in both.
    pub fn count_and(&self, other: &BitSet) -> usize {
        assert_eq!(self.nbits, other.nbits, "bitset length mismatch");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// `self & !other` as a fresh set.
    pub fn and_not(&self, other: &BitSet) -> BitSet {
        assert_eq!(self.nbits, other.nbits, "bitset length mismatch");
        BitSet {
            nbits: self.nbits,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & !b)
                .collect(),
        }
    }

    /// True if every set bit of `self` is also set in `other`.
    pub fn subset_of(&self, other: &BitSet) -> bool {
        assert_eq!(self.nbits, other.nbits, "bitset length mismatch");
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &BitSet) -> bool {
        assert_eq!(self.nbits, other.nbits, "bitset length mismatch");
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    /// Iterates over set bit indices in ascending order.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let tz = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD_BITS + tz)
                }
            })
        })
    }

    /// Raw little-endian bytes (LSB of byte 0 is bit 0). Trailing padding
    /// bits are always zero.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.nbits.div_ceil(8));
        for i in 0..self.nbits.div_ceil(8) {
            let w = self.words[i * 8 / WORD_BITS];
            out.push((w >> ((i * 8) % WORD_BITS)) as u8);
        }
        out
    }

    pub fn from_bytes(nbits: usize, bytes: &[u8]) -> Option<Self> {
        if bytes.len() != nbits.div_ceil(8) {
            return None;
        }
        let mut s = BitSet::new(nbits);
        for (i, &b) in bytes.iter().enumerate() {
            s.words[i * 8 / WORD_BITS] |= u64::from(b) << ((i * 8) % WORD_BITS);
        }
        // Reject padding bits beyond nbits.
        for i in nbits..s.words.len() * WORD_BITS {
            if s.words[i / WORD_BITS] & (1u64 << (i % WORD_BITS)) != 0 {
                return None;
            }
        }
        Some(s)
    }
}

impl fmt::Debug for BitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitSet({}/{})", self.count_ones(), self.nbits)
    }
}
