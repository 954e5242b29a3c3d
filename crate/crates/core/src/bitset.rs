//! Fixed-size array of atomic bits.
//!
//! Bits are packed into 64-bit words; every single-bit operation is one
//! atomic read-modify-write on its word.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::contract::expects;
use crate::index::{from_usize, to_usize, Index};

const WORD_BITS: usize = 64;

pub struct Bitset {
    words: Box<[AtomicU64]>,
    bits: usize,
}

impl Bitset {
    /// `n` bits, all equal to `initial`.
    #[track_caller]
    pub fn new(n: Index, initial: bool) -> Bitset {
        expects(n > 0, "bitset size must be positive");
        let bits = to_usize(n.max(1));
        let words = (0..bits.div_ceil(WORD_BITS))
            .map(|_| AtomicU64::new(0))
            .collect();
        let b = Bitset { words, bits };
        if initial {
            b.set_all();
        }
        b
    }

    #[inline]
    pub fn len(&self) -> Index {
        from_usize(self.bits)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    #[inline]
    #[track_caller]
    fn locate(&self, i: Index) -> (usize, u64) {
        expects(i >= 0 && to_usize(i.max(0)) < self.bits, "bit index out of range");
        let i = i as usize;
        (i / WORD_BITS, 1u64 << (i % WORD_BITS))
    }

    /// Mask of the bits of word `w` that lie inside the set.
    #[inline]
    fn valid_mask(&self, w: usize) -> u64 {
        let used = self.bits - w * WORD_BITS;
        if used >= WORD_BITS {
            u64::MAX
        } else {
            (1u64 << used) - 1
        }
    }

    /// Sets bit `i` and returns its previous value.
    #[inline]
    #[track_caller]
    pub fn set(&self, i: Index) -> bool {
        let (w, m) = self.locate(i);
        self.words[w].fetch_or(m, Ordering::AcqRel) & m != 0
    }

    /// Clears bit `i` and returns its previous value.
    #[inline]
    #[track_caller]
    pub fn reset(&self, i: Index) -> bool {
        let (w, m) = self.locate(i);
        self.words[w].fetch_and(!m, Ordering::AcqRel) & m != 0
    }

    #[inline]
    #[track_caller]
    pub fn test(&self, i: Index) -> bool {
        let (w, m) = self.locate(i);
        self.words[w].load(Ordering::Acquire) & m != 0
    }

    /// Number of set bits. Exact only when no other thread is mutating.
    pub fn count(&self) -> Index {
        let n: u32 = self
            .words
            .iter()
            .enumerate()
            .map(|(w, word)| (word.load(Ordering::Acquire) & self.valid_mask(w)).count_ones())
            .sum();
        n as Index
    }

    pub fn set_all(&self) {
        for (w, word) in self.words.iter().enumerate() {
            word.store(self.valid_mask(w), Ordering::Release);
        }
    }

    pub fn reset_all(&self) {
        for word in self.words.iter() {
            word.store(0, Ordering::Release);
        }
    }

    /// Claims a clear bit, scanning circularly from `hint`.
    ///
    /// Returns the claimed index, or `None` when every bit was observed set
    /// during one pass. Bits cleared behind the scan are missed; callers that
    /// need a definite answer retry.
    #[track_caller]
    pub fn find_free_and_claim(&self, hint: Index) -> Option<Index> {
        let (start_word, start_mask) = self.locate(hint);
        let start_bit = start_mask.trailing_zeros();
        let nwords = self.words.len();
        // Bits at or above the hint in the first word, then every other word,
        // then the bits below the hint in the first word.
        for step in 0..=nwords {
            let w = (start_word + step) % nwords;
            let region = if step == 0 {
                u64::MAX << start_bit
            } else if step == nwords {
                !(u64::MAX << start_bit)
            } else {
                u64::MAX
            };
            let allowed = region & self.valid_mask(w);
            let word = &self.words[w];
            let mut current = word.load(Ordering::Relaxed);
            loop {
                let free = !current & allowed;
                if free == 0 {
                    break;
                }
                let bit = free & free.wrapping_neg();
                let prev = word.fetch_or(bit, Ordering::AcqRel);
                if prev & bit == 0 {
                    return Some(from_usize(w * WORD_BITS + bit.trailing_zeros() as usize));
                }
                current = prev | bit;
            }
        }
        None
    }

    /// Indices of all set bits, in increasing order.
    pub fn ones(&self) -> impl Iterator<Item = Index> + '_ {
        self.words.iter().enumerate().flat_map(move |(w, word)| {
            let mut bits = word.load(Ordering::Acquire) & self.valid_mask(w);
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(from_usize(w * WORD_BITS + b))
            })
        })
    }
}

impl fmt::Debug for Bitset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Bitset")
            .field("len", &self.bits)
            .field("count", &self.count())
            .finish()
    }
}
