use std::marker::PhantomData;
use std::sync::atomic::{AtomicU64, Ordering};

use bytemuck::Pod;

/// Per-slot storage of a plain-old-data value as relaxed atomic words.
///
/// Readers may race with a writer reusing the slot; they get a possibly torn
/// but always valid bit pattern (`Pod` accepts any bits) and discard it after
/// the slot's version check fails.
pub(super) struct WordStore<T> {
    words_per_slot: usize,
    data: Box<[AtomicU64]>,
    _type: PhantomData<fn() -> T>,
}

impl<T: Pod> WordStore<T> {
    pub(super) fn new(slots: usize) -> WordStore<T> {
        let words_per_slot = std::mem::size_of::<T>().div_ceil(8);
        WordStore {
            words_per_slot,
            data: (0..slots * words_per_slot).map(|_| AtomicU64::new(0)).collect(),
            _type: PhantomData,
        }
    }

    #[inline]
    fn words(&self, slot: usize) -> &[AtomicU64] {
        let start = slot * self.words_per_slot;
        &self.data[start..start + self.words_per_slot]
    }

    #[inline]
    pub(super) fn write(&self, slot: usize, value: &T) {
        let bytes = bytemuck::bytes_of(value);
        for (chunk, word) in bytes.chunks(8).zip(self.words(slot)) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            word.store(u64::from_ne_bytes(buf), Ordering::Relaxed);
        }
    }

    #[inline]
    pub(super) fn read(&self, slot: usize) -> T {
        let mut out = T::zeroed();
        let bytes = bytemuck::bytes_of_mut(&mut out);
        for (chunk, word) in bytes.chunks_mut(8).zip(self.words(slot)) {
            let w = word.load(Ordering::Relaxed).to_ne_bytes();
            chunk.copy_from_slice(&w[..chunk.len()]);
        }
        out
    }
}
