use std::cell::UnsafeCell;
use std::mem::MaybeUninit;
use std::sync::atomic::{AtomicU8, Ordering};

use crossbeam_utils::Backoff;

const FREE: u8 = 0;
const WRITING: u8 = 1;
const FULL: u8 = 2;
const READING: u8 = 3;

/// Element storage whose slots cycle FREE -> WRITING -> FULL -> READING ->
/// FREE.
///
/// A push that reserved index `i` waits for FREE, a pop waits for FULL. Index
/// reservations for a slot alternate between pushes and pops, so every wait
/// is on an operation that has already reserved and will finish.
pub(super) struct SlotArray<T> {
    cells: Box<[UnsafeCell<MaybeUninit<T>>]>,
    states: Box<[AtomicU8]>,
}

// SAFETY: a cell is only touched by the thread that moved its state to
// WRITING or READING, or under quiescence through `&mut self`. Shared
// readers (READING via `peek`) only clone, and exclude writers and takers.
unsafe impl<T: Send> Send for SlotArray<T> {}
unsafe impl<T: Send + Sync> Sync for SlotArray<T> {}

impl<T> SlotArray<T> {
    pub(super) fn new(n: usize) -> SlotArray<T> {
        SlotArray {
            cells: (0..n).map(|_| UnsafeCell::new(MaybeUninit::uninit())).collect(),
            states: (0..n).map(|_| AtomicU8::new(FREE)).collect(),
        }
    }

    fn acquire(&self, i: usize, from: u8, to: u8) {
        let backoff = Backoff::new();
        while self.states[i]
            .compare_exchange_weak(from, to, Ordering::Acquire, Ordering::Relaxed)
            .is_err()
        {
            backoff.snooze();
        }
    }

    /// Stores into a reserved slot.
    pub(super) fn put(&self, i: usize, value: T) {
        self.acquire(i, FREE, WRITING);
        // SAFETY: WRITING grants exclusive access; the slot holds no value.
        unsafe { (*self.cells[i].get()).write(value) };
        self.states[i].store(FULL, Ordering::Release);
    }

    /// Moves the value out of a reserved slot.
    pub(super) fn take(&self, i: usize) -> T {
        self.acquire(i, FULL, READING);
        // SAFETY: READING from FULL grants exclusive access to an initialized
        // value, which is moved out before the slot is freed.
        let v = unsafe { (*self.cells[i].get()).assume_init_read() };
        self.states[i].store(FREE, Ordering::Release);
        v
    }

    /// Clones the value in slot `i` once it is FULL. `live` is polled
    /// between attempts; when it returns false the read is abandoned.
    pub(super) fn peek(&self, i: usize, live: impl Fn() -> bool) -> Option<T>
    where
        T: Clone,
    {
        let backoff = Backoff::new();
        loop {
            if !live() {
                return None;
            }
            if self.states[i]
                .compare_exchange_weak(FULL, READING, Ordering::Acquire, Ordering::Relaxed)
                .is_ok()
            {
                // SAFETY: READING excludes writers and takers.
                let v = unsafe { (*self.cells[i].get()).assume_init_ref().clone() };
                self.states[i].store(FULL, Ordering::Release);
                return Some(v);
            }
            backoff.snooze();
        }
    }

    pub(super) fn is_full(&self, i: usize) -> bool {
        self.states[i].load(Ordering::Acquire) == FULL
    }

    pub(super) fn is_free(&self, i: usize) -> bool {
        self.states[i].load(Ordering::Acquire) == FREE
    }

    pub(super) fn len(&self) -> usize {
        self.states.len()
    }

    /// Drops every stored value. Requires quiescence.
    pub(super) fn clear(&self) {
        for i in 0..self.len() {
            if self.states[i].load(Ordering::Acquire) == FULL {
                // SAFETY: quiescent and FULL, so initialized and unshared.
                unsafe { (*self.cells[i].get()).assume_init_drop() };
            }
            self.states[i].store(FREE, Ordering::Release);
        }
    }
}

impl<T> Drop for SlotArray<T> {
    fn drop(&mut self) {
        self.clear();
    }
}
