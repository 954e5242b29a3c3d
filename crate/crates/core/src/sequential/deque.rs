use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use super::slots::SlotArray;
use crate::contract::expects;
use crate::index::{from_usize, to_usize, Index};
use crate::memory::{AllocationId, MemoryError, Registry};
use crate::ranges::EntryRange;

/// `begin` and `size` share one 64-bit word, 32 bits each.
pub const MAX_DEQUE_CAPACITY: Index = i32::MAX as Index;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
struct Window {
    begin: u32,
    size: u32,
}

impl Window {
    fn pack(self) -> u64 {
        (u64::from(self.begin) << 32) | u64::from(self.size)
    }

    fn unpack(w: u64) -> Window {
        Window {
            begin: (w >> 32) as u32,
            size: w as u32,
        }
    }
}

struct Inner<T> {
    slots: SlotArray<T>,
    window: AtomicU64,
    capacity: u32,
    registration: AllocationId,
}

/// Fixed-capacity ring buffer with thread-safe operations at both ends.
///
/// Logical index `i` lives at physical slot `(begin + i) mod capacity`.
/// Clones are shallow and share storage.
pub struct ParDeque<T> {
    inner: Arc<Inner<T>>,
}

impl<T> Clone for ParDeque<T> {
    fn clone(&self) -> Self {
        ParDeque {
            inner: Arc::clone(&self.inner),
        }
    }
}

impl<T: Send> ParDeque<T> {
    pub fn create(capacity: Index) -> Result<Self, MemoryError> {
        let registration = super::register::<T>(capacity, MAX_DEQUE_CAPACITY)?;
        Ok(ParDeque {
            inner: Arc::new(Inner {
                slots: SlotArray::new(to_usize(capacity)),
                window: AtomicU64::new(0),
                capacity: capacity as u32,
                registration,
            }),
        })
    }

    pub fn destroy(self) -> Result<(), MemoryError> {
        Registry::global().release(self.inner.registration)
    }

    pub fn registration(&self) -> AllocationId {
        self.inner.registration
    }

    pub fn capacity(&self) -> Index {
        self.inner.capacity as Index
    }

    fn window(&self) -> Window {
        Window::unpack(self.inner.window.load(Ordering::Acquire))
    }

    pub fn size(&self) -> Index {
        self.window().size as Index
    }

    pub fn is_empty(&self) -> bool {
        self.size() == 0
    }

    pub fn is_full(&self) -> bool {
        self.size() >= self.capacity()
    }

    fn physical(&self, begin: u32, i: u32) -> usize {
        ((u64::from(begin) + u64::from(i)) % u64::from(self.inner.capacity)) as usize
    }

    /// Applies `step` to the window in one compare-exchange and returns the
    /// physical slot it picked, or `None` when `step` refuses.
    fn reserve(&self, step: impl Fn(Window) -> Option<(Window, usize)>) -> Option<usize> {
        let mut current = self.inner.window.load(Ordering::Acquire);
        loop {
            let (next, slot) = step(Window::unpack(current))?;
            match self.inner.window.compare_exchange_weak(
                current,
                next.pack(),
                Ordering::AcqRel,
                Ordering::Acquire,
            ) {
                Ok(_) => return Some(slot),
                Err(actual) => current = actual,
            }
        }
    }

    pub fn push_back(&self, value: T) -> bool {
        let cap = self.inner.capacity;
        let slot = self.reserve(|w| {
            (w.size < cap).then(|| {
                let next = Window {
                    size: w.size + 1,
                    ..w
                };
                (next, self.physical(w.begin, w.size))
            })
        });
        slot.map(|s| self.inner.slots.put(s, value)).is_some()
    }

    pub fn push_front(&self, value: T) -> bool {
        let cap = self.inner.capacity;
        let slot = self.reserve(|w| {
            (w.size < cap).then(|| {
                let begin = if w.begin == 0 { cap - 1 } else { w.begin - 1 };
                let next = Window {
                    begin,
                    size: w.size + 1,
                };
                (next, begin as usize)
            })
        });
        slot.map(|s| self.inner.slots.put(s, value)).is_some()
    }

    pub fn emplace_back(&self, make: impl FnOnce() -> T) -> bool {
        self.push_back(make())
    }

    pub fn emplace_front(&self, make: impl FnOnce() -> T) -> bool {
        self.push_front(make())
    }

    pub fn pop_back(&self) -> Option<T> {
        let slot = self.reserve(|w| {
            (w.size > 0).then(|| {
                let next = Window {
                    size: w.size - 1,
                    ..w
                };
                (next, self.physical(w.begin, w.size - 1))
            })
        })?;
        Some(self.inner.slots.take(slot))
    }

    pub fn pop_front(&self) -> Option<T> {
        let cap = self.inner.capacity;
        let slot = self.reserve(|w| {
            (w.size > 0).then(|| {
                let next = Window {
                    begin: (w.begin + 1) % cap,
                    size: w.size - 1,
                };
                (next, w.begin as usize)
            })
        })?;
        Some(self.inner.slots.take(slot))
    }

    /// Copy of logical element `i`, or `None` if `i` is outside `[0, size)`.
    pub fn get(&self, i: Index) -> Option<T>
    where
        T: Clone,
    {
        let w = self.window();
        if i < 0 || i >= w.size as Index {
            return None;
        }
        let slot = self.physical(w.begin, i as u32);
        self.inner.slots.peek(slot, || i < self.size())
    }

    #[track_caller]
    pub fn index(&self, i: Index) -> T
    where
        T: Clone,
    {
        let v = self.get(i);
        expects(v.is_some(), "deque index out of range");
        v.expect("deque index out of range")
    }

    /// Drops all elements. Requires quiescence.
    pub fn clear(&self) {
        self.inner.slots.clear();
        self.inner.window.store(0, Ordering::Release);
    }

    /// Exactly the live window is full. Requires quiescence.
    pub fn valid(&self) -> bool {
        let w = self.window();
        if w.size > self.inner.capacity || w.begin >= self.inner.capacity {
            return false;
        }
        let cap = self.inner.capacity as usize;
        (0..cap).all(|p| {
            let logical = (p + cap - w.begin as usize) % cap;
            if logical < w.size as usize {
                self.inner.slots.is_full(p)
            } else {
                self.inner.slots.is_free(p)
            }
        })
    }

    /// Elements in logical order. Requires quiescence.
    pub fn device_range(&self) -> EntryRange<'_, T>
    where
        T: Clone + Sync,
    {
        EntryRange::new((0..self.size()).collect(), move |i| self.index(i))
    }

    /// Moves all elements out, front to back. Requires quiescence.
    pub fn drain(&self) -> Vec<T> {
        let w = Window::unpack(self.inner.window.swap(0, Ordering::AcqRel));
        (0..w.size)
            .map(|i| self.inner.slots.take(self.physical(w.begin, i)))
            .collect()
    }
}

impl<T> fmt::Debug for ParDeque<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = Window::unpack(self.inner.window.load(Ordering::Relaxed));
        f.debug_struct("ParDeque")
            .field("capacity", &self.inner.capacity)
            .field("begin", &w.begin)
            .field("size", &from_usize(w.size as usize))
            .finish()
    }
}
