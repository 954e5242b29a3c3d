use std::fmt;
use std::sync::Arc;

use super::slots::SlotArray;
use crate::atomic::AtomicCell;
use crate::contract::expects;
use crate::index::{from_usize, to_usize, Index, INDEX_MAX};
use crate::memory::{AllocationId, MemoryError, Registry};
use crate::ranges::EntryRange;

struct Inner<T> {
    slots: SlotArray<T>,
    size: AtomicCell<Index>,
    capacity: Index,
    registration: AllocationId,
}

/// Fixed-capacity vector with thread-safe `push_back` and `pop_back`.
///
/// Clones are shallow and share storage.
pub struct ParVector<T> {
    inner: Arc<Inner<T>>,
}

impl<T> Clone for ParVector<T> {
    fn clone(&self) -> Self {
        ParVector {
            inner: Arc::clone(&self.inner),
        }
    }
}

impl<T: Send> ParVector<T> {
    pub fn create(capacity: Index) -> Result<Self, MemoryError> {
        let registration = super::register::<T>(capacity, INDEX_MAX)?;
        Ok(ParVector {
            inner: Arc::new(Inner {
                slots: SlotArray::new(to_usize(capacity)),
                size: AtomicCell::new(0),
                capacity,
                registration,
            }),
        })
    }

    /// Releases the registration. Stored elements are dropped with the last
    /// clone.
    pub fn destroy(self) -> Result<(), MemoryError> {
        Registry::global().release(self.inner.registration)
    }

    pub fn registration(&self) -> AllocationId {
        self.inner.registration
    }

    pub fn capacity(&self) -> Index {
        self.inner.capacity
    }

    pub fn size(&self) -> Index {
        self.inner.size.load()
    }

    pub fn is_empty(&self) -> bool {
        self.size() == 0
    }

    pub fn is_full(&self) -> bool {
        self.size() >= self.capacity()
    }

    fn reserve_back(&self) -> Option<Index> {
        let size = &self.inner.size;
        let mut s = size.load();
        loop {
            if s >= self.inner.capacity {
                return None;
            }
            match size.compare_exchange(s, s + 1) {
                Ok(_) => return Some(s),
                Err(actual) => s = actual,
            }
        }
    }

    /// Appends `value`; `false` when the vector is full.
    pub fn push_back(&self, value: T) -> bool {
        match self.reserve_back() {
            Some(i) => {
                self.inner.slots.put(to_usize(i), value);
                true
            }
            None => false,
        }
    }

    pub fn emplace_back(&self, make: impl FnOnce() -> T) -> bool {
        self.push_back(make())
    }

    /// Removes and returns the last element.
    pub fn pop_back(&self) -> Option<T> {
        let size = &self.inner.size;
        let mut s = size.load();
        loop {
            if s <= 0 {
                return None;
            }
            match size.compare_exchange(s, s - 1) {
                Ok(_) => return Some(self.inner.slots.take(to_usize(s - 1))),
                Err(actual) => s = actual,
            }
        }
    }

    /// Copy of element `i`, or `None` if `i` is outside `[0, size)`.
    pub fn get(&self, i: Index) -> Option<T>
    where
        T: Clone,
    {
        if i < 0 || i >= self.size() {
            return None;
        }
        self.inner.slots.peek(to_usize(i), || i < self.size())
    }

    /// Element `i`, which must lie in `[0, size)`.
    #[track_caller]
    pub fn index(&self, i: Index) -> T
    where
        T: Clone,
    {
        let v = self.get(i);
        expects(v.is_some(), "vector index out of range");
        v.expect("vector index out of range")
    }

    /// Drops all elements. Requires quiescence.
    pub fn clear(&self) {
        self.inner.slots.clear();
        self.inner.size.store(0);
    }

    /// `[0, size)` full and everything else free. Requires quiescence.
    pub fn valid(&self) -> bool {
        let n = self.size();
        (0..=self.capacity()).contains(&n)
            && (0..self.inner.slots.len()).all(|i| {
                if from_usize(i) < n {
                    self.inner.slots.is_full(i)
                } else {
                    self.inner.slots.is_free(i)
                }
            })
    }

    /// Elements `[0, size)`. Requires quiescence.
    pub fn device_range(&self) -> EntryRange<'_, T>
    where
        T: Clone + Sync,
    {
        EntryRange::new((0..self.size()).collect(), move |i| self.index(i))
    }

    /// Moves all elements out, front to back. Requires quiescence.
    pub fn drain(&self) -> Vec<T> {
        let n = to_usize(self.inner.size.exchange(0));
        (0..n).map(|i| self.inner.slots.take(i)).collect()
    }
}

impl<T> fmt::Debug for ParVector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParVector")
            .field("capacity", &self.inner.capacity)
            .field("size", &self.inner.size.load())
            .finish()
    }
}
