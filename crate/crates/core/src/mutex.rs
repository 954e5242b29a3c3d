//! Array of try-only locks.
//!
//! There is no blocking acquire: [`MutexArray::try_lock`] either takes a free
//! lock in a single atomic step or reports failure. Operations that need a
//! lock retry on their own, and since none of them ever holds more than one
//! lock, they cannot deadlock.

use std::fmt;

use crate::bitset::Bitset;
use crate::contract::expects;
use crate::index::Index;

pub struct MutexArray {
    states: Bitset,
}

impl MutexArray {
    #[track_caller]
    pub fn new(n: Index) -> MutexArray {
        MutexArray {
            states: Bitset::new(n, false),
        }
    }

    pub fn len(&self) -> Index {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// `true` iff this call moved lock `i` from free to held.
    #[inline]
    #[track_caller]
    pub fn try_lock(&self, i: Index) -> bool {
        !self.states.set(i)
    }

    /// Releases lock `i`. Unlocking a free lock is a contract violation.
    #[inline]
    #[track_caller]
    pub fn unlock(&self, i: Index) {
        let was_held = self.states.reset(i);
        expects(was_held, "unlock of a lock that is not held");
    }

    #[inline]
    pub fn is_locked(&self, i: Index) -> bool {
        self.states.test(i)
    }

    /// Scoped form of [`try_lock`](Self::try_lock).
    pub fn try_guard(&self, i: Index) -> Option<LockGuard<'_>> {
        self.try_lock(i).then(|| LockGuard { locks: self, i })
    }
}

impl fmt::Debug for MutexArray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MutexArray")
            .field("len", &self.len())
            .field("held", &self.states.count())
            .finish()
    }
}

/// Holds one lock of a [`MutexArray`] until dropped.
pub struct LockGuard<'a> {
    locks: &'a MutexArray,
    i: Index,
}

impl LockGuard<'_> {
    pub fn index(&self) -> Index {
        self.i
    }
}

impl Drop for LockGuard<'_> {
    fn drop(&mut self) {
        self.locks.unlock(self.i);
    }
}
