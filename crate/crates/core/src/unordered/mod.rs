//! Fixed-capacity hash map and hash set.
//!
//! Both containers share [`HashBase`]: a power-of-two array of bucket heads
//! whose collision chains run through a preallocated pool of `capacity`
//! slots. An occupancy [`Bitset`] marks slots holding user data.
//!
//! # Concurrency
//!
//! `insert`, `erase`, `find` and `contains` may run concurrently from any
//! number of threads.
//!
//! * Modifications take the bucket's lock from a [`MutexArray`] with
//!   try-lock only, retrying with backoff. An operation never holds more than
//!   one lock, so there is no deadlock.
//! * Lookups take no lock. Every chain link carries the version the target
//!   slot had when the link was written; erasing a slot bumps its version.
//!   A reader that follows a link whose version no longer matches restarts
//!   from the bucket head, so a recycled slot can never splice a foreign
//!   chain into its traversal.
//! * Running out of free slots is the only way an insertion fails.
//!
//! `clear`, `device_range`, `valid` and `destroy` need the container to be
//! quiescent.
//!
//! Keys and payloads are [`Pod`] so a lookup can read a slot that is being
//! recycled under it: the bits may be garbage, but they are never invalid,
//! and the version check throws them away.

mod map;
mod set;
mod words;

pub use map::UnorderedMap;
pub use set::UnorderedSet;

use std::fmt;
use std::marker::PhantomData;
use std::sync::atomic::{fence, AtomicI64, AtomicU32, AtomicU64, Ordering};
use std::sync::Arc;

use bytemuck::Pod;
use crossbeam_utils::Backoff;

use crate::atomic::AtomicCell;
use crate::bitset::Bitset;
use crate::contract::{Contracts, ContractMode};
use crate::functional::{KeyEqual, KeyHasher};
use crate::index::{from_usize, max_length, to_usize, Index};
use crate::launch::{launch, LaunchConfig, LaunchError};
use crate::memory::{AllocationId, MemoryError, MemorySpace, Registry};
use crate::mutex::{LockGuard, MutexArray};
use crate::ranges::EntryRange;
use words::WordStore;

const NULL_SLOT: u32 = u32::MAX;

/// Largest supported capacity; slot numbers must fit in 32 bits.
pub const MAX_CAPACITY: Index = if (NULL_SLOT as i128 - 1) < Index::MAX as i128 {
    (NULL_SLOT - 1) as Index
} else {
    Index::MAX
};

/// A slot number paired with the slot's version at the time the link was
/// taken. Packed as `version << 32 | slot`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct VersionedLink(u64);

/// Handle to a container entry; the end handle marks "no entry".
pub type EntryHandle = VersionedLink;

impl VersionedLink {
    pub const NULL: VersionedLink = VersionedLink(NULL_SLOT as u64);
    pub const END: VersionedLink = VersionedLink::NULL;

    #[inline]
    fn new(slot: usize, version: u32) -> VersionedLink {
        VersionedLink((u64::from(version) << 32) | slot as u64)
    }

    #[inline]
    fn raw_slot(self) -> usize {
        (self.0 & 0xFFFF_FFFF) as usize
    }

    #[inline]
    pub fn is_null(self) -> bool {
        self.0 as u32 == NULL_SLOT
    }

    #[inline]
    pub fn is_end(self) -> bool {
        self.is_null()
    }

    pub fn slot(self) -> Option<Index> {
        (!self.is_null()).then(|| from_usize(self.raw_slot()))
    }

    pub fn version(self) -> u32 {
        (self.0 >> 32) as u32
    }
}

impl fmt::Debug for VersionedLink {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.slot() {
            Some(s) => write!(f, "Link({s}@v{})", self.version()),
            None => f.write_str("Link(end)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InsertStatus {
    Inserted,
    AlreadyPresent,
    CapacityExhausted,
}

/// Outcome of a single insertion. `handle` addresses the new or existing
/// entry, and is the end handle exactly when capacity ran out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InsertResult {
    pub handle: EntryHandle,
    pub status: InsertStatus,
}

impl InsertResult {
    fn inserted(handle: EntryHandle) -> Self {
        InsertResult {
            handle,
            status: InsertStatus::Inserted,
        }
    }

    fn already_present(handle: EntryHandle) -> Self {
        InsertResult {
            handle,
            status: InsertStatus::AlreadyPresent,
        }
    }

    fn exhausted() -> Self {
        InsertResult {
            handle: EntryHandle::END,
            status: InsertStatus::CapacityExhausted,
        }
    }

    pub fn is_inserted(&self) -> bool {
        self.status == InsertStatus::Inserted
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RangeInsertError {
    #[error("capacity exhausted: {rejected} keys did not fit ({inserted} inserted)")]
    CapacityExhausted { inserted: Index, rejected: Index },
    #[error(transparent)]
    Memory(#[from] MemoryError),
    #[error(transparent)]
    Launch(#[from] LaunchError),
}

/// Status counts of a bulk insertion.
#[derive(Debug, Default)]
struct Tally {
    inserted: AtomicI64,
    rejected: AtomicI64,
}

impl Tally {
    fn record(&self, r: InsertResult) {
        match r.status {
            InsertStatus::Inserted => self.inserted.fetch_add(1, Ordering::Relaxed),
            InsertStatus::AlreadyPresent => 0,
            InsertStatus::CapacityExhausted => self.rejected.fetch_add(1, Ordering::Relaxed),
        };
    }

    fn finish(self) -> Result<Index, RangeInsertError> {
        let inserted = self.inserted.into_inner() as Index;
        match self.rejected.into_inner() as Index {
            0 => Ok(inserted),
            rejected => Err(RangeInsertError::CapacityExhausted { inserted, rejected }),
        }
    }
}

struct Table<K, V, H, E> {
    capacity: usize,
    bucket_mask: usize,
    heads: Box<[AtomicU64]>,
    next: Box<[AtomicU64]>,
    versions: Box<[AtomicU32]>,
    keys: WordStore<K>,
    values: WordStore<V>,
    occupancy: Bitset,
    locks: MutexArray,
    size: AtomicCell<Index>,
    hasher: H,
    key_equal: E,
    registration: AllocationId,
    _types: PhantomData<fn() -> (K, V)>,
}

/// Shared implementation of [`UnorderedMap`] and [`UnorderedSet`].
///
/// Cloning is shallow: clones address the same table. [`destroy`] releases
/// the registration once; a second destroy through any clone is reported as
/// a double free.
///
/// [`destroy`]: HashBase::destroy
pub struct HashBase<K, V, H, E> {
    table: Arc<Table<K, V, H, E>>,
}

impl<K, V, H, E> Clone for HashBase<K, V, H, E> {
    fn clone(&self) -> Self {
        HashBase {
            table: Arc::clone(&self.table),
        }
    }
}

impl<K, V, H, E> HashBase<K, V, H, E>
where
    K: Pod,
    V: Pod,
    H: KeyHasher<K> + Send + Sync,
    E: KeyEqual<K> + Send + Sync,
{
    pub fn create(capacity: Index, hasher: H, key_equal: E) -> Result<Self, MemoryError> {
        let strict = Contracts::new(ContractMode::Enforced);
        strict.expects(capacity > 0, "capacity must be positive")?;
        strict.expects(
            capacity <= MAX_CAPACITY.min(max_length()),
            "capacity exceeds the supported range",
        )?;
        let cap = to_usize(capacity);
        let buckets = cap.next_power_of_two();
        let registration = Registry::global().register_object(
            MemorySpace::Device,
            capacity,
            from_usize(std::mem::size_of::<K>() + std::mem::size_of::<V>()),
        )?;
        let table = Table {
            capacity: cap,
            bucket_mask: buckets - 1,
            heads: (0..buckets)
                .map(|_| AtomicU64::new(VersionedLink::NULL.0))
                .collect(),
            next: (0..cap)
                .map(|_| AtomicU64::new(VersionedLink::NULL.0))
                .collect(),
            versions: (0..cap).map(|_| AtomicU32::new(0)).collect(),
            keys: WordStore::new(cap),
            values: WordStore::new(cap),
            occupancy: Bitset::new(capacity, false),
            locks: MutexArray::new(from_usize(buckets)),
            size: AtomicCell::new(0),
            hasher,
            key_equal,
            registration,
            _types: PhantomData,
        };
        Ok(HashBase {
            table: Arc::new(table),
        })
    }

    /// Releases the container's registration.
    pub fn destroy(self) -> Result<(), MemoryError> {
        Registry::global().release(self.table.registration)
    }

    pub fn registration(&self) -> AllocationId {
        self.table.registration
    }

    pub fn capacity(&self) -> Index {
        from_usize(self.table.capacity)
    }

    pub fn bucket_count(&self) -> Index {
        from_usize(self.table.bucket_mask + 1)
    }

    /// Entry count. Exact at quiescence; during concurrent modification
    /// an approximation clamped to `0..=capacity`.
    pub fn size(&self) -> Index {
        self.table.size.load().clamp(0, self.capacity())
    }

    pub fn is_empty(&self) -> bool {
        self.size() == 0
    }

    pub fn is_full(&self) -> bool {
        self.size() >= self.capacity()
    }

    #[inline]
    fn bucket(&self, key: &K) -> usize {
        (self.table.hasher.hash(key) as usize) & self.table.bucket_mask
    }

    #[inline]
    fn eq(&self, a: &K, b: &K) -> bool {
        self.table.key_equal.eq(a, b)
    }

    /// Lock-free chain search.
    fn find_link(&self, bucket: usize, key: &K) -> VersionedLink {
        let t = &*self.table;
        'restart: loop {
            let mut link = VersionedLink(t.heads[bucket].load(Ordering::Acquire));
            let mut visited = 0;
            while !link.is_null() {
                if visited > t.capacity {
                    continue 'restart;
                }
                let s = link.raw_slot();
                let k = t.keys.read(s);
                let next = VersionedLink(t.next[s].load(Ordering::Acquire));
                fence(Ordering::Acquire);
                if t.versions[s].load(Ordering::Relaxed) != link.version() {
                    continue 'restart;
                }
                if self.eq(&k, key) {
                    return link;
                }
                link = next;
                visited += 1;
            }
            return VersionedLink::NULL;
        }
    }

    /// Chain search for a caller holding the bucket lock. Chain members
    /// cannot be unlinked meanwhile, so no version checks are needed.
    fn find_locked(&self, bucket: usize, key: &K) -> Option<VersionedLink> {
        let t = &*self.table;
        let mut link = VersionedLink(t.heads[bucket].load(Ordering::Acquire));
        while !link.is_null() {
            let s = link.raw_slot();
            if self.eq(&t.keys.read(s), key) {
                return Some(link);
            }
            link = VersionedLink(t.next[s].load(Ordering::Acquire));
        }
        None
    }

    fn lock_bucket(&self, bucket: usize) -> LockGuard<'_> {
        let backoff = Backoff::new();
        loop {
            if let Some(g) = self.table.locks.try_guard(from_usize(bucket)) {
                return g;
            }
            backoff.snooze();
        }
    }

    pub(crate) fn insert_with(&self, key: K, make_value: impl FnOnce() -> V) -> InsertResult {
        let t = &*self.table;
        let b = self.bucket(&key);
        let existing = self.find_link(b, &key);
        if !existing.is_null() {
            return InsertResult::already_present(existing);
        }
        let value = make_value();

        let hint = ((b as u64 * t.capacity as u64) >> (t.bucket_mask + 1).trailing_zeros()) as Index;
        let backoff = Backoff::new();
        let slot = loop {
            if let Some(s) = t.occupancy.find_free_and_claim(hint) {
                break to_usize(s);
            }
            // The scan can miss slots freed behind it; only a full counter
            // proves exhaustion.
            let existing = self.find_link(b, &key);
            if !existing.is_null() {
                return InsertResult::already_present(existing);
            }
            if t.size.load() >= self.capacity() {
                return InsertResult::exhausted();
            }
            backoff.snooze();
        };

        // Pairs with the acquire fence in lookups: a reader that sees these
        // writes also sees the version bump of the slot's previous life.
        fence(Ordering::Release);
        t.keys.write(slot, &key);
        t.values.write(slot, &value);
        let link = VersionedLink::new(slot, t.versions[slot].load(Ordering::Relaxed));

        let guard = self.lock_bucket(b);
        if let Some(found) = self.find_locked(b, &key) {
            drop(guard);
            // Never published, so no reader holds a link to it.
            t.occupancy.reset(from_usize(slot));
            return InsertResult::already_present(found);
        }
        t.next[slot].store(t.heads[b].load(Ordering::Relaxed), Ordering::Relaxed);
        t.heads[b].store(link.0, Ordering::Release);
        drop(guard);
        t.size.fetch_add(1);
        InsertResult::inserted(link)
    }

    pub(crate) fn erase_key(&self, key: &K) -> bool {
        let t = &*self.table;
        let b = self.bucket(key);
        if self.find_link(b, key).is_null() {
            return false;
        }
        let guard = self.lock_bucket(b);
        let mut prev: Option<usize> = None;
        let mut link = VersionedLink(t.heads[b].load(Ordering::Acquire));
        while !link.is_null() {
            let s = link.raw_slot();
            let next = t.next[s].load(Ordering::Acquire);
            if self.eq(&t.keys.read(s), key) {
                match prev {
                    None => t.heads[b].store(next, Ordering::Release),
                    Some(p) => t.next[p].store(next, Ordering::Release),
                }
                drop(guard);
                self.retire(s);
                t.size.fetch_sub(1);
                return true;
            }
            prev = Some(s);
            link = VersionedLink(next);
        }
        false
    }

    fn retire(&self, slot: usize) {
        let t = &*self.table;
        if !cfg!(feature = "fault-skip-version-bump") {
            t.versions[slot].fetch_add(1, Ordering::Release);
        }
        t.occupancy.reset(from_usize(slot));
    }

    pub(crate) fn find_key(&self, key: &K) -> EntryHandle {
        self.find_link(self.bucket(key), key)
    }

    /// Reads the entry `handle` refers to, if it is still live.
    pub(crate) fn read_entry(&self, handle: EntryHandle) -> Option<(K, V)> {
        let t = &*self.table;
        if handle.is_null() || handle.raw_slot() >= t.capacity {
            return None;
        }
        let s = handle.raw_slot();
        if !t.occupancy.test(from_usize(s)) {
            return None;
        }
        let k = t.keys.read(s);
        let v = t.values.read(s);
        fence(Ordering::Acquire);
        (t.versions[s].load(Ordering::Relaxed) == handle.version()).then_some((k, v))
    }

    pub(crate) fn insert_many<F>(
        &self,
        n: Index,
        config: LaunchConfig,
        item: F,
    ) -> Result<Index, RangeInsertError>
    where
        F: Fn(usize) -> (K, V) + Sync,
    {
        let tally = Tally::default();
        launch(LaunchConfig { total_threads: n, ..config }, |i| {
            let (k, v) = item(to_usize(i));
            tally.record(self.insert_with(k, || v));
        })?;
        tally.finish()
    }

    pub(crate) fn insert_iter(
        &self,
        items: impl IntoIterator<Item = (K, V)>,
    ) -> Result<Index, RangeInsertError> {
        let tally = Tally::default();
        for (k, v) in items {
            tally.record(self.insert_with(k, || v));
        }
        tally.finish()
    }

    /// Empties the container. Requires quiescence.
    pub fn clear(&self) {
        let t = &*self.table;
        for s in t.occupancy.ones() {
            t.versions[to_usize(s)].fetch_add(1, Ordering::Release);
        }
        t.occupancy.reset_all();
        for h in t.heads.iter() {
            h.store(VersionedLink::NULL.0, Ordering::Release);
        }
        t.size.store(0);
    }

    /// Snapshot of all live entries. Requires quiescence.
    pub(crate) fn range_with<'a, T, F>(&'a self, project: F) -> EntryRange<'a, T>
    where
        F: Fn(K, V) -> T + Send + Sync + 'a,
    {
        let t = &*self.table;
        let positions: Vec<Index> = t.occupancy.ones().collect();
        EntryRange::new(positions, move |s| {
            let s = to_usize(s);
            project(t.keys.read(s), t.values.read(s))
        })
    }

    /// Holds the lock of the bucket `key` hashes to, if it is free.
    ///
    /// Meant for tests of the non-blocking lookup guarantee; modifications
    /// of that bucket spin until the guard is dropped.
    pub fn try_lock_bucket_of(&self, key: &K) -> Option<LockGuard<'_>> {
        self.table.locks.try_guard(from_usize(self.bucket(key)))
    }

    /// Checks every structural invariant. Requires quiescence.
    pub fn valid(&self) -> bool {
        self.check().is_ok()
    }

    /// Like [`valid`](Self::valid), naming the first violated invariant.
    pub fn check(&self) -> Result<(), String> {
        let t = &*self.table;
        let mut seen = vec![false; t.capacity];
        let mut reachable: Index = 0;
        for b in 0..=t.bucket_mask {
            if t.locks.is_locked(from_usize(b)) {
                return Err(format!("bucket {b} is still locked"));
            }
            let mut chain: Vec<K> = Vec::new();
            let mut link = VersionedLink(t.heads[b].load(Ordering::Acquire));
            while !link.is_null() {
                let s = link.raw_slot();
                if s >= t.capacity {
                    return Err(format!("bucket {b} links to slot {s} outside the pool"));
                }
                if seen[s] {
                    return Err(format!("slot {s} is reachable twice (cycle or shared chain)"));
                }
                seen[s] = true;
                if !t.occupancy.test(from_usize(s)) {
                    return Err(format!("slot {s} is linked but not occupied"));
                }
                if t.versions[s].load(Ordering::Acquire) != link.version() {
                    return Err(format!("stale link to slot {s}"));
                }
                let k = t.keys.read(s);
                if self.bucket(&k) != b {
                    return Err(format!("slot {s} is chained in the wrong bucket {b}"));
                }
                if chain.iter().any(|c| self.eq(c, &k)) {
                    return Err(format!("duplicate key in bucket {b}"));
                }
                chain.push(k);
                reachable += 1;
                link = VersionedLink(t.next[s].load(Ordering::Acquire));
            }
        }
        let occupied = t.occupancy.count();
        if reachable != occupied {
            return Err(format!("{occupied} occupied slots but {reachable} reachable"));
        }
        let size = t.size.load();
        if size != occupied {
            return Err(format!("size counter {size} != {occupied} occupied slots"));
        }
        Ok(())
    }
}

impl<K, V, H, E> fmt::Debug for HashBase<K, V, H, E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HashBase")
            .field("capacity", &self.table.capacity)
            .field("size", &self.table.size.load())
            .field("registration", &self.table.registration)
            .finish()
    }
}
