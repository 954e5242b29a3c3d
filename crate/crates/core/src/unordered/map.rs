use bytemuck::Pod;

use super::{EntryHandle, HashBase, InsertResult, RangeInsertError};
use crate::contract::expects;
use crate::functional::{DefaultHasher, EqualTo, KeyEqual, KeyHasher};
use crate::index::Index;
use crate::launch::LaunchConfig;
use crate::memory::{MemoryError, RegisteredArray, Registry};
use crate::mutex::LockGuard;
use crate::ranges::EntryRange;

/// Fixed-capacity concurrent hash map. See the [module docs](super).
pub struct UnorderedMap<K, V, H = DefaultHasher, E = EqualTo> {
    base: HashBase<K, V, H, E>,
}

impl<K, V, H, E> Clone for UnorderedMap<K, V, H, E> {
    fn clone(&self) -> Self {
        UnorderedMap {
            base: self.base.clone(),
        }
    }
}

impl<K, V> UnorderedMap<K, V>
where
    K: Pod + PartialEq,
    V: Pod,
    DefaultHasher: KeyHasher<K>,
{
    pub fn create(capacity: Index) -> Result<Self, MemoryError> {
        Self::create_with(capacity, DefaultHasher, EqualTo)
    }
}

impl<K, V, H, E> UnorderedMap<K, V, H, E>
where
    K: Pod,
    V: Pod,
    H: KeyHasher<K> + Send + Sync,
    E: KeyEqual<K> + Send + Sync,
{
    pub fn create_with(capacity: Index, hasher: H, key_equal: E) -> Result<Self, MemoryError> {
        Ok(UnorderedMap {
            base: HashBase::create(capacity, hasher, key_equal)?,
        })
    }

    pub fn destroy(self) -> Result<(), MemoryError> {
        self.base.destroy()
    }

    pub fn base(&self) -> &HashBase<K, V, H, E> {
        &self.base
    }

    pub fn capacity(&self) -> Index {
        self.base.capacity()
    }

    pub fn bucket_count(&self) -> Index {
        self.base.bucket_count()
    }

    pub fn size(&self) -> Index {
        self.base.size()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.base.is_full()
    }

    /// Inserts `key -> value` unless `key` is present; an existing value is
    /// left untouched.
    pub fn insert(&self, key: K, value: V) -> InsertResult {
        self.base.insert_with(key, || value)
    }

    /// Like [`insert`](Self::insert), building the value only when the key
    /// is absent.
    pub fn emplace(&self, key: K, make_value: impl FnOnce() -> V) -> InsertResult {
        self.base.insert_with(key, make_value)
    }

    pub fn find(&self, key: &K) -> EntryHandle {
        self.base.find_key(key)
    }

    pub fn contains(&self, key: &K) -> bool {
        !self.find(key).is_end()
    }

    pub fn get(&self, key: &K) -> Option<V> {
        // The key may be erased between the lookup and the read.
        loop {
            let h = self.find(key);
            if h.is_end() {
                return None;
            }
            if let Some((_, v)) = self.base.read_entry(h) {
                return Some(v);
            }
        }
    }

    /// Value of a key that must be present.
    #[track_caller]
    pub fn index(&self, key: &K) -> V {
        let v = self.get(key);
        expects(v.is_some(), "key is not in the map");
        v.unwrap_or_else(V::zeroed)
    }

    /// The entry behind `handle`, or `None` once it has been erased.
    pub fn entry(&self, handle: EntryHandle) -> Option<(K, V)> {
        self.base.read_entry(handle)
    }

    pub fn value(&self, handle: EntryHandle) -> Option<V> {
        self.entry(handle).map(|(_, v)| v)
    }

    pub fn erase(&self, key: &K) -> bool {
        self.base.erase_key(key)
    }

    /// Inserts every pair; returns how many were new.
    pub fn insert_range(
        &self,
        pairs: impl IntoIterator<Item = (K, V)>,
    ) -> Result<Index, RangeInsertError> {
        self.base.insert_iter(pairs)
    }

    /// Erases every key; returns how many were present.
    pub fn erase_range<'k>(&self, keys: impl IntoIterator<Item = &'k K>) -> Index
    where
        K: 'k,
    {
        keys.into_iter().filter(|k| self.erase(k)).count() as Index
    }

    /// Inserts the pairs of a registered array, one logical thread each.
    pub fn insert_array(
        &self,
        pairs: RegisteredArray<(K, V)>,
        config: LaunchConfig,
    ) -> Result<Index, RangeInsertError>
    where
        K: Send + Sync,
        V: Send + Sync,
    {
        let data = Registry::global().read(pairs)?;
        self.base
            .insert_many(data.len() as Index, config, |i| data[i])
    }

    pub fn clear(&self) {
        self.base.clear()
    }

    pub fn valid(&self) -> bool {
        self.base.valid()
    }

    pub fn check(&self) -> Result<(), String> {
        self.base.check()
    }

    /// All live entries. Requires quiescence.
    pub fn device_range(&self) -> EntryRange<'_, (K, V)>
    {
        self.base.range_with(|k, v| (k, v))
    }

    pub fn try_lock_bucket_of(&self, key: &K) -> Option<LockGuard<'_>> {
        self.base.try_lock_bucket_of(key)
    }
}

impl<K, V, H, E> std::fmt::Debug for UnorderedMap<K, V, H, E> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_tuple("UnorderedMap").field(&self.base).finish()
    }
}
