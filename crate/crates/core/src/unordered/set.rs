use bytemuck::Pod;

use super::{EntryHandle, HashBase, InsertResult, RangeInsertError};
use crate::functional::{DefaultHasher, EqualTo, KeyEqual, KeyHasher};
use crate::index::Index;
use crate::launch::LaunchConfig;
use crate::memory::{MemoryError, RegisteredArray, Registry};
use crate::mutex::LockGuard;
use crate::ranges::EntryRange;

/// Fixed-capacity concurrent hash set. See the [module docs](super).
pub struct UnorderedSet<K, H = DefaultHasher, E = EqualTo> {
    base: HashBase<K, (), H, E>,
}

impl<K, H, E> Clone for UnorderedSet<K, H, E> {
    fn clone(&self) -> Self {
        UnorderedSet {
            base: self.base.clone(),
        }
    }
}

impl<K> UnorderedSet<K>
where
    K: Pod + PartialEq,
    DefaultHasher: KeyHasher<K>,
{
    pub fn create(capacity: Index) -> Result<Self, MemoryError> {
        Self::create_with(capacity, DefaultHasher, EqualTo)
    }
}

impl<K, H, E> UnorderedSet<K, H, E>
where
    K: Pod,
    H: KeyHasher<K> + Send + Sync,
    E: KeyEqual<K> + Send + Sync,
{
    pub fn create_with(capacity: Index, hasher: H, key_equal: E) -> Result<Self, MemoryError> {
        Ok(UnorderedSet {
            base: HashBase::create(capacity, hasher, key_equal)?,
        })
    }

    pub fn destroy(self) -> Result<(), MemoryError> {
        self.base.destroy()
    }

    pub fn base(&self) -> &HashBase<K, (), H, E> {
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

    pub fn insert(&self, key: K) -> InsertResult {
        self.base.insert_with(key, || ())
    }

    pub fn find(&self, key: &K) -> EntryHandle {
        self.base.find_key(key)
    }

    pub fn contains(&self, key: &K) -> bool {
        !self.find(key).is_end()
    }

    /// The key behind `handle`, or `None` once it has been erased.
    pub fn key(&self, handle: EntryHandle) -> Option<K> {
        self.base.read_entry(handle).map(|(k, _)| k)
    }

    pub fn erase(&self, key: &K) -> bool {
        self.base.erase_key(key)
    }

    pub fn insert_range(&self, keys: impl IntoIterator<Item = K>) -> Result<Index, RangeInsertError> {
        self.base.insert_iter(keys.into_iter().map(|k| (k, ())))
    }

    pub fn erase_range<'k>(&self, keys: impl IntoIterator<Item = &'k K>) -> Index
    where
        K: 'k,
    {
        keys.into_iter().filter(|k| self.erase(k)).count() as Index
    }

    /// Inserts the keys of a registered array, one logical thread each.
    pub fn insert_array(
        &self,
        keys: RegisteredArray<K>,
        config: LaunchConfig,
    ) -> Result<Index, RangeInsertError>
    where
        K: Send + Sync,
    {
        let data = Registry::global().read(keys)?;
        self.base
            .insert_many(data.len() as Index, config, |i| (data[i], ()))
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

    pub fn device_range(&self) -> EntryRange<'_, K>
    {
        self.base.range_with(|k, ()| k)
    }

    pub fn try_lock_bucket_of(&self, key: &K) -> Option<LockGuard<'_>> {
        self.base.try_lock_bucket_of(key)
    }
}

impl<K, H, E> std::fmt::Debug for UnorderedSet<K, H, E> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_tuple("UnorderedSet").field(&self.base).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::launch::launch;
    use crate::memory::MemorySpace;
    use crate::unordered::InsertStatus;

    #[test]
    fn basic() {
        let s = UnorderedSet::<[i32; 3]>::create(16).unwrap();
        assert!(s.insert([1, 2, 3]).is_inserted());
        assert_eq!(s.insert([1, 2, 3]).status, InsertStatus::AlreadyPresent);
        assert!(s.contains(&[1, 2, 3]));
        assert!(!s.contains(&[3, 2, 1]));
        let h = s.find(&[1, 2, 3]);
        assert_eq!(s.key(h), Some([1, 2, 3]));
        assert!(s.erase(&[1, 2, 3]));
        assert_eq!(s.key(h), None);
        s.destroy().unwrap();
    }

    #[test]
    fn parallel_duplicates_collapse() {
        for seed in 0..20 {
            let s = UnorderedSet::<u64>::create(32).unwrap();
            let inserted = std::sync::atomic::AtomicUsize::new(0);
            launch(LaunchConfig::new(200).workers(8).seed(seed), |i| {
                if s.insert((i % 20) as u64).is_inserted() {
                    inserted.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                }
            })
            .unwrap();
            assert_eq!(inserted.into_inner(), 20);
            assert_eq!(s.size(), 20);
            s.check().unwrap();
            s.destroy().unwrap();
        }
    }

    #[test]
    fn array_insertion_reports_rejections() {
        let s = UnorderedSet::<i64>::create(10).unwrap();
        let arr = Registry::global()
            .create_array_from(MemorySpace::Device, (0..15).collect::<Vec<i64>>())
            .unwrap();
        let r = s.insert_array(arr, LaunchConfig::new(0).workers(4).seed(2));
        assert_eq!(
            r,
            Err(RangeInsertError::CapacityExhausted {
                inserted: 10,
                rejected: 5
            })
        );
        assert!(s.valid());
        crate::memory::destroy_array(arr).unwrap();
        s.destroy().unwrap();
    }
}
