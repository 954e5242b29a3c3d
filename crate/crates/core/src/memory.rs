//! Registered arrays in tagged host/device memory spaces, and the leak
//! detector that validates their lifecycle.
//!
//! Both spaces are ordinary process memory. The space tag is enforced by the
//! [`Registry`]: copies must name a direction that matches the arrays
//! involved, destroys must match a live creation, and (unless disabled)
//! copies must stay inside the registered lengths.
//!
//! Array handles are `Copy`, like the raw pointers they stand in for, which
//! is what lets the registry observe a double free at all.

use std::any::Any;
use std::collections::HashMap;
use std::fmt;
use std::marker::PhantomData;
use std::num::NonZeroU64;
use std::ops::{Deref, DerefMut};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, LazyLock};

use parking_lot::{ArcRwLockReadGuard, ArcRwLockWriteGuard, Mutex, RawRwLock, RwLock};

use crate::contract::{ContractViolation, Contracts, ContractMode};
use crate::index::{from_usize, max_length, to_usize, Index};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MemorySpace {
    Host,
    Device,
}

impl fmt::Display for MemorySpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MemorySpace::Host => "host",
            MemorySpace::Device => "device",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Direction {
    pub from: MemorySpace,
    pub to: MemorySpace,
}

impl Direction {
    pub const HOST_TO_DEVICE: Direction = Direction::new(MemorySpace::Host, MemorySpace::Device);
    pub const DEVICE_TO_HOST: Direction = Direction::new(MemorySpace::Device, MemorySpace::Host);
    pub const HOST_TO_HOST: Direction = Direction::new(MemorySpace::Host, MemorySpace::Host);
    pub const DEVICE_TO_DEVICE: Direction =
        Direction::new(MemorySpace::Device, MemorySpace::Device);

    pub const fn new(from: MemorySpace, to: MemorySpace) -> Direction {
        Direction { from, to }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.from, self.to)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AllocationId(NonZeroU64);

impl AllocationId {
    pub fn get(self) -> u64 {
        self.0.get()
    }
}

impl fmt::Display for AllocationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MemoryError {
    #[error(transparent)]
    Contract(#[from] ContractViolation),
    #[error("double free of allocation {0}: it is not registered")]
    DoubleFree(AllocationId),
    #[error("allocation {0} is not registered")]
    Unregistered(AllocationId),
    #[error("an external array cannot be bounds-checked; disable the check to copy it")]
    ExternalArray,
    #[error("copy of {count} elements exceeds the {length}-element {side} array")]
    BoundsViolation {
        side: CopySide,
        count: Index,
        length: Index,
    },
    #[error("copy direction {direction} does not match the {side} array, which lives in {actual}")]
    DirectionMismatch {
        side: CopySide,
        direction: Direction,
        actual: MemorySpace,
    },
    #[error("allocation of {length} elements of {element_size} bytes failed")]
    AllocationFailure { length: Index, element_size: Index },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CopySide {
    Source,
    Destination,
}

impl fmt::Display for CopySide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CopySide::Source => "source",
            CopySide::Destination => "destination",
        })
    }
}

/// Handle to an array registered with a [`Registry`].
pub struct RegisteredArray<T> {
    id: AllocationId,
    space: MemorySpace,
    _elem: PhantomData<fn() -> T>,
}

impl<T> RegisteredArray<T> {
    pub fn id(&self) -> AllocationId {
        self.id
    }

    pub fn space(&self) -> MemorySpace {
        self.space
    }
}

impl<T> Clone for RegisteredArray<T> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<T> Copy for RegisteredArray<T> {}

impl<T> PartialEq for RegisteredArray<T> {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl<T> Eq for RegisteredArray<T> {}

impl<T> std::hash::Hash for RegisteredArray<T> {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.id.hash(state)
    }
}

impl<T> fmt::Debug for RegisteredArray<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RegisteredArray({}, {})", self.id, self.space)
    }
}

/// Source operand of a copy.
pub enum ArraySource<'a, T> {
    Registered(RegisteredArray<T>),
    External(&'a [T]),
}

/// Destination operand of a copy.
pub enum ArrayDest<'a, T> {
    Registered(RegisteredArray<T>),
    External(&'a mut [T]),
}

impl<T> From<RegisteredArray<T>> for ArraySource<'_, T> {
    fn from(a: RegisteredArray<T>) -> Self {
        ArraySource::Registered(a)
    }
}

impl<'a, T> From<&'a [T]> for ArraySource<'a, T> {
    fn from(s: &'a [T]) -> Self {
        ArraySource::External(s)
    }
}

impl<T> From<RegisteredArray<T>> for ArrayDest<'_, T> {
    fn from(a: RegisteredArray<T>) -> Self {
        ArrayDest::Registered(a)
    }
}

impl<'a, T> From<&'a mut [T]> for ArrayDest<'a, T> {
    fn from(s: &'a mut [T]) -> Self {
        ArrayDest::External(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AllocationRecord {
    pub id: AllocationId,
    pub space: MemorySpace,
    pub length: Index,
    pub element_size: Index,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RegistryReport {
    pub live_count: Index,
    pub live_bytes: Index,
    /// Live allocations in creation order.
    pub records: Vec<AllocationRecord>,
}

impl RegistryReport {
    /// One `space,length,element_size` line per live allocation.
    pub fn to_csv(&self) -> String {
        self.records
            .iter()
            .map(|r| format!("{},{},{}\n", r.space, r.length, r.element_size))
            .collect()
    }
}

type Storage<T> = RwLock<Box<[T]>>;

struct Entry {
    record: AllocationRecord,
    /// `Storage<T>` for arrays; `None` for objects that own their memory.
    storage: Option<Arc<dyn Any + Send + Sync>>,
}

/// The leak detector: every live allocation and its metadata.
pub struct Registry {
    next_id: AtomicU64,
    entries: Mutex<HashMap<AllocationId, Entry>>,
    contracts: Contracts,
}

impl Default for Registry {
    fn default() -> Self {
        Registry::new()
    }
}

static GLOBAL: LazyLock<Registry> = LazyLock::new(Registry::new);

impl Registry {
    pub fn new() -> Registry {
        Registry::with_contracts(Contracts::active())
    }

    pub fn with_contracts(contracts: Contracts) -> Registry {
        Registry {
            next_id: AtomicU64::new(1),
            entries: Mutex::new(HashMap::new()),
            contracts,
        }
    }

    /// The process-wide registry used by containers and the free functions.
    pub fn global() -> &'static Registry {
        &GLOBAL
    }

    fn fresh_id(&self) -> AllocationId {
        let raw = self.next_id.fetch_add(1, Ordering::Relaxed);
        AllocationId(NonZeroU64::new(raw).expect("allocation ids start at 1"))
    }

    fn check_length(&self, length: Index) -> Result<(), MemoryError> {
        // The registry's own invariants need a positive length even with
        // contracts disabled.
        let strict = Contracts::new(ContractMode::Enforced);
        strict.expects(length > 0, "array length must be positive")?;
        self.contracts
            .expects(length <= max_length(), "array length exceeds the index range")?;
        Ok(())
    }

    fn insert(&self, record: AllocationRecord, storage: Option<Arc<dyn Any + Send + Sync>>) {
        self.entries.lock().insert(record.id, Entry { record, storage });
    }

    /// Creates `length` elements in `space`, every one equal to `fill`.
    pub fn create_array<T>(
        &self,
        space: MemorySpace,
        length: Index,
        fill: T,
    ) -> Result<RegisteredArray<T>, MemoryError>
    where
        T: Clone + Send + Sync + 'static,
    {
        self.check_length(length)?;
        let n = to_usize(length);
        let mut v = Vec::new();
        v.try_reserve_exact(n)
            .map_err(|_| MemoryError::AllocationFailure {
                length,
                element_size: element_size::<T>(),
            })?;
        v.resize(n, fill);
        Ok(self.adopt(space, v))
    }

    /// Registers existing contents as a new array.
    pub fn create_array_from<T>(
        &self,
        space: MemorySpace,
        values: Vec<T>,
    ) -> Result<RegisteredArray<T>, MemoryError>
    where
        T: Send + Sync + 'static,
    {
        self.check_length(from_usize(values.len()))?;
        Ok(self.adopt(space, values))
    }

    fn adopt<T: Send + Sync + 'static>(&self, space: MemorySpace, v: Vec<T>) -> RegisteredArray<T> {
        let id = self.fresh_id();
        let record = AllocationRecord {
            id,
            space,
            length: from_usize(v.len()),
            element_size: element_size::<T>(),
        };
        let storage: Arc<Storage<T>> = Arc::new(RwLock::new(v.into_boxed_slice()));
        self.insert(record, Some(storage));
        RegisteredArray {
            id,
            space,
            _elem: PhantomData,
        }
    }

    pub fn destroy_array<T>(&self, array: RegisteredArray<T>) -> Result<(), MemoryError> {
        self.release(array.id)
    }

    /// Registers an object that owns its memory (a container pool, say).
    pub fn register_object(
        &self,
        space: MemorySpace,
        length: Index,
        element_size: Index,
    ) -> Result<AllocationId, MemoryError> {
        self.check_length(length)?;
        let id = self.fresh_id();
        self.insert(
            AllocationRecord {
                id,
                space,
                length,
                element_size,
            },
            None,
        );
        Ok(id)
    }

    /// Removes a registration. Releasing an unknown id is a double free.
    pub fn release(&self, id: AllocationId) -> Result<(), MemoryError> {
        match self.entries.lock().remove(&id) {
            Some(_) => Ok(()),
            None => Err(MemoryError::DoubleFree(id)),
        }
    }

    pub fn is_registered(&self, id: AllocationId) -> bool {
        self.entries.lock().contains_key(&id)
    }

    fn lookup<T: Send + Sync + 'static>(
        &self,
        array: RegisteredArray<T>,
    ) -> Result<(Arc<Storage<T>>, AllocationRecord), MemoryError> {
        let entries = self.entries.lock();
        let entry = entries
            .get(&array.id)
            .ok_or(MemoryError::Unregistered(array.id))?;
        let storage = entry
            .storage
            .clone()
            .and_then(|s| s.downcast::<Storage<T>>().ok())
            // Ids are never reused, so a typed handle always finds its own type.
            .ok_or(MemoryError::Unregistered(array.id))?;
        Ok((storage, entry.record))
    }

    pub fn size_of_array<T: Send + Sync + 'static>(
        &self,
        array: RegisteredArray<T>,
    ) -> Result<Index, MemoryError> {
        self.lookup(array).map(|(_, r)| r.length)
    }

    /// Shared access to the elements. Holds a read lock on the array.
    pub fn read<T: Send + Sync + 'static>(
        &self,
        array: RegisteredArray<T>,
    ) -> Result<ArrayRead<T>, MemoryError> {
        let (storage, _) = self.lookup(array)?;
        Ok(ArrayRead(storage.read_arc()))
    }

    /// Exclusive access to the elements. Holds a write lock on the array.
    pub fn write<T: Send + Sync + 'static>(
        &self,
        array: RegisteredArray<T>,
    ) -> Result<ArrayWrite<T>, MemoryError> {
        let (storage, _) = self.lookup(array)?;
        Ok(ArrayWrite(storage.write_arc()))
    }

    /// Copies the first `count` elements of `src` into `dst`.
    ///
    /// Registered operands must live in the spaces `direction` names. With
    /// `check_bounds`, both operands must be registered and at least `count`
    /// long; without it, external slices are accepted as they are.
    pub fn copy_array<'s, 'd, T>(
        &self,
        src: impl Into<ArraySource<'s, T>>,
        count: Index,
        dst: impl Into<ArrayDest<'d, T>>,
        direction: Direction,
        check_bounds: bool,
    ) -> Result<(), MemoryError>
    where
        T: Clone + Send + Sync + 'static,
    {
        let src = src.into();
        let mut dst = dst.into();
        Contracts::new(ContractMode::Enforced).expects(count > 0, "copy count must be positive")?;
        let n = to_usize(count);

        let src_reg = match &src {
            ArraySource::Registered(a) => {
                Some(self.checked_operand(*a, CopySide::Source, direction.from, count, check_bounds)?)
            }
            ArraySource::External(_) if check_bounds => return Err(MemoryError::ExternalArray),
            ArraySource::External(_) => None,
        };
        let dst_reg = match &dst {
            ArrayDest::Registered(a) => Some(self.checked_operand(
                *a,
                CopySide::Destination,
                direction.to,
                count,
                check_bounds,
            )?),
            ArrayDest::External(_) if check_bounds => return Err(MemoryError::ExternalArray),
            ArrayDest::External(_) => None,
        };

        if let (Some((s, _)), Some((d, _))) = (&src_reg, &dst_reg) {
            if Arc::ptr_eq(s, d) {
                // Prefix copied onto itself.
                return Ok(());
            }
        }

        let src_guard;
        let src_slice: &[T] = match (&src, &src_reg) {
            (_, Some((s, _))) => {
                src_guard = s.read();
                &src_guard
            }
            (ArraySource::External(s), None) => s,
            (ArraySource::Registered(_), None) => unreachable!(),
        };
        let mut dst_guard;
        let dst_slice: &mut [T] = match (&mut dst, &dst_reg) {
            (_, Some((d, _))) => {
                dst_guard = d.write();
                &mut dst_guard
            }
            (ArrayDest::External(d), None) => d,
            (ArrayDest::Registered(_), None) => unreachable!(),
        };

        // Unchecked copies still never leave the actual storage.
        for (side, len) in [
            (CopySide::Source, src_slice.len()),
            (CopySide::Destination, dst_slice.len()),
        ] {
            if n > len {
                return Err(MemoryError::BoundsViolation {
                    side,
                    count,
                    length: from_usize(len),
                });
            }
        }
        dst_slice[..n].clone_from_slice(&src_slice[..n]);
        Ok(())
    }

    fn checked_operand<T: Send + Sync + 'static>(
        &self,
        array: RegisteredArray<T>,
        side: CopySide,
        expected: MemorySpace,
        count: Index,
        check_bounds: bool,
    ) -> Result<(Arc<Storage<T>>, AllocationRecord), MemoryError> {
        let (storage, record) = self.lookup(array)?;
        if record.space != expected {
            return Err(MemoryError::DirectionMismatch {
                side,
                direction: match side {
                    CopySide::Source => Direction::new(expected, record.space),
                    CopySide::Destination => Direction::new(record.space, expected),
                },
                actual: record.space,
            });
        }
        if check_bounds && count > record.length {
            return Err(MemoryError::BoundsViolation {
                side,
                count,
                length: record.length,
            });
        }
        Ok((storage, record))
    }

    /// Allocates an array in `target` holding the first `count` elements of
    /// `src`.
    pub fn copy_create_array<T>(
        &self,
        src: RegisteredArray<T>,
        count: Index,
        target: MemorySpace,
    ) -> Result<RegisteredArray<T>, MemoryError>
    where
        T: Clone + Send + Sync + 'static,
    {
        Contracts::new(ContractMode::Enforced).expects(count > 0, "copy count must be positive")?;
        let (storage, record) = self.lookup(src)?;
        if count > record.length {
            return Err(MemoryError::BoundsViolation {
                side: CopySide::Source,
                count,
                length: record.length,
            });
        }
        let values = storage.read()[..to_usize(count)].to_vec();
        self.create_array_from(target, values)
    }

    pub fn report(&self) -> RegistryReport {
        let entries = self.entries.lock();
        let mut records: Vec<AllocationRecord> = entries.values().map(|e| e.record).collect();
        records.sort_by_key(|r| r.id);
        RegistryReport {
            live_count: from_usize(records.len()),
            live_bytes: records.iter().map(|r| r.length * r.element_size).sum(),
            records,
        }
    }
}

fn element_size<T>() -> Index {
    from_usize(std::mem::size_of::<T>())
}

/// Read access to a registered array's elements.
pub struct ArrayRead<T>(ArcRwLockReadGuard<RawRwLock, Box<[T]>>);

impl<T> Deref for ArrayRead<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.0
    }
}

/// Write access to a registered array's elements.
pub struct ArrayWrite<T>(ArcRwLockWriteGuard<RawRwLock, Box<[T]>>);

impl<T> Deref for ArrayWrite<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.0
    }
}

impl<T> DerefMut for ArrayWrite<T> {
    fn deref_mut(&mut self) -> &mut [T] {
        &mut self.0
    }
}

pub fn create_array<T: Clone + Send + Sync + 'static>(
    space: MemorySpace,
    length: Index,
    fill: T,
) -> Result<RegisteredArray<T>, MemoryError> {
    Registry::global().create_array(space, length, fill)
}

pub fn destroy_array<T>(array: RegisteredArray<T>) -> Result<(), MemoryError> {
    Registry::global().destroy_array(array)
}

pub fn copy_array<'s, 'd, T: Clone + Send + Sync + 'static>(
    src: impl Into<ArraySource<'s, T>>,
    count: Index,
    dst: impl Into<ArrayDest<'d, T>>,
    direction: Direction,
    check_bounds: bool,
) -> Result<(), MemoryError> {
    Registry::global().copy_array(src, count, dst, direction, check_bounds)
}

pub fn copy_create_array<T: Clone + Send + Sync + 'static>(
    src: RegisteredArray<T>,
    count: Index,
    target: MemorySpace,
) -> Result<RegisteredArray<T>, MemoryError> {
    Registry::global().copy_create_array(src, count, target)
}

pub fn size_of_array<T: Send + Sync + 'static>(array: RegisteredArray<T>) -> Result<Index, MemoryError> {
    Registry::global().size_of_array(array)
}

pub fn registry_report() -> RegistryReport {
    Registry::global().report()
}
