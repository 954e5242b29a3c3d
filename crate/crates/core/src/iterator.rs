//! Space-tagged positions in registered arrays, and insert iterators.

use std::fmt;

use crate::contract::expects;
use crate::index::{to_usize, Index};
use crate::memory::{MemoryError, MemorySpace, RegisteredArray, Registry};
use crate::sequential::{ParDeque, ParVector};

/// A position in a registered array. The array's memory space travels with
/// it so algorithms can tell host data from device data.
pub struct TaggedIterator<T> {
    array: RegisteredArray<T>,
    position: Index,
    length: Index,
}

impl<T> Clone for TaggedIterator<T> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<T> Copy for TaggedIterator<T> {}

impl<T> PartialEq for TaggedIterator<T> {
    fn eq(&self, other: &Self) -> bool {
        self.array == other.array && self.position == other.position
    }
}

impl<T> Eq for TaggedIterator<T> {}

impl<T> fmt::Debug for TaggedIterator<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}+{}", self.array, self.position)
    }
}

pub fn array_begin<T: Send + Sync + 'static>(
    array: RegisteredArray<T>,
) -> Result<TaggedIterator<T>, MemoryError> {
    let length = Registry::global().size_of_array(array)?;
    Ok(TaggedIterator {
        array,
        position: 0,
        length,
    })
}

pub fn array_end<T: Send + Sync + 'static>(
    array: RegisteredArray<T>,
) -> Result<TaggedIterator<T>, MemoryError> {
    let begin = array_begin(array)?;
    Ok(TaggedIterator {
        position: begin.length,
        ..begin
    })
}

/// [`array_begin`] for an array that must live in device memory.
#[track_caller]
pub fn device_begin<T: Send + Sync + 'static>(
    array: RegisteredArray<T>,
) -> Result<TaggedIterator<T>, MemoryError> {
    expects(array.space() == MemorySpace::Device, "array is not in device memory");
    array_begin(array)
}

#[track_caller]
pub fn device_end<T: Send + Sync + 'static>(
    array: RegisteredArray<T>,
) -> Result<TaggedIterator<T>, MemoryError> {
    expects(array.space() == MemorySpace::Device, "array is not in device memory");
    array_end(array)
}

#[track_caller]
pub fn host_begin<T: Send + Sync + 'static>(
    array: RegisteredArray<T>,
) -> Result<TaggedIterator<T>, MemoryError> {
    expects(array.space() == MemorySpace::Host, "array is not in host memory");
    array_begin(array)
}

#[track_caller]
pub fn host_end<T: Send + Sync + 'static>(
    array: RegisteredArray<T>,
) -> Result<TaggedIterator<T>, MemoryError> {
    expects(array.space() == MemorySpace::Host, "array is not in host memory");
    array_end(array)
}

impl<T: Send + Sync + 'static> TaggedIterator<T> {
    pub fn space(&self) -> MemorySpace {
        self.array.space()
    }

    pub fn array(&self) -> RegisteredArray<T> {
        self.array
    }

    pub fn position(&self) -> Index {
        self.position
    }

    /// `other - self`; both must address the same array.
    #[track_caller]
    pub fn distance_to(&self, other: &Self) -> Index {
        expects(self.array == other.array, "iterators of different arrays");
        other.position - self.position
    }

    /// Moves by `n` elements, staying within `[0, length]`.
    #[track_caller]
    pub fn advance(self, n: Index) -> Self {
        let position = self.position + n;
        expects((0..=self.length).contains(&position), "iterator moved out of its array");
        TaggedIterator { position, ..self }
    }

    /// The element under the iterator.
    #[track_caller]
    pub fn read(&self) -> Result<T, MemoryError>
    where
        T: Clone,
    {
        expects(self.position < self.length, "dereferencing an end iterator");
        let data = Registry::global().read(self.array)?;
        Ok(data[to_usize(self.position)].clone())
    }

    /// Elements of `[self, end)` in index order.
    #[track_caller]
    pub fn collect_to(&self, end: &Self) -> Result<Vec<T>, MemoryError>
    where
        T: Clone,
    {
        let n = self.distance_to(end);
        expects(n >= 0, "begin is past end");
        let data = Registry::global().read(self.array)?;
        Ok(data[to_usize(self.position)..to_usize(end.position)].to_vec())
    }

    /// Runs `f` on `[self, end)` as a mutable slice, e.g. to sort it.
    #[track_caller]
    pub fn with_slice_mut<R>(
        &self,
        end: &Self,
        f: impl FnOnce(&mut [T]) -> R,
    ) -> Result<R, MemoryError> {
        let n = self.distance_to(end);
        expects(n >= 0, "begin is past end");
        let mut data = Registry::global().write(self.array)?;
        Ok(f(&mut data[to_usize(self.position)..to_usize(end.position)]))
    }
}

/// An output position that appends into a container.
pub trait InsertIterator<T> {
    /// `false` when the container rejected the value.
    fn insert(&mut self, value: T) -> bool;
}

/// Anything with a thread-safe `push_back`.
pub trait PushBack<T> {
    fn push_back(&self, value: T) -> bool;
}

/// Anything with a thread-safe `push_front`.
pub trait PushFront<T> {
    fn push_front(&self, value: T) -> bool;
}

impl<T: Send> PushBack<T> for ParVector<T> {
    fn push_back(&self, value: T) -> bool {
        ParVector::push_back(self, value)
    }
}

impl<T: Send> PushBack<T> for ParDeque<T> {
    fn push_back(&self, value: T) -> bool {
        ParDeque::push_back(self, value)
    }
}

impl<T: Send> PushFront<T> for ParDeque<T> {
    fn push_front(&self, value: T) -> bool {
        ParDeque::push_front(self, value)
    }
}

pub struct BackInserter<'a, C> {
    container: &'a C,
}

pub struct FrontInserter<'a, C> {
    container: &'a C,
}

pub fn back_inserter<C>(container: &C) -> BackInserter<'_, C> {
    BackInserter { container }
}

pub fn front_inserter<C>(container: &C) -> FrontInserter<'_, C> {
    FrontInserter { container }
}

impl<T, C: PushBack<T>> InsertIterator<T> for BackInserter<'_, C> {
    fn insert(&mut self, value: T) -> bool {
        self.container.push_back(value)
    }
}

impl<T, C: PushFront<T>> InsertIterator<T> for FrontInserter<'_, C> {
    fn insert(&mut self, value: T) -> bool {
        self.container.push_front(value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CopyReport {
    pub inserted: Index,
    pub failed: Index,
}

/// Feeds every item of `source` through `out`.
pub fn copy_into<T, O: InsertIterator<T>>(
    source: impl IntoIterator<Item = T>,
    out: &mut O,
) -> CopyReport {
    let mut report = CopyReport::default();
    for item in source {
        if out.insert(item) {
            report.inserted += 1;
        } else {
            report.failed += 1;
        }
    }
    report
}
