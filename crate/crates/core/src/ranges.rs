//! Snapshot ranges over container contents and a parallel filter on them.

use std::fmt;
use std::sync::atomic::{AtomicI64, Ordering};

use crate::contract::expects;
use crate::index::{from_usize, to_usize, Index};
use crate::launch::{launch, LaunchConfig, LaunchError};
use crate::sequential::ParVector;

/// A materialized view of a container's live entries: a buffer of positions
/// plus an accessor turning a position into an entry.
///
/// Built under quiescence; it does not follow later modifications.
pub struct EntryRange<'a, T> {
    positions: Vec<Index>,
    accessor: Box<dyn Fn(Index) -> T + Send + Sync + 'a>,
}

impl<'a, T> EntryRange<'a, T> {
    pub fn new(positions: Vec<Index>, accessor: impl Fn(Index) -> T + Send + Sync + 'a) -> Self {
        EntryRange {
            positions,
            accessor: Box::new(accessor),
        }
    }

    pub fn len(&self) -> Index {
        from_usize(self.positions.len())
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Index] {
        &self.positions
    }

    /// Entry number `k` of the range.
    #[track_caller]
    pub fn get(&self, k: Index) -> T {
        expects(k >= 0 && k < self.len(), "range index out of bounds");
        (self.accessor)(self.positions[to_usize(k)])
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = T> + '_ {
        self.positions.iter().map(|&p| (self.accessor)(p))
    }
}

impl<T> fmt::Debug for EntryRange<'_, T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EntryRange")
            .field("len", &self.positions.len())
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SelectReport {
    /// Matches appended to the output.
    pub copied: Index,
    /// Matches dropped because the output was full.
    pub overflowed: Index,
}

impl SelectReport {
    pub fn matched(&self) -> Index {
        self.copied + self.overflowed
    }
}

/// Clears `out`, then appends every entry of `range` satisfying `predicate`,
/// one logical thread per entry. `config.total_threads` is ignored.
pub fn select_into<T, P>(
    range: &EntryRange<'_, T>,
    predicate: P,
    out: &ParVector<T>,
    config: LaunchConfig,
) -> Result<SelectReport, LaunchError>
where
    T: Send + Sync,
    P: Fn(&T) -> bool + Sync,
{
    out.clear();
    let copied = AtomicI64::new(0);
    let overflowed = AtomicI64::new(0);
    launch(
        LaunchConfig {
            total_threads: range.len(),
            ..config
        },
        |k| {
            let item = range.get(k);
            if predicate(&item) {
                let counter = if out.push_back(item) { &copied } else { &overflowed };
                counter.fetch_add(1, Ordering::Relaxed);
            }
        },
    )?;
    Ok(SelectReport {
        copied: copied.into_inner() as Index,
        overflowed: overflowed.into_inner() as Index,
    })
}
