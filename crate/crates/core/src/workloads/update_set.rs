use std::sync::atomic::{AtomicI64, Ordering};

use super::blocks::{candidates, BlockCoord, BlockMap, BlockSet};
use crate::index::{from_usize, to_usize, Index};
use crate::launch::{launch, LaunchConfig, LaunchError};
use crate::memory::MemoryError;
use crate::unordered::{InsertStatus, RangeInsertError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct UpdateSetReport {
    /// Candidate blocks that exist in the map (with repetitions).
    pub candidates_found: Index,
    /// Candidates dropped because the update set was full.
    pub rejected: Index,
}

/// For each input block, one logical thread inserts those of its eight
/// candidate blocks that exist in `map` into `update_set`.
pub fn compute_update_set(
    blocks: &[BlockCoord],
    map: &BlockMap,
    update_set: &BlockSet,
    config: LaunchConfig,
) -> Result<UpdateSetReport, LaunchError> {
    let found = AtomicI64::new(0);
    let rejected = AtomicI64::new(0);
    launch(
        LaunchConfig {
            total_threads: from_usize(blocks.len()),
            ..config
        },
        |i| {
            for c in candidates(blocks[to_usize(i)]) {
                if map.contains(&c) {
                    found.fetch_add(1, Ordering::Relaxed);
                    if update_set.insert(c).status == InsertStatus::CapacityExhausted {
                        rejected.fetch_add(1, Ordering::Relaxed);
                    }
                }
            }
        },
    )?;
    Ok(UpdateSetReport {
        candidates_found: found.into_inner() as Index,
        rejected: rejected.into_inner() as Index,
    })
}

/// The set of blocks queued for streaming to one client.
#[derive(Debug)]
pub struct StreamSet {
    set: BlockSet,
}

impl StreamSet {
    pub fn create(capacity: Index) -> Result<StreamSet, MemoryError> {
        Ok(StreamSet {
            set: BlockSet::create(capacity)?,
        })
    }

    pub fn add_blocks(&self, blocks: &[BlockCoord]) -> Result<Index, RangeInsertError> {
        self.set.insert_range(blocks.iter().copied())
    }

    pub fn blocks(&self) -> &BlockSet {
        &self.set
    }

    pub fn destroy(self) -> Result<(), MemoryError> {
        self.set.destroy()
    }
}
