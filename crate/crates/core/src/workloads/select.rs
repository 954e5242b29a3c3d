use super::blocks::{BlockCoord, BlockSet};
use crate::launch::{LaunchConfig, LaunchError};
use crate::ranges::{select_into, SelectReport};
use crate::sequential::ParVector;

/// Axis-aligned box with inclusive bounds. Empty when `lo > hi` on any
/// axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockBox {
    pub lo: BlockCoord,
    pub hi: BlockCoord,
}

impl BlockBox {
    pub fn contains(&self, b: &BlockCoord) -> bool {
        (self.lo.x..=self.hi.x).contains(&b.x)
            && (self.lo.y..=self.hi.y).contains(&b.y)
            && (self.lo.z..=self.hi.z).contains(&b.z)
    }
}

/// Copies the blocks of `set` inside `bounds` into `selected`, which is
/// cleared first.
pub fn select_blocks(
    set: &BlockSet,
    bounds: BlockBox,
    selected: &ParVector<BlockCoord>,
    config: LaunchConfig,
) -> Result<SelectReport, LaunchError> {
    let range = set.device_range();
    select_into(&range, |b| bounds.contains(b), selected, config)
}
