use bytemuck::{Pod, Zeroable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::functional::{spatial_hash, DefaultHash};
use crate::index::Index;
use crate::memory::MemoryError;
use crate::unordered::{UnorderedMap, UnorderedSet};

/// Discrete coordinate of a voxel block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Pod, Zeroable)]
#[repr(C)]
pub struct BlockCoord {
    pub x: i16,
    pub y: i16,
    pub z: i16,
}

impl BlockCoord {
    pub const fn new(x: i16, y: i16, z: i16) -> BlockCoord {
        BlockCoord { x, y, z }
    }

    /// Component-wise `self - (dx, dy, dz)`, wrapping like 16-bit C integers.
    pub fn minus(self, dx: i16, dy: i16, dz: i16) -> BlockCoord {
        BlockCoord {
            x: self.x.wrapping_sub(dx),
            y: self.y.wrapping_sub(dy),
            z: self.z.wrapping_sub(dz),
        }
    }
}

impl DefaultHash for BlockCoord {
    #[inline]
    fn default_hash(&self) -> u64 {
        spatial_hash(self.x.into(), self.y.into(), self.z.into())
    }
}

/// Block map with an occupancy marker as payload.
pub type BlockMap = UnorderedMap<BlockCoord, u32>;
pub type BlockSet = UnorderedSet<BlockCoord>;

/// The blocks whose marching-cubes cells touch block `b`.
pub fn candidates(b: BlockCoord) -> [BlockCoord; 8] {
    [
        b.minus(0, 0, 0),
        b.minus(1, 0, 0),
        b.minus(0, 1, 0),
        b.minus(0, 0, 1),
        b.minus(1, 1, 0),
        b.minus(1, 0, 1),
        b.minus(0, 1, 1),
        b.minus(1, 1, 1),
    ]
}

/// A map holding every block of `[0, extent)^3`.
pub fn dense_block_map(extent: i16) -> Result<BlockMap, MemoryError> {
    let e = Index::from(extent.max(1));
    let map = BlockMap::create(e * e * e)?;
    for x in 0..extent {
        for y in 0..extent {
            for z in 0..extent {
                map.insert(BlockCoord::new(x, y, z), 1);
            }
        }
    }
    Ok(map)
}

/// `count` blocks drawn uniformly from `[0, extent)^3`.
pub fn random_blocks(extent: i16, count: usize, seed: u64) -> Vec<BlockCoord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = extent.max(1);
    (0..count)
        .map(|_| {
            BlockCoord::new(
                rng.random_range(0..e),
                rng.random_range(0..e),
                rng.random_range(0..e),
            )
        })
        .collect()
}
