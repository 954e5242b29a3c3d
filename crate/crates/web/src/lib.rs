//! WebAssembly bindings for the spatial-hashing workloads, used by the
//! static page in `www/`. Each export returns a flat array the page draws
//! directly.

use parastore::workloads::{
    compute_update_set, dense_block_map, extract_count, random_blocks, select_blocks, BlockBox,
    BlockCoord, BlockSet, EdgeCrossing, SphereField,
};
use parastore::{Index, LaunchConfig, ParVector};
use wasm_bindgen::prelude::*;

const MAX_EXTENT: i16 = 48;

fn check_extent(extent: i16) -> Result<(), String> {
    if (1..=MAX_EXTENT).contains(&extent) {
        Ok(())
    } else {
        Err(format!("extent must be between 1 and {MAX_EXTENT}"))
    }
}

fn flatten(mut blocks: Vec<BlockCoord>) -> Vec<i16> {
    blocks.sort_unstable();
    blocks.iter().flat_map(|b| [b.x, b.y, b.z]).collect()
}

/// Update set of `count` random input blocks. Returns the sorted blocks as
/// `x, y, z` triples followed by the input blocks, with the number of
/// update-set blocks first.
pub fn update_set_blocks(extent: i16, count: u32, seed: u64) -> Result<Vec<i16>, String> {
    check_extent(extent)?;
    let map = dense_block_map(extent).map_err(|e| e.to_string())?;
    let inputs = random_blocks(extent, count as usize, seed);
    let set = BlockSet::create((8 * Index::from(count)).max(1)).map_err(|e| e.to_string())?;
    compute_update_set(&inputs, &map, &set, LaunchConfig::new(0)).map_err(|e| e.to_string())?;
    let blocks: Vec<BlockCoord> = set.device_range().iter().collect();
    set.destroy().map_err(|e| e.to_string())?;
    map.destroy().map_err(|e| e.to_string())?;

    let mut out = vec![blocks.len() as i16];
    out.extend(flatten(blocks));
    out.extend(flatten(inputs));
    Ok(out)
}

/// Blocks of a dense grid inside the inclusive box, as sorted triples.
pub fn selected_blocks(extent: i16, lo: [i16; 3], hi: [i16; 3]) -> Result<Vec<i16>, String> {
    check_extent(extent)?;
    let cube = Index::from(extent).pow(3);
    let set = BlockSet::create(cube).map_err(|e| e.to_string())?;
    let grid = (0..extent)
        .flat_map(|x| (0..extent).flat_map(move |y| (0..extent).map(move |z| BlockCoord::new(x, y, z))));
    set.insert_range(grid).map_err(|e| e.to_string())?;
    let out = ParVector::create(cube).map_err(|e| e.to_string())?;
    let bounds = BlockBox {
        lo: BlockCoord::new(lo[0], lo[1], lo[2]),
        hi: BlockCoord::new(hi[0], hi[1], hi[2]),
    };
    select_blocks(&set, bounds, &out, LaunchConfig::new(0)).map_err(|e| e.to_string())?;
    let blocks = out.drain();
    out.destroy().map_err(|e| e.to_string())?;
    set.destroy().map_err(|e| e.to_string())?;
    Ok(flatten(blocks))
}

/// Edge crossings of a sphere as sorted `cell, edge` pairs.
pub fn edge_crossings(extent: i16, radius: f64) -> Result<Vec<u32>, String> {
    check_extent(extent)?;
    let field = SphereField::new(extent as usize, radius);
    let out = ParVector::<EdgeCrossing>::create(12 * field.cell_count()).map_err(|e| e.to_string())?;
    extract_count(&field, &out, LaunchConfig::new(0)).map_err(|e| e.to_string())?;
    let mut records = out.drain();
    out.destroy().map_err(|e| e.to_string())?;
    records.sort_unstable();
    Ok(records
        .iter()
        .flat_map(|r| [r.cell as u32, u32::from(r.edge)])
        .collect())
}

#[wasm_bindgen]
pub fn update_set(extent: i16, count: u32, seed: u64) -> Result<Vec<i16>, JsValue> {
    update_set_blocks(extent, count, seed).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn select_box(extent: i16, x0: i16, y0: i16, z0: i16, x1: i16, y1: i16, z1: i16) -> Result<Vec<i16>, JsValue> {
    selected_blocks(extent, [x0, y0, z0], [x1, y1, z1]).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn extract(extent: i16, radius: f64) -> Result<Vec<u32>, JsValue> {
    edge_crossings(extent, radius).map_err(|e| JsValue::from_str(&e))
}
