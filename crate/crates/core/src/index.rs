//! Signed index type shared by every container.
//!
//! Sizes, capacities and slot positions are all [`Index`] values. Negative
//! values only ever show up as sentinels or inside arithmetic.

/// 32-bit index, available regardless of the configured width.
pub type Index32 = i32;
/// 64-bit index, available regardless of the configured width.
pub type Index64 = i64;

#[cfg(feature = "index32")]
pub type Index = Index32;
#[cfg(not(feature = "index32"))]
pub type Index = Index64;

/// Largest value of the compiled index type.
pub const INDEX_MAX: Index = Index::MAX;

/// Largest length or capacity accepted under the active configuration.
///
/// With `PARASTORE_INDEX32` set, sizes are limited to the 32-bit range even
/// when the crate is built with 64-bit indices.
pub fn max_length() -> Index {
    if crate::config::get().index32 {
        // Fits in both widths.
        Index32::MAX as Index
    } else {
        INDEX_MAX
    }
}

#[inline]
pub(crate) fn to_usize(i: Index) -> usize {
    debug_assert!(i >= 0, "negative index {i} used as a position");
    i as usize
}

#[inline]
pub(crate) fn from_usize(n: usize) -> Index {
    n as Index
}
