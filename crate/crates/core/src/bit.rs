//! Bit tricks on unsigned words.

use crate::contract::expects;

#[inline]
pub fn is_power_of_two(x: u64) -> bool {
    x != 0 && x & (x - 1) == 0
}

/// Smallest power of two `>= x`. `next_power_of_two(0) == 1`.
#[inline]
pub fn next_power_of_two(x: u64) -> u64 {
    expects(x <= 1 << 63, "next_power_of_two: result must fit in 64 bits");
    x.next_power_of_two()
}

/// `x mod m` for a power-of-two `m`.
#[inline]
#[track_caller]
pub fn mod_power_of_two(x: u64, m: u64) -> u64 {
    expects(is_power_of_two(m), "mod_power_of_two: modulus must be a power of two");
    x & m.wrapping_sub(1)
}

#[inline]
pub fn popcount(x: u64) -> u32 {
    x.count_ones()
}
