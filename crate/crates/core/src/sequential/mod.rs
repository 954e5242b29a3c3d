//! Fixed-capacity vector and deque usable from launch bodies.
//!
//! Both reserve element positions with a single compare-exchange on their
//! counters and then wait, with backoff, for the slot to be ready: a push
//! waits until an earlier pop of the same slot has moved its value out, a pop
//! until the matching push has written. Mixed concurrent pushes and pops on
//! the same end conserve elements but promise no order.

mod deque;
mod slots;
mod vector;

pub use deque::{ParDeque, MAX_DEQUE_CAPACITY};
pub use vector::ParVector;

use crate::contract::{ContractMode, Contracts};
use crate::index::{max_length, Index};
use crate::memory::{AllocationId, MemoryError, MemorySpace, Registry};

fn register<T>(capacity: Index, limit: Index) -> Result<AllocationId, MemoryError> {
    let strict = Contracts::new(ContractMode::Enforced);
    strict.expects(capacity > 0, "capacity must be positive")?;
    strict.expects(
        capacity <= limit.min(max_length()),
        "capacity exceeds the supported range",
    )?;
    Registry::global().register_object(
        MemorySpace::Device,
        capacity,
        std::mem::size_of::<T>().max(1) as Index,
    )
}
