//! Fixed-capacity containers that stay correct under heavy data-parallel
//! use.
//!
//! Work is expressed as a *launch*: a function called once for every logical
//! thread index in `0..n`, spread over a pool of workers
//! ([`launch::launch`]). Every container operation may be called from inside
//! a launch body, concurrently with any other operation on the same
//! container, except for the few marked as requiring quiescence. Capacities
//! are fixed at creation, and running out of capacity is the only way an
//! operation can fail.
//!
//! | container | module |
//! |---|---|
//! | [`UnorderedMap`], [`UnorderedSet`] | [`unordered`] |
//! | [`ParVector`], [`ParDeque`] | [`sequential`] |
//! | [`Bitset`], [`MutexArray`], [`AtomicCell`] | [`bitset`], [`mutex`], [`atomic`] |
//!
//! Arrays are created through the leak-detecting [`memory`] registry, which
//! also tracks the storage of every container until it is destroyed.

pub mod atomic;
pub mod bit;
pub mod bitset;
pub mod config;
pub mod contract;
pub mod functional;
pub mod index;
pub mod iterator;
pub mod launch;
pub mod limits;
pub mod memory;
pub mod mutex;
pub mod ranges;
pub mod sequential;
pub mod unordered;
pub mod workloads;

pub use atomic::AtomicCell;
pub use bitset::Bitset;
pub use contract::{ensures, expects, ContractMode, ContractViolation};
pub use functional::{spatial_hash, DefaultHasher, EqualTo};
pub use index::Index;
pub use launch::{for_each_index, launch, LaunchConfig, LaunchError};
pub use memory::{MemoryError, MemorySpace, RegisteredArray};
pub use mutex::MutexArray;
pub use ranges::{select_into, EntryRange, SelectReport};
pub use sequential::{ParDeque, ParVector};
pub use unordered::{EntryHandle, InsertResult, InsertStatus, UnorderedMap, UnorderedSet};
