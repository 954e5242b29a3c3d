//! Generic wrapper over the standard integer atomics.

use std::fmt;
use std::sync::atomic::{self, Ordering};

/// Integer types with a native atomic counterpart.
pub trait AtomicPrimitive: Copy + Eq + Ord + fmt::Debug + Send + Sync + 'static {
    type Repr: Send + Sync;

    fn new_repr(v: Self) -> Self::Repr;
    fn load(r: &Self::Repr, order: Ordering) -> Self;
    fn store(r: &Self::Repr, v: Self, order: Ordering);
    fn swap(r: &Self::Repr, v: Self, order: Ordering) -> Self;
    fn compare_exchange(
        r: &Self::Repr,
        current: Self,
        new: Self,
        success: Ordering,
        failure: Ordering,
    ) -> Result<Self, Self>;
    fn fetch_add(r: &Self::Repr, v: Self, order: Ordering) -> Self;
    fn fetch_sub(r: &Self::Repr, v: Self, order: Ordering) -> Self;
    fn fetch_min(r: &Self::Repr, v: Self, order: Ordering) -> Self;
    fn fetch_max(r: &Self::Repr, v: Self, order: Ordering) -> Self;
    fn fetch_and(r: &Self::Repr, v: Self, order: Ordering) -> Self;
    fn fetch_or(r: &Self::Repr, v: Self, order: Ordering) -> Self;
    fn fetch_xor(r: &Self::Repr, v: Self, order: Ordering) -> Self;
}

macro_rules! impl_primitive {
    ($($t:ty => $a:ty),* $(,)?) => {$(
        impl AtomicPrimitive for $t {
            type Repr = $a;
            fn new_repr(v: Self) -> $a { <$a>::new(v) }
            fn load(r: &$a, o: Ordering) -> Self { r.load(o) }
            fn store(r: &$a, v: Self, o: Ordering) { r.store(v, o) }
            fn swap(r: &$a, v: Self, o: Ordering) -> Self { r.swap(v, o) }
            fn compare_exchange(r: &$a, c: Self, n: Self, s: Ordering, f: Ordering) -> Result<Self, Self> {
                r.compare_exchange(c, n, s, f)
            }
            fn fetch_add(r: &$a, v: Self, o: Ordering) -> Self { r.fetch_add(v, o) }
            fn fetch_sub(r: &$a, v: Self, o: Ordering) -> Self { r.fetch_sub(v, o) }
            fn fetch_min(r: &$a, v: Self, o: Ordering) -> Self { r.fetch_min(v, o) }
            fn fetch_max(r: &$a, v: Self, o: Ordering) -> Self { r.fetch_max(v, o) }
            fn fetch_and(r: &$a, v: Self, o: Ordering) -> Self { r.fetch_and(v, o) }
            fn fetch_or(r: &$a, v: Self, o: Ordering) -> Self { r.fetch_or(v, o) }
            fn fetch_xor(r: &$a, v: Self, o: Ordering) -> Self { r.fetch_xor(v, o) }
        }
    )*};
}

impl_primitive!(
    i8 => atomic::AtomicI8,
    i16 => atomic::AtomicI16,
    i32 => atomic::AtomicI32,
    i64 => atomic::AtomicI64,
    isize => atomic::AtomicIsize,
    u8 => atomic::AtomicU8,
    u16 => atomic::AtomicU16,
    u32 => atomic::AtomicU32,
    u64 => atomic::AtomicU64,
    usize => atomic::AtomicUsize,
);

/// An integer cell whose read-modify-write operations are all atomic.
///
/// Loads use `Acquire`, stores `Release`, and read-modify-writes `AcqRel`.
pub struct AtomicCell<T: AtomicPrimitive> {
    repr: T::Repr,
}

impl<T: AtomicPrimitive> AtomicCell<T> {
    pub fn new(v: T) -> Self {
        AtomicCell { repr: T::new_repr(v) }
    }

    #[inline]
    pub fn load(&self) -> T {
        T::load(&self.repr, Ordering::Acquire)
    }

    #[inline]
    pub fn store(&self, v: T) {
        T::store(&self.repr, v, Ordering::Release)
    }

    #[inline]
    pub fn exchange(&self, v: T) -> T {
        T::swap(&self.repr, v, Ordering::AcqRel)
    }

    #[inline]
    pub fn compare_exchange(&self, current: T, new: T) -> Result<T, T> {
        T::compare_exchange(&self.repr, current, new, Ordering::AcqRel, Ordering::Acquire)
    }

    #[inline]
    pub fn fetch_add(&self, v: T) -> T {
        T::fetch_add(&self.repr, v, Ordering::AcqRel)
    }

    #[inline]
    pub fn fetch_sub(&self, v: T) -> T {
        T::fetch_sub(&self.repr, v, Ordering::AcqRel)
    }

    #[inline]
    pub fn fetch_min(&self, v: T) -> T {
        T::fetch_min(&self.repr, v, Ordering::AcqRel)
    }

    #[inline]
    pub fn fetch_max(&self, v: T) -> T {
        T::fetch_max(&self.repr, v, Ordering::AcqRel)
    }

    #[inline]
    pub fn fetch_and(&self, v: T) -> T {
        T::fetch_and(&self.repr, v, Ordering::AcqRel)
    }

    #[inline]
    pub fn fetch_or(&self, v: T) -> T {
        T::fetch_or(&self.repr, v, Ordering::AcqRel)
    }

    #[inline]
    pub fn fetch_xor(&self, v: T) -> T {
        T::fetch_xor(&self.repr, v, Ordering::AcqRel)
    }
}

impl<T: AtomicPrimitive + Default> Default for AtomicCell<T> {
    fn default() -> Self {
        AtomicCell::new(T::default())
    }
}

impl<T: AtomicPrimitive> fmt::Debug for AtomicCell<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("AtomicCell").field(&self.load()).finish()
    }
}
