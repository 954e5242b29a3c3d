//! Hash and equality functors used by the hash containers.

use std::marker::PhantomData;

/// Multipliers of the 3D spatial hash.
pub const SPATIAL_PRIMES: [i32; 3] = [73_856_093, 19_349_669, 83_492_791];

/// Spatial hash of an integer 3D coordinate: each component is multiplied by
/// a large prime and the products are combined with XOR.
///
/// Arithmetic happens on 32-bit signed integers with wrap-around, and the
/// result is sign-extended into the 64-bit hash, matching what a C++
/// `int` expression converted to `std::size_t` produces.
#[inline]
pub fn spatial_hash(x: i32, y: i32, z: i32) -> u64 {
    let h = x.wrapping_mul(SPATIAL_PRIMES[0])
        ^ y.wrapping_mul(SPATIAL_PRIMES[1])
        ^ z.wrapping_mul(SPATIAL_PRIMES[2]);
    h as i64 as u64
}

/// Types with a default hash. Implement this for custom key types.
pub trait DefaultHash {
    fn default_hash(&self) -> u64;
}

macro_rules! identity_hash {
    ($($t:ty),*) => {
        $(impl DefaultHash for $t {
            #[inline]
            fn default_hash(&self) -> u64 {
                *self as u64
            }
        })*
    };
}

identity_hash!(u8, u16, u32, u64, usize, i8, i16, i32, i64, isize);

impl DefaultHash for [i32; 3] {
    fn default_hash(&self) -> u64 {
        spatial_hash(self[0], self[1], self[2])
    }
}

impl DefaultHash for [i16; 3] {
    fn default_hash(&self) -> u64 {
        spatial_hash(self[0].into(), self[1].into(), self[2].into())
    }
}

/// A hash function over keys of type `K`.
pub trait KeyHasher<K: ?Sized> {
    fn hash(&self, key: &K) -> u64;
}

/// Dispatches to [`DefaultHash`].
#[derive(Debug, Clone, Copy, Default)]
pub struct DefaultHasher;

impl<K: DefaultHash + ?Sized> KeyHasher<K> for DefaultHasher {
    #[inline]
    fn hash(&self, key: &K) -> u64 {
        key.default_hash()
    }
}

/// Adapts a closure into a [`KeyHasher`].
pub struct HashFn<F, K: ?Sized>(pub F, PhantomData<fn(&K)>);

impl<F, K: ?Sized> HashFn<F, K> {
    pub fn new(f: F) -> Self {
        HashFn(f, PhantomData)
    }
}

impl<F: Fn(&K) -> u64, K: ?Sized> KeyHasher<K> for HashFn<F, K> {
    #[inline]
    fn hash(&self, key: &K) -> u64 {
        (self.0)(key)
    }
}

/// Key equality predicate.
pub trait KeyEqual<K: ?Sized> {
    fn eq(&self, a: &K, b: &K) -> bool;
}

/// Equality through `PartialEq`.
#[derive(Debug, Clone, Copy, Default)]
pub struct EqualTo;

impl<K: PartialEq + ?Sized> KeyEqual<K> for EqualTo {
    #[inline]
    fn eq(&self, a: &K, b: &K) -> bool {
        a == b
    }
}

pub struct EqFn<F, K: ?Sized>(pub F, PhantomData<fn(&K)>);

impl<F, K: ?Sized> EqFn<F, K> {
    pub fn new(f: F) -> Self {
        EqFn(f, PhantomData)
    }
}

impl<F: Fn(&K, &K) -> bool, K: ?Sized> KeyEqual<K> for EqFn<F, K> {
    #[inline]
    fn eq(&self, a: &K, b: &K) -> bool {
        (self.0)(a, b)
    }
}
