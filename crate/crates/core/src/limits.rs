//! Numeric limits of the supported arithmetic types.

use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TypeTag {
    I8,
    I16,
    I32,
    I64,
    U8,
    U16,
    U32,
    U64,
    F32,
    F64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unsupported arithmetic type `{0}`")]
pub struct UnsupportedType(pub String);

impl FromStr for TypeTag {
    type Err = UnsupportedType;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "i8" => TypeTag::I8,
            "i16" => TypeTag::I16,
            "i32" => TypeTag::I32,
            "i64" => TypeTag::I64,
            "u8" => TypeTag::U8,
            "u16" => TypeTag::U16,
            "u32" => TypeTag::U32,
            "u64" => TypeTag::U64,
            "f32" => TypeTag::F32,
            "f64" => TypeTag::F64,
            other => return Err(UnsupportedType(other.to_string())),
        })
    }
}

/// An exact bound. Integer bounds of every supported width fit in `i128`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Int(i128),
    Float(f64),
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Int(v) => write!(f, "{v}"),
            Bound::Float(v) => write!(f, "{v:e}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    /// Most negative finite value.
    pub lowest: Bound,
    pub max: Bound,
    /// Smallest positive normal value; floats only.
    pub min_positive: Option<f64>,
    pub epsilon: Option<f64>,
}

macro_rules! int_limits {
    ($t:ty) => {
        Limits {
            lowest: Bound::Int(<$t>::MIN as i128),
            max: Bound::Int(<$t>::MAX as i128),
            min_positive: None,
            epsilon: None,
        }
    };
}

macro_rules! float_limits {
    ($t:ty) => {
        Limits {
            lowest: Bound::Float(<$t>::MIN as f64),
            max: Bound::Float(<$t>::MAX as f64),
            min_positive: Some(<$t>::MIN_POSITIVE as f64),
            epsilon: Some(<$t>::EPSILON as f64),
        }
    };
}

pub fn numeric_limits_of(tag: TypeTag) -> Limits {
    match tag {
        TypeTag::I8 => int_limits!(i8),
        TypeTag::I16 => int_limits!(i16),
        TypeTag::I32 => int_limits!(i32),
        TypeTag::I64 => int_limits!(i64),
        TypeTag::U8 => int_limits!(u8),
        TypeTag::U16 => int_limits!(u16),
        TypeTag::U32 => int_limits!(u32),
        TypeTag::U64 => int_limits!(u64),
        TypeTag::F32 => float_limits!(f32),
        TypeTag::F64 => float_limits!(f64),
    }
}

/// Looks up limits by type name (`"i32"`, `"f64"`, ...).
pub fn numeric_limits(name: &str) -> Result<Limits, UnsupportedType> {
    name.parse().map(numeric_limits_of)
}
