//! Scalar element types and the semirings the multiply kernels are generic over.

use std::fmt::Debug;

/// Matrix Market field keyword a scalar type is written as.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmField {
    Real,
    Integer,
    Pattern,
}

impl MmField {
    pub fn keyword(self) -> &'static str {
        match self {
            MmField::Real => "real",
            MmField::Integer => "integer",
            MmField::Pattern => "pattern",
        }
    }
}

/// Element type stored in a [`SparseMatrix`](crate::SparseMatrix).
pub trait Scalar: Copy + PartialEq + Debug + Send + Sync + 'static {
    const FIELD: MmField;

    /// Parse one Matrix Market value token. Real files are accepted for every
    /// scalar type (integers round, booleans test `!= 0`).
    fn parse_token(tok: &str) -> Option<Self>;

    /// Value token written after the coordinates; `None` for pattern output.
    fn format_token(&self) -> Option<String>;

    fn to_f64(self) -> f64;

    /// Bit-exact identity used by determinism checks (distinguishes -0.0 and NaN payloads).
    fn bits(self) -> u64;
}

impl Scalar for f64 {
    const FIELD: MmField = MmField::Real;

    fn parse_token(tok: &str) -> Option<Self> {
        tok.parse::<f64>().ok()
    }

    fn format_token(&self) -> Option<String> {
        Some(format!("{self:?}"))
    }

    fn to_f64(self) -> f64 {
        self
    }

    fn bits(self) -> u64 {
        self.to_bits()
    }
}

impl Scalar for i64 {
    const FIELD: MmField = MmField::Integer;

    fn parse_token(tok: &str) -> Option<Self> {
        if let Ok(v) = tok.parse::<i64>() {
            return Some(v);
        }
        let f = tok.parse::<f64>().ok()?;
        if f.is_finite() && f.abs() < 9.0e18 {
            Some(f.round() as i64)
        } else {
            None
        }
    }

    fn format_token(&self) -> Option<String> {
        Some(self.to_string())
    }

    fn to_f64(self) -> f64 {
        self as f64
    }

    fn bits(self) -> u64 {
        self as u64
    }
}

impl Scalar for bool {
    const FIELD: MmField = MmField::Pattern;

    fn parse_token(tok: &str) -> Option<Self> {
        tok.parse::<f64>().ok().map(|v| v != 0.0)
    }

    fn format_token(&self) -> Option<String> {
        None
    }

    fn to_f64(self) -> f64 {
        if self {
            1.0
        } else {
            0.0
        }
    }

    fn bits(self) -> u64 {
        self as u64
    }
}

/// A commutative semiring `(S, add, mul, zero, one)`.
pub trait Semiring: Send + Sync {
    type Scalar: Scalar;

    fn zero(&self) -> Self::Scalar;
    fn one(&self) -> Self::Scalar;
    fn add(&self, a: Self::Scalar, b: Self::Scalar) -> Self::Scalar;
    fn mul(&self, a: Self::Scalar, b: Self::Scalar) -> Self::Scalar;
    fn name(&self) -> &'static str;
}

/// `(f64, +, *)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct RealPlusTimes;

/// `(i64, +, *)` with wrapping arithmetic; used for shortest-path counting.
#[derive(Debug, Clone, Copy, Default)]
pub struct IntPlusTimes;

/// `(bool, or, and)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct BoolOrAnd;

impl Semiring for RealPlusTimes {
    type Scalar = f64;

    #[inline]
    fn zero(&self) -> f64 {
        0.0
    }
    #[inline]
    fn one(&self) -> f64 {
        1.0
    }
    #[inline]
    fn add(&self, a: f64, b: f64) -> f64 {
        a + b
    }
    #[inline]
    fn mul(&self, a: f64, b: f64) -> f64 {
        a * b
    }
    fn name(&self) -> &'static str {
        "real"
    }
}

impl Semiring for IntPlusTimes {
    type Scalar = i64;

    #[inline]
    fn zero(&self) -> i64 {
        0
    }
    #[inline]
    fn one(&self) -> i64 {
        1
    }
    #[inline]
    fn add(&self, a: i64, b: i64) -> i64 {
        a.wrapping_add(b)
    }
    #[inline]
    fn mul(&self, a: i64, b: i64) -> i64 {
        a.wrapping_mul(b)
    }
    fn name(&self) -> &'static str {
        "integer"
    }
}

impl Semiring for BoolOrAnd {
    type Scalar = bool;

    #[inline]
    fn zero(&self) -> bool {
        false
    }
    #[inline]
    fn one(&self) -> bool {
        true
    }
    #[inline]
    fn add(&self, a: bool, b: bool) -> bool {
        a || b
    }
    #[inline]
    fn mul(&self, a: bool, b: bool) -> bool {
        a && b
    }
    fn name(&self) -> &'static str {
        "boolean"
    }
}
