//! Scalar abstraction shared by the double and extended precision code paths.

use std::fmt::{Debug, Display};
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use crate::dd::DoubleDouble;

/// Real scalar used by the moment, table and recurrence machinery.
///
/// Implemented for `f64` and [`DoubleDouble`]. Only the handful of operations
/// the moment determinants and recurrences need are required.
pub trait Real:
    Copy
    + Send
    + Sync
    + Debug
    + Display
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + 'static
{
    /// Precision mode this scalar implements.
    const PRECISION: Precision;

    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn is_finite(self) -> bool;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn from_usize(n: usize) -> Self {
        Self::from_f64(n as f64)
    }

    fn max_abs(self, other: Self) -> Self {
        let (a, b) = (self.abs(), other.abs());
        if a >= b {
            a
        } else {
            b
        }
    }
}

impl Real for f64 {
    const PRECISION: Precision = Precision::Double;

    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Real for DoubleDouble {
    const PRECISION: Precision = Precision::Extended;

    #[inline]
    fn from_f64(x: f64) -> Self {
        DoubleDouble::from(x)
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self.hi() + self.lo()
    }
    #[inline]
    fn abs(self) -> Self {
        DoubleDouble::abs(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        DoubleDouble::sqrt(self)
    }
    #[inline]
    fn is_finite(self) -> bool {
        self.hi().is_finite() && self.lo().is_finite()
    }
}

/// Arithmetic mode for a computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Precision {
    /// IEEE binary64.
    Double,
    /// Double-double, about 32 significant decimal digits.
    Extended,
}

impl Precision {
    /// Largest `N + M` for which moment-determinant tables are attempted.
    ///
    /// Hankel-type moment systems lose roughly a factorial number of digits,
    /// past these extents the results carry no significant figures.
    pub fn window_cap(self) -> usize {
        match self {
            Precision::Double => 12,
            Precision::Extended => 24,
        }
    }

    /// Default normality threshold for the pivot-ratio test in this mode.
    pub fn default_normality_threshold(self) -> f64 {
        match self {
            Precision::Double => 1e-10,
            Precision::Extended => 1e-20,
        }
    }

    /// Unit roundoff of the mode.
    pub fn epsilon(self) -> f64 {
        match self {
            Precision::Double => f64::EPSILON,
            Precision::Extended => crate::dd::EPSILON,
        }
    }
}

impl std::str::FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "double" => Ok(Precision::Double),
            "extended" => Ok(Precision::Extended),
            other => Err(format!("unknown precision `{other}` (expected double|extended)")),
        }
    }
}

/// Converts a slice between scalar types through `f64` when narrowing.
pub fn convert_vec<S: Real, T: Real>(values: &[S]) -> Vec<T> {
    values.iter().map(|&v| cast(v)).collect()
}

/// Scalar conversion. Widening to [`DoubleDouble`] from `f64` is exact,
/// narrowing rounds to nearest, same-type conversion is the identity.
pub fn cast<S: Real, T: Real>(v: S) -> T {
    let any: &dyn std::any::Any = &v;
    match any.downcast_ref::<T>() {
        Some(x) => *x,
        None => T::from_f64(v.to_f64()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extended_roundtrip_keeps_low_word() {
        let third = DoubleDouble::from(1.0) / DoubleDouble::from(3.0);
        let back: DoubleDouble = cast(third);
        assert_eq!(back, third);
        let narrow: f64 = cast(third);
        assert_eq!(narrow, 1.0 / 3.0);
    }

    #[test]
    fn precision_parse() {
        assert_eq!("double".parse::<Precision>().unwrap(), Precision::Double);
        assert_eq!("extended".parse::<Precision>().unwrap(), Precision::Extended);
        assert!("quad".parse::<Precision>().is_err());
    }
}
