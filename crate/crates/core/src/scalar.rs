//! Scalar abstractions shared by the numeric and certified code paths.

use std::fmt::{Debug, Display};
use std::ops::{Add, Mul, Sub};

use num_bigint::BigUint;
use num_traits::{Float, FromPrimitive, ToPrimitive};

use crate::interval::Interval;

/// Floating-point scalar for the non-certified routines: `f32` or `f64`.
pub trait Real: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).unwrap_or_else(Self::nan)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// The ring operations the activation-count recursion needs.
///
/// Implemented for every [`Real`] and for [`Interval`]; constants are created
/// "like" an existing value so intervals inherit its working precision.
pub trait Numeric: Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {
    fn one_like(&self) -> Self;
    fn integer_like(&self, n: &BigUint) -> Self;
    fn powu(&self, n: u64) -> Self;
}

impl<T: Real> Numeric for T {
    fn one_like(&self) -> Self {
        T::one()
    }

    fn integer_like(&self, n: &BigUint) -> Self {
        T::from_f64_lossy(n.to_f64().unwrap_or(f64::INFINITY))
    }

    fn powu(&self, n: u64) -> Self {
        match i32::try_from(n) {
            Ok(k) => self.powi(k),
            Err(_) => self.powf(T::from_f64_lossy(n as f64)),
        }
    }
}

impl Numeric for Interval {
    fn one_like(&self) -> Self {
        Interval::one(self.precision())
    }

    fn integer_like(&self, n: &BigUint) -> Self {
        Interval::from_integer(n, self.precision())
    }

    fn powu(&self, n: u64) -> Self {
        Interval::powu(self, n)
    }
}
