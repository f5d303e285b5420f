use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::HPReal;

/// Field operations shared by `f64` and [`HPReal`], so model residuals and
/// dense linear algebra are written once for the oracle and the series engine.
pub trait Scalar:
    Clone
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + PartialOrd
{
    /// A constant at the precision of `self`.
    fn lift(&self, x: f64) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn abs(&self) -> Self;
    fn to_f64(&self) -> f64;

    fn zero_like(&self) -> Self {
        self.lift(0.0)
    }
}

impl Scalar for f64 {
    fn lift(&self, x: f64) -> Self {
        x
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for HPReal {
    fn lift(&self, x: f64) -> Self {
        HPReal::from_f64(x, self.precision())
    }
    fn sin(&self) -> Self {
        HPReal::sin(self)
    }
    fn cos(&self) -> Self {
        HPReal::cos(self)
    }
    fn sqrt(&self) -> Self {
        HPReal::sqrt(self)
    }
    fn abs(&self) -> Self {
        HPReal::abs(self)
    }
    fn to_f64(&self) -> f64 {
        HPReal::to_f64(self)
    }
}
