//! Arbitrary-precision scalars and truncated power series.

mod complex;
mod real;
mod scalar;
mod series;

pub use complex::HPComplex;
pub use real::{HPReal, Precision};
pub use scalar::Scalar;
pub use series::{cauchy_coeff, TaylorSeries};
