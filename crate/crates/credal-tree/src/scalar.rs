//! Scalar abstraction for the numeric kernels.
//!
//! Every expectation, message, and posterior in this crate is computed in
//! a caller-chosen floating-point type. The [`Real`] trait collects the
//! `num-traits` bounds the algorithms need; it is implemented by a blanket
//! impl, so `f32` and `f64` (and any type satisfying the bounds) work out
//! of the box. Concrete `f64` aliases for the main types live at the crate
//! root.

use std::fmt::{Debug, Display};
use std::iter::{Product, Sum};
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by every algorithm in this crate.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Product
    + Debug
    + Display
    + Default
    + 'static
{
    /// Lossless-as-possible conversion from `f64` literals and documents.
    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts into every Real type")
    }

    /// Conversion to `f64` for reporting and serialization.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("every Real value converts to f64")
    }
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Sum
        + Product
        + Debug
        + Display
        + Default
        + 'static
{
}
