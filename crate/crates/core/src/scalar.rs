//! Floating-point scalar abstraction.
//!
//! Everything numeric in this crate is generic over [`Scalar`], which is the
//! minimal bundle of `num-traits` capabilities the algorithms need: IEEE
//! arithmetic, the usual constants, lossless-enough conversion from literals,
//! and the formatting/threading bounds the containers rely on. `f32` and
//! `f64` implement it; the crate-root type aliases fix `f64`, which is the
//! precision the documented tolerances are calibrated for.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use std::fmt::{Debug, Display, LowerExp};

/// Real scalar type for all numerical work in this crate.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Conversion from an `f64` literal. Infallible for the provided impls;
    /// the generic bound keeps constants writable in one place.
    fn from_f64_lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal must convert into the scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Shorthand used throughout the crate for embedding `f64` constants.
#[inline]
pub(crate) fn flt<T: Scalar>(x: f64) -> T {
    T::from_f64_lit(x)
}

/// Cast a small index to the scalar type. Exact for the sizes used here.
#[inline]
pub(crate) fn idx<T: Scalar>(i: usize) -> T {
    T::from_usize(i).expect("index must convert into the scalar type")
}

/// Compensated (Neumaier) summation. The grid reductions feed tolerances in
/// the 1e-14 range, which naive summation does not reliably reach at N = 256.
pub(crate) fn neumaier_sum<T: Scalar>(values: impl IntoIterator<Item = T>) -> T {
    let mut sum = T::zero();
    let mut comp = T::zero();
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp = comp + ((sum - t) + v);
        } else {
            comp = comp + ((v - t) + sum);
        }
        sum = t;
    }
    sum + comp
}
