//! Scalar abstraction shared by every geometric routine.
//!
//! All algorithms are written against [`Scalar`], which `f32` and `f64` both
//! implement. The tolerances below are tuned for `f64`; `f32` works for the
//! norm and Fermat-point primitives but is too coarse for bead counting on
//! anything but tiny instances.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type usable by the geometry kernels.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("integer representable in scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Absolute slack used by the bead-count ceiling and the integer-length test.
pub const CEIL_EPS: f64 = 1e-9;

/// Edges shorter than this are treated as degenerate (zero length).
pub const DEGENERATE_EPS: f64 = 1e-9;

/// Membership slack for "point lies in a closed ball of integer radius".
/// Must stay below [`CEIL_EPS`] so membership implies the expected ceiling.
pub const MEMBERSHIP_EPS: f64 = 5e-10;

/// Ceiling with the epsilon rule: `ceil(x - 1e-9)` for `x > 1e-9`, else 0.
pub fn ceil_eps<T: Scalar>(x: T) -> i64 {
    let eps = T::lit(CEIL_EPS);
    if x <= eps {
        0
    } else {
        (x - eps).ceil().to_i64().expect("finite length")
    }
}

/// True when `x` is within `1e-9` of an integer.
pub fn is_integer_eps<T: Scalar>(x: T) -> bool {
    (x - x.round()).abs() <= T::lit(CEIL_EPS)
}
