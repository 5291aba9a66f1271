//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    /// A tolerance that is `reference` in double precision and never drops
    /// below a small multiple of machine epsilon in lower precisions.
    #[inline]
    fn tol(reference: f64) -> Self {
        let floor = Self::epsilon() * Self::of(1000.0);
        Self::of(reference).max(floor)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type C<T> = Complex<T>;
