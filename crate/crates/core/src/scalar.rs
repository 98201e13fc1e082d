//! Floating-point abstraction shared by the mechanics, muscle and hydro models.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar the physics is generic over: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Every literal used by the models is representable.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    /// Lossy conversion back to `f64` for reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerance floor for residual checks, a few ulps above machine epsilon.
    #[inline]
    fn tiny() -> Self {
        Self::epsilon() * Self::lit(64.0)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals_round_trip() {
        assert_eq!(<f64 as Scalar>::lit(1.25), 1.25);
        assert_eq!(<f32 as Scalar>::lit(1.25), 1.25f32);
        assert_eq!(<f32 as Scalar>::lit(0.5).as_f64(), 0.5);
    }

    #[test]
    fn tiny_tracks_precision() {
        assert!(<f32 as Scalar>::tiny() > <f64 as Scalar>::tiny() as f32);
    }
}
