//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point type the geometry, basis and assembly code is generic over.
///
/// Implemented for `f32` and `f64`. Tolerances are expressed through the
/// helper methods so that single precision degrades gracefully instead of
/// asking for accuracy below its unit roundoff.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable")
    }

    /// Converts a count or index.
    #[inline]
    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("integer representable")
    }

    /// Relative geometric tolerance, `1e-10` in double precision.
    #[inline]
    fn geom_eps() -> Self {
        Self::lit(1e-10).max(Self::epsilon() * Self::lit(64.0))
    }

    /// Absolute root-finding tolerance, `1e-12` in double precision.
    #[inline]
    fn root_eps() -> Self {
        Self::lit(1e-12).max(Self::epsilon() * Self::lit(8.0))
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerances_respect_precision() {
        assert_eq!(<f64 as Real>::geom_eps(), 1e-10);
        assert_eq!(<f64 as Real>::root_eps(), 1e-12);
        assert!(<f32 as Real>::geom_eps() > f32::EPSILON);
    }
}
