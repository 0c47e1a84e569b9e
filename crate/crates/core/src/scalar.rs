//! Floating-point abstraction shared by every counter-carrying structure.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssignOps, ToPrimitive};

/// Real type used for decayed weights and counts.
///
/// Implemented for `f32` and `f64`. Timestamps are always `f64`; only the
/// accumulated weights follow the scalar type.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssignOps + Default + Debug + Display + Send + Sync + 'static
{
    /// Raw weights (and running totals) above this level trigger a landmark
    /// shift under exponential decay.
    fn rebase_threshold() -> Self;

    /// Lossy conversion from `f64`. Panics only on NaN-producing casts, which
    /// `f32`/`f64` never produce.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 converts to every Scalar")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("Scalar converts to f64")
    }
}

impl Scalar for f64 {
    fn rebase_threshold() -> Self {
        1e300
    }
}

impl Scalar for f32 {
    fn rebase_threshold() -> Self {
        1e30
    }
}
