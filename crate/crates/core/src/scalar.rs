//! Scalar abstractions shared by the operator algebra.
//!
//! Operators only need ring arithmetic, so they work over exact integer
//! scalars as well as floats. States, expectations and probabilities need
//! square roots and trigonometry and are restricted to [`RealScalar`].

use std::fmt::Debug;
use std::ops::Neg;

use num_traits::{Float, FloatConst, Num, ToPrimitive};

/// Component type of a complex matrix entry.
pub trait Scalar:
    Num + Copy + Neg<Output = Self> + ToPrimitive + Debug + PartialEq + Send + Sync + 'static
{
    /// Lossy view used for tolerance comparisons.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Num + Copy + Neg<Output = T> + ToPrimitive + Debug + PartialEq + Send + Sync + 'static
{
}

/// Floating-point scalar with precision-aware tolerances.
///
/// The nominal tolerances are the double-precision ones; narrower types
/// widen them to a small multiple of their machine epsilon.
pub trait RealScalar: Scalar + Float + FloatConst {
    /// Entrywise tolerance for exact algebraic identities.
    fn identity_tolerance() -> f64 {
        1e-12_f64.max(64.0 * Self::epsilon().as_f64())
    }

    /// Norm tolerance after composed unitaries.
    fn norm_tolerance() -> f64 {
        1e-9_f64.max(64.0 * Self::epsilon().as_f64())
    }

    /// Normalization error that is rejected outright.
    fn normalization_error_threshold() -> f64 {
        1e-6_f64.max(64.0 * Self::epsilon().as_f64())
    }

    fn from_f64_lossy(x: f64) -> Self {
        <Self as num_traits::NumCast>::from(x).unwrap_or_else(Self::nan)
    }
}

impl<T> RealScalar for T where T: Scalar + Float + FloatConst {}
