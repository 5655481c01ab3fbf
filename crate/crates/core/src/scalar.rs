//! Scalar abstraction: every numeric routine in this crate is generic over a
//! floating-point type implementing [`Scalar`] (in practice `f32` or `f64`).

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar the library is generic over.
///
/// Blanket-implemented, so `f32` and `f64` qualify out of the box.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Sum
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Lift an `f64` constant into `T`.
#[inline]
pub(crate) fn cst<T: Scalar>(v: f64) -> T {
    T::from_f64(v).expect("constant must be representable in the scalar type")
}

/// Lift a `usize` into `T`.
#[inline]
pub(crate) fn cstu<T: Scalar>(v: usize) -> T {
    T::from_usize(v).expect("count must be representable in the scalar type")
}

/// Default tolerance for eigenvalue and measure computations: `1e-12` in
/// double precision, widened to 100 machine epsilons for narrower types.
pub fn default_tol<T: Scalar>() -> T {
    let floor = T::epsilon() * cst::<T>(100.0);
    let base = cst::<T>(1e-12);
    if floor > base {
        floor
    } else {
        base
    }
}

/// Sup-norm of a slice.
#[inline]
pub(crate) fn sup_norm<T: Scalar>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
}

/// Sup-norm of the difference of two slices.
#[inline]
pub(crate) fn sup_norm_diff<T: Scalar>(x: &[T], y: &[T]) -> T {
    debug_assert_eq!(x.len(), y.len());
    x.iter()
        .zip(y)
        .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_tol_is_1e_minus_12_for_f64() {
        assert_eq!(default_tol::<f64>(), 1e-12);
    }

    #[test]
    fn default_tol_scales_for_f32() {
        assert!(default_tol::<f32>() > 1e-6);
    }

    #[test]
    fn norms() {
        assert_eq!(sup_norm(&[1.0, -3.0, 2.0]), 3.0);
        assert_eq!(sup_norm_diff(&[1.0, 2.0], &[0.5, 4.0]), 2.0);
    }
}
