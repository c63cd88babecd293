//! Scalar abstraction for the numerical kernels.
//!
//! The quadrature engine and the physics formulas only need ordinary
//! floating-point behaviour, so the bound is a thin alias over the
//! `num-traits` hierarchy. `f32` and `f64` both satisfy it; the crate's
//! concrete code instantiates everything at [`crate::Real`].

use num_traits::Float;

/// Floating-point scalar usable by the generic numeric code.
///
/// Blanket-implemented for every type that satisfies the bounds, so
/// downstream code never has to implement it by hand.
pub trait Scalar: Float + Copy + core::fmt::Debug + 'static {
    /// Lossy conversion from `f64`, used to materialise tabulated
    /// constants (quadrature nodes, physical constants) in `Self`.
    fn from_f64(v: f64) -> Self;
}

impl<T> Scalar for T
where
    T: Float + Copy + core::fmt::Debug + 'static,
{
    fn from_f64(v: f64) -> Self {
        T::from(v).expect("finite f64 constants convert to every Float")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm<F: Scalar>(x: F, y: F) -> F {
        (x * x + y * y).sqrt()
    }

    #[test]
    fn blanket_impl_covers_both_widths() {
        assert_eq!(norm(3.0f64, 4.0f64), 5.0f64);
        assert_eq!(norm(3.0f32, 4.0f32), 5.0f32);
        assert_eq!(f64::from_f64(2.5), 2.5);
    }
}
