//! Scalar abstraction shared by the numeric core.
//!
//! Everything that manipulates channels, states or transfer matrices is
//! generic over [`Scalar`], which is implemented for `f32` and `f64`.
//! Configuration and dataset values stay in `f64` and are converted at the
//! boundary with [`lit`].

use nalgebra::RealField;
use num_complex::Complex;

/// Real field usable by the simulator: f32 or f64.
pub trait Scalar: RealField + Copy + Default {
    /// Tolerance used for probability normalization checks.
    ///
    /// `1e-12` for f64; scaled up to what the type can resolve otherwise.
    fn norm_tol() -> Self {
        let floor: Self = lit(1e-12);
        let eps = Self::default_epsilon() * lit(64.0);
        if eps > floor {
            eps
        } else {
            floor
        }
    }

    fn to_f64(self) -> f64;
}

impl Scalar for f32 {
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    fn to_f64(self) -> f64 {
        self
    }
}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: RealField>(x: f64) -> T {
    nalgebra::convert(x)
}

/// Complex number over the working scalar.
pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn cx<T: Scalar>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}
