//! Scalar abstraction shared by every solver.
//!
//! All numerics are written against [`Real`], which is implemented for `f32`
//! and `f64`. Complex amplitudes use [`num_complex::Complex`] over the same
//! scalar.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar usable by the simulator.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Never fails for finite inputs.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize fits in float")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerance floor for this precision: `max(base, scale * epsilon)`.
    #[inline]
    fn tol(base: f64, scale: f64) -> Self {
        let eps = Self::epsilon() * Self::lit(scale);
        let base = Self::lit(base);
        if eps > base {
            eps
        } else {
            base
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type C<T> = Complex<T>;

#[inline]
pub fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

/// `exp(i * phase)`.
#[inline]
pub fn phase<T: Real>(angle: T) -> Complex<T> {
    Complex::new(angle.cos(), angle.sin())
}

#[inline]
pub fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

/// Euclidean norm of a complex vector.
pub fn norm<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

/// `<a|b>` with conjugation on the left argument.
pub fn inner<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(czero(), |acc, (x, y)| acc + x.conj() * y)
}

/// `y += alpha * x`.
pub fn axpy<T: Real>(alpha: Complex<T>, x: &[Complex<T>], y: &mut [Complex<T>]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale<T: Real>(alpha: T, v: &mut [Complex<T>]) {
    for z in v.iter_mut() {
        *z *= alpha;
    }
}

/// Binomial coefficient as `u128`; saturates rather than overflowing.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(14, 4), 1001);
        assert_eq!(binomial(4, 0), 1);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(12, 4), 495);
    }

    #[test]
    fn tolerance_floor_tracks_precision() {
        assert_eq!(f64::tol(1e-10, 100.0), 1e-10);
        assert!(f32::tol(1e-10, 100.0) > 1e-6);
    }
}
