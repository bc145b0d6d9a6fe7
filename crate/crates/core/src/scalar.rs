//! Scalar abstraction shared by every dense kernel in the crate.
//!
//! All matrices are generic over [`Scalar`], which covers `f32`, `f64`,
//! `Complex<f32>` and `Complex<f64>`. Real-valued Hamiltonians (Ising, XY)
//! can therefore run entirely in real arithmetic, which is several times
//! cheaper than the complex path for the same dimension.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use faer::traits::ComplexField;
use num_complex::Complex;
use num_traits::{Float, FromPrimitive, One, Zero};

/// Field element usable in the dense kernels.
///
/// `Re` is the underlying real type; for real scalars `Re == Self`.
pub trait Scalar:
    ComplexField<Real = <Self as Scalar>::Re>
    + Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Sum
{
    type Re: RealScalar;

    /// `true` for the complex instantiations.
    const IS_COMPLEX: bool;

    fn from_real(x: Self::Re) -> Self;

    /// Builds a scalar from real and imaginary parts. Returns `None` for real
    /// scalar types when `im` is non-zero.
    fn from_parts(re: Self::Re, im: Self::Re) -> Option<Self>;

    fn re(self) -> Self::Re;
    fn im(self) -> Self::Re;
    fn conj(self) -> Self;
    /// Absolute value (complex modulus).
    fn modulus(self) -> Self::Re;
    fn norm_sqr(self) -> Self::Re;

    fn scale(self, s: Self::Re) -> Self {
        self * Self::from_real(s)
    }

    fn to_c64(self) -> Complex<f64> {
        Complex::new(self.re().to_f64(), self.im().to_f64())
    }

    /// Narrowing conversion from double precision complex. `None` if the
    /// imaginary part is non-zero and `Self` is real.
    fn from_c64(z: Complex<f64>) -> Option<Self> {
        Self::from_parts(Self::Re::lit(z.re), Self::Re::lit(z.im))
    }
}

/// Real field element.
pub trait RealScalar: Scalar<Re = Self> + Float + FromPrimitive + PartialOrd + Display + LowerExp + Default {
    /// Default stopping tolerance for the spectral solver at this precision.
    const SOLVER_TOL: f64;

    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite literal")
    }

    fn to_f64(self) -> f64;

    fn from_usize(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("representable count")
    }
}

macro_rules! impl_real {
    ($t:ty, $tol:expr) => {
        impl Scalar for $t {
            type Re = $t;
            const IS_COMPLEX: bool = false;

            #[inline]
            fn from_real(x: $t) -> Self {
                x
            }
            #[inline]
            fn from_parts(re: $t, im: $t) -> Option<Self> {
                (im == 0.0).then_some(re)
            }
            #[inline]
            fn re(self) -> $t {
                self
            }
            #[inline]
            fn im(self) -> $t {
                0.0
            }
            #[inline]
            fn conj(self) -> Self {
                self
            }
            #[inline]
            fn modulus(self) -> $t {
                <$t>::abs(self)
            }
            #[inline]
            fn norm_sqr(self) -> $t {
                self * self
            }
        }

        impl RealScalar for $t {
            const SOLVER_TOL: f64 = $tol;

            #[inline]
            fn to_f64(self) -> f64 {
                self as f64
            }
        }

        impl Scalar for Complex<$t> {
            type Re = $t;
            const IS_COMPLEX: bool = true;

            #[inline]
            fn from_real(x: $t) -> Self {
                Complex::new(x, 0.0)
            }
            #[inline]
            fn from_parts(re: $t, im: $t) -> Option<Self> {
                Some(Complex::new(re, im))
            }
            #[inline]
            fn re(self) -> $t {
                self.re
            }
            #[inline]
            fn im(self) -> $t {
                self.im
            }
            #[inline]
            fn conj(self) -> Self {
                Complex::conj(&self)
            }
            #[inline]
            fn modulus(self) -> $t {
                self.norm()
            }
            #[inline]
            fn norm_sqr(self) -> $t {
                Complex::norm_sqr(&self)
            }
        }
    };
}

impl_real!(f64, 1e-12);
impl_real!(f32, 1e-5);
