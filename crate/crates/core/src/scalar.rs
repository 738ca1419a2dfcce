//! Scalar abstractions for the sequence algebra.
//!
//! Sign histories, moments and constraint residuals only need field
//! arithmetic, so they are written against [`Scalar`] and run unchanged on
//! `f32`, `f64` and exact rationals. Anything that needs `sqrt`, `sin` or a
//! random start (UDD timing, the Newton solver) asks for [`Real`] instead.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_rational::Ratio;
use num_traits::{Float, FloatConst, FromPrimitive, Signed, ToPrimitive};

/// Exact rational scalar used to check closed-form sequences without rounding.
pub type Rational = Ratio<i128>;

/// Field-like scalar: enough arithmetic to integrate piecewise polynomials.
pub trait Scalar:
    Signed + FromPrimitive + ToPrimitive + Copy + PartialOrd + Debug + Display + Send + Sync + 'static
{
    /// Absolute tolerance used for invariants such as `Σα = 1`.
    ///
    /// Zero for exact types.
    fn invariant_tolerance() -> Self;

    fn from_int(n: i64) -> Self {
        Self::from_i64(n).expect("small integers are representable")
    }

    fn sum_of<'a, I: IntoIterator<Item = &'a Self>>(it: I) -> Self {
        it.into_iter().fold(Self::zero(), |acc, &x| acc + x)
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }
}

/// Floating-point scalar.
pub trait Real: Scalar + Float + FloatConst + Sum {
    /// Residual threshold the interval solver drives towards.
    fn solver_tolerance() -> Self;
}

impl Scalar for f64 {
    fn invariant_tolerance() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    fn invariant_tolerance() -> Self {
        2e-6
    }
}

impl Scalar for Rational {
    fn invariant_tolerance() -> Self {
        Ratio::from_integer(0)
    }
}

impl Real for f64 {
    fn solver_tolerance() -> Self {
        1e-12
    }
}

impl Real for f32 {
    fn solver_tolerance() -> Self {
        2e-5
    }
}

/// Converts an `f64` constant into `S`, for literals in generic code.
pub(crate) fn lit<S: Real>(x: f64) -> S {
    S::from_f64(x).expect("finite literal")
}
