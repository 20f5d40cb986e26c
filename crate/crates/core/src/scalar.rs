//! Scalar traits shared by the exact and the floating-point code paths.
//!
//! Two layers:
//! * [`Scalar`]: an ordered ring with a rounded division. Enough for lattice
//!   reduction, which only ever needs `round(<a, b> / <a, a>)`. Implemented
//!   for `f32`, `f64`, [`BigInt`] and [`BigRational`].
//! * [`Coefficient`]: a [`Scalar`] that is also a field and can absorb a
//!   rational exponent (needed by the power rule). Implemented for `f32`,
//!   `f64` and [`BigRational`].

use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Ordered ring element with a nearest-integer quotient.
pub trait Scalar: Clone + PartialOrd + Debug + Num + Signed + Send + Sync + 'static {
    /// `true` when arithmetic is exact (no rounding).
    const EXACT: bool;

    /// `round(self / other)` to the nearest integer, ties away from zero.
    fn round_div(&self, other: &Self) -> Self;

    fn to_f64(&self) -> f64;

    fn from_i64(v: i64) -> Self;
}

/// Field element usable as a polynomial coefficient.
pub trait Coefficient: Scalar + std::fmt::Display {
    fn from_ratio(r: &Ratio<i64>) -> Self;

    fn from_rational(r: &BigRational) -> Self;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn round_div(&self, other: &Self) -> Self {
        (self / other).round()
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_i64(v: i64) -> Self {
        v as f64
    }
}

impl Coefficient for f64 {
    fn from_ratio(r: &Ratio<i64>) -> Self {
        *r.numer() as f64 / *r.denom() as f64
    }

    fn from_rational(r: &BigRational) -> Self {
        ratio_to_f64(r)
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn round_div(&self, other: &Self) -> Self {
        (self / other).round()
    }

    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }

    fn from_i64(v: i64) -> Self {
        v as f32
    }
}

impl Coefficient for f32 {
    fn from_ratio(r: &Ratio<i64>) -> Self {
        (*r.numer() as f64 / *r.denom() as f64) as f32
    }

    fn from_rational(r: &BigRational) -> Self {
        ratio_to_f64(r) as f32
    }
}

impl Scalar for BigInt {
    const EXACT: bool = true;

    fn round_div(&self, other: &Self) -> Self {
        // floor((2a + b) / 2b) for b > 0 rounds half up; mirror for ties away from zero.
        let (num, den) = if other.is_negative() {
            (-self, -other)
        } else {
            (self.clone(), other.clone())
        };
        let two = BigInt::from(2);
        if num.is_negative() {
            -((-num * &two + &den).div_floor(&(den * two)))
        } else {
            (num * &two + &den).div_floor(&(den * two))
        }
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn round_div(&self, other: &Self) -> Self {
        (self / other).round()
    }

    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
}

impl Coefficient for BigRational {
    fn from_ratio(r: &Ratio<i64>) -> Self {
        BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
    }

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
}

/// Correctly scaled conversion; `Ratio::to_f64` overflows when numerator and
/// denominator are individually huge.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    if nb < 1000 && db < 1000 {
        if let Some(v) = ToPrimitive::to_f64(r) {
            if v.is_finite() && v != 0.0 {
                return v;
            }
        }
    }
    // Keep ~60 significant bits of the quotient.
    let shift = nb - db - 60;
    let (n, d) = if shift > 0 {
        (r.numer().clone(), r.denom().clone() << shift as usize)
    } else {
        (r.numer().clone() << (-shift) as usize, r.denom().clone())
    };
    let q = n / d;
    let mant = ToPrimitive::to_f64(&q).unwrap_or(f64::NAN);
    mant * 2f64.powi(shift as i32)
}

/// Exact rational value of a finite `f64`.
pub fn f64_to_rational(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite float")
}

pub fn rational_from_i64s(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rational_to_ratio_i64(r: &BigRational) -> Option<Ratio<i64>> {
    Some(Ratio::new(r.numer().to_i64()?, r.denom().to_i64()?))
}

/// `n!` as any scalar.
pub fn factorial<S: Scalar>(n: u32) -> S {
    let mut acc = S::one();
    for i in 2..=n {
        acc = acc * S::from_i64(i64::from(i));
    }
    acc
}

pub(crate) fn float_from_f64<F: num_traits::Float + FromPrimitive>(v: f64) -> F {
    F::from_f64(v).expect("representable")
}
