//! Configurable-precision real numbers.
//!
//! [`BigReal`] wraps an MPFR float together with the decimal [`Precision`]
//! of the computation that produced it. Every arithmetic operator checks that
//! both operands come from the same context; mixing contexts is a programming
//! error and panics. The `try_*` methods report the mismatch as an
//! [`Error::PrecisionMismatch`] instead. Conversions between contexts are
//! always explicit ([`BigReal::to_precision`]).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Rational};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Working precision in significant decimal digits.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Precision(u32);

impl Precision {
    /// Smallest precision accepted from users.
    pub const MIN_DIGITS: u32 = 17;
    /// Default working precision.
    pub const DEFAULT: Precision = Precision(30);

    /// A user-facing precision; at least [`Precision::MIN_DIGITS`] digits.
    pub fn new(digits: u32) -> Result<Self> {
        if digits < Self::MIN_DIGITS {
            return Err(Error::Config(format!(
                "precision must be at least {} digits, got {digits}",
                Self::MIN_DIGITS
            )));
        }
        Ok(Precision(digits))
    }

    pub(crate) const fn raw(digits: u32) -> Self {
        Precision(digits)
    }

    pub fn digits(self) -> u32 {
        self.0
    }

    /// Binary precision used for the MPFR mantissa.
    pub fn bits(self) -> u32 {
        (self.0 as f64 * LOG2_10).ceil() as u32
    }

    /// This precision widened by `extra` guard digits.
    pub fn with_guard(self, extra: u32) -> Self {
        Precision(self.0 + extra)
    }

    /// Relative size of one unit in the last decimal place, `10^(1-P)`.
    pub fn ulp(self) -> BigReal {
        BigReal::from_i64(10, self).powi(1 - self.0 as i32)
    }
}

impl Default for Precision {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} digits", self.0)
    }
}

#[derive(Clone)]
pub struct BigReal {
    v: Float,
    prec: Precision,
}

impl BigReal {
    fn wrap(v: Float, prec: Precision) -> Self {
        BigReal { v, prec }
    }

    pub(crate) fn from_float(v: Float, prec: Precision) -> Self {
        BigReal::wrap(Float::with_val(prec.bits(), v), prec)
    }

    pub(crate) fn as_float(&self) -> &Float {
        &self.v
    }

    pub fn zero(prec: Precision) -> Self {
        BigReal::wrap(Float::new(prec.bits()), prec)
    }

    pub fn one(prec: Precision) -> Self {
        BigReal::from_i64(1, prec)
    }

    pub fn from_i64(n: i64, prec: Precision) -> Self {
        BigReal::wrap(Float::with_val(prec.bits(), n), prec)
    }

    pub fn from_u64(n: u64, prec: Precision) -> Self {
        BigReal::wrap(Float::with_val(prec.bits(), n), prec)
    }

    /// The binary value of `x`, rounded to `prec`. Only use this for
    /// dyadic constants; decimal literals should go through [`BigReal::parse`].
    pub fn from_f64(x: f64, prec: Precision) -> Self {
        BigReal::wrap(Float::with_val(prec.bits(), x), prec)
    }

    /// `num / den` correctly rounded.
    pub fn ratio(num: i64, den: i64, prec: Precision) -> Self {
        let r = Rational::from((num, den));
        BigReal::wrap(Float::with_val(prec.bits(), &r), prec)
    }

    pub(crate) fn from_rational(r: &Rational, prec: Precision) -> Self {
        BigReal::wrap(Float::with_val(prec.bits(), r), prec)
    }

    /// Parses a decimal string (`"5e-16"`, `"-0.0031576"`), correctly rounded.
    pub fn parse(s: &str, prec: Precision) -> Result<Self> {
        let parsed = Float::parse(s.trim())
            .map_err(|e| Error::Parse(format!("invalid decimal {s:?}: {e}")))?;
        let v = Float::with_val(prec.bits(), parsed);
        if !v.is_finite() {
            return Err(Error::Parse(format!("non-finite decimal {s:?}")));
        }
        Ok(BigReal::wrap(v, prec))
    }

    pub fn pi(prec: Precision) -> Self {
        BigReal::constant(Constant::Pi, prec)
    }

    /// Catalan's constant.
    pub fn catalan(prec: Precision) -> Self {
        BigReal::constant(Constant::Catalan, prec)
    }

    // Evaluated with ten guard digits, then rounded into the context.
    fn constant(c: Constant, prec: Precision) -> Self {
        let guarded = Float::with_val(prec.with_guard(10).bits(), c);
        BigReal::wrap(Float::with_val(prec.bits(), &guarded), prec)
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    /// Re-rounds the value into another context.
    pub fn to_precision(&self, prec: Precision) -> Self {
        BigReal::wrap(Float::with_val(prec.bits(), &self.v), prec)
    }

    pub fn to_f64(&self) -> f64 {
        self.v.to_f64()
    }

    pub fn is_zero(&self) -> bool {
        self.v.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite()
    }

    pub fn is_sign_negative(&self) -> bool {
        self.v.is_sign_negative() && !self.v.is_zero()
    }

    pub fn is_sign_positive(&self) -> bool {
        self.v.is_sign_positive() && !self.v.is_zero()
    }

    /// -1, 0 or +1.
    pub fn signum(&self) -> i8 {
        if self.v.is_zero() {
            0
        } else if self.v.is_sign_negative() {
            -1
        } else {
            1
        }
    }

    fn unary(&self, f: impl FnOnce(&Float) -> Float) -> Self {
        BigReal::wrap(f(&self.v), self.prec)
    }

    pub fn abs(&self) -> Self {
        let b = self.prec.bits();
        self.unary(|v| Float::with_val(b, v.abs_ref()))
    }

    pub fn exp(&self) -> Self {
        let b = self.prec.bits();
        self.unary(|v| Float::with_val(b, v.exp_ref()))
    }

    pub fn ln(&self) -> Self {
        let b = self.prec.bits();
        self.unary(|v| Float::with_val(b, v.ln_ref()))
    }

    pub fn log10(&self) -> Self {
        let b = self.prec.bits();
        self.unary(|v| Float::with_val(b, v.log10_ref()))
    }

    pub fn sqrt(&self) -> Self {
        let b = self.prec.bits();
        self.unary(|v| Float::with_val(b, v.sqrt_ref()))
    }

    pub fn cos(&self) -> Self {
        let b = self.prec.bits();
        self.unary(|v| Float::with_val(b, v.cos_ref()))
    }

    pub fn sin(&self) -> Self {
        let b = self.prec.bits();
        self.unary(|v| Float::with_val(b, v.sin_ref()))
    }

    pub fn square(&self) -> Self {
        let b = self.prec.bits();
        self.unary(|v| Float::with_val(b, v.square_ref()))
    }

    pub fn recip(&self) -> Self {
        let b = self.prec.bits();
        self.unary(|v| Float::with_val(b, v.recip_ref()))
    }

    /// `atan2(self, x)`, the argument of `x + i·self`.
    pub fn atan2(&self, x: &BigReal) -> Self {
        self.check(x);
        let b = self.prec.bits();
        self.unary(|v| Float::with_val(b, v.atan2_ref(&x.v)))
    }

    pub fn powi(&self, n: i32) -> Self {
        let b = self.prec.bits();
        self.unary(|v| Float::with_val(b, v.pow(n)))
    }

    pub fn powf(&self, e: &BigReal) -> Self {
        self.check(e);
        let b = self.prec.bits();
        self.unary(|v| Float::with_val(b, v.pow(&e.v)))
    }

    /// The larger of the two (by value).
    pub fn max(self, other: BigReal) -> Self {
        self.check(&other);
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: BigReal) -> Self {
        self.check(&other);
        if other < self {
            other
        } else {
            self
        }
    }

    /// Decimal scientific notation with `precision().digits()` significant
    /// digits. Deterministic for a given value and context.
    pub fn to_decimal_string(&self) -> String {
        self.to_decimal_digits(self.prec.digits() as usize)
    }

    pub fn to_decimal_digits(&self, digits: usize) -> String {
        if self.v.is_zero() {
            return "0".to_string();
        }
        self.v.to_string_radix(10, Some(digits.max(1)))
    }

    fn check(&self, other: &BigReal) {
        assert!(
            self.prec == other.prec,
            "BigReal precision mismatch: {} vs {} digits",
            self.prec.0,
            other.prec.0
        );
    }

    fn same_context(&self, other: &BigReal) -> Result<()> {
        if self.prec == other.prec {
            Ok(())
        } else {
            Err(Error::PrecisionMismatch {
                left: self.prec.0,
                right: other.prec.0,
            })
        }
    }

    pub fn try_add(&self, other: &BigReal) -> Result<BigReal> {
        self.same_context(other)?;
        Ok(self + other)
    }

    pub fn try_sub(&self, other: &BigReal) -> Result<BigReal> {
        self.same_context(other)?;
        Ok(self - other)
    }

    pub fn try_mul(&self, other: &BigReal) -> Result<BigReal> {
        self.same_context(other)?;
        Ok(self * other)
    }

    pub fn try_div(&self, other: &BigReal) -> Result<BigReal> {
        self.same_context(other)?;
        Ok(self / other)
    }
}

impl fmt::Debug for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.to_decimal_string(), self.prec.0)
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(p) => f.write_str(&self.to_decimal_digits(p)),
            None => f.write_str(&self.to_decimal_string()),
        }
    }
}

impl Serialize for BigReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_decimal_string())
    }
}

impl PartialEq for BigReal {
    fn eq(&self, other: &Self) -> bool {
        self.v == other.v
    }
}

impl PartialOrd for BigReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.v.partial_cmp(&other.v)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $assign_trait:ident, $assign:ident) => {
        impl<'a> $trait<&'a BigReal> for &'a BigReal {
            type Output = BigReal;
            fn $method(self, rhs: &'a BigReal) -> BigReal {
                self.check(rhs);
                BigReal::wrap(
                    Float::with_val(self.prec.bits(), $trait::$method(&self.v, &rhs.v)),
                    self.prec,
                )
            }
        }

        impl $trait<BigReal> for BigReal {
            type Output = BigReal;
            fn $method(mut self, rhs: BigReal) -> BigReal {
                self.check(&rhs);
                $assign_trait::$assign(&mut self.v, &rhs.v);
                self
            }
        }

        impl<'a> $trait<&'a BigReal> for BigReal {
            type Output = BigReal;
            fn $method(mut self, rhs: &'a BigReal) -> BigReal {
                self.check(rhs);
                $assign_trait::$assign(&mut self.v, &rhs.v);
                self
            }
        }

        impl<'a> $trait<BigReal> for &'a BigReal {
            type Output = BigReal;
            fn $method(self, rhs: BigReal) -> BigReal {
                $trait::$method(self, &rhs)
            }
        }

        impl<'a> $assign_trait<&'a BigReal> for BigReal {
            fn $assign(&mut self, rhs: &'a BigReal) {
                self.check(rhs);
                $assign_trait::$assign(&mut self.v, &rhs.v);
            }
        }

        impl $assign_trait<BigReal> for BigReal {
            fn $assign(&mut self, rhs: BigReal) {
                self.check(&rhs);
                $assign_trait::$assign(&mut self.v, &rhs.v);
            }
        }

        // Small exact integers (scaling by 2, 8, ...) are common enough to
        // deserve operator support.
        impl<'a> $trait<i64> for &'a BigReal {
            type Output = BigReal;
            fn $method(self, rhs: i64) -> BigReal {
                BigReal::wrap(
                    Float::with_val(self.prec.bits(), $trait::$method(&self.v, rhs)),
                    self.prec,
                )
            }
        }

        impl $trait<i64> for BigReal {
            type Output = BigReal;
            fn $method(mut self, rhs: i64) -> BigReal {
                $assign_trait::$assign(&mut self.v, rhs);
                self
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign);
binop!(Sub, sub, SubAssign, sub_assign);
binop!(Mul, mul, MulAssign, mul_assign);
binop!(Div, div, DivAssign, div_assign);

impl Neg for BigReal {
    type Output = BigReal;
    fn neg(mut self) -> BigReal {
        self.v = -self.v;
        self
    }
}

impl<'a> Neg for &'a BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        BigReal::wrap(Float::with_val(self.prec.bits(), -&self.v), self.prec)
    }
}

/// Sum of a sequence of values from one context, in iteration order.
pub fn sum<'a>(prec: Precision, items: impl IntoIterator<Item = &'a BigReal>) -> BigReal {
    let mut acc = BigReal::zero(prec);
    for x in items {
        acc += x;
    }
    acc
}
