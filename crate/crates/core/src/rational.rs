//! Arbitrary-precision rationals, a thin newtype over `num_rational::BigRational`.

use alloc::string::{String, ToString};
use core::fmt;
use core::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::AlgebraError;
use crate::field::Field;

/// Exact rational number in lowest terms with a positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(pub(crate) BigRational);

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_bigints(num: BigInt, den: BigInt) -> Self {
        Rational(BigRational::new(num, den))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Rational::one();
        for _ in 0..e {
            acc = Field::mul(&acc, self);
        }
        acc
    }

    /// Best rational approximation of `value` within `tol`, by continued
    /// fraction expansion. Returns `None` for non-finite input.
    pub fn from_f64_snap(value: f64, tol: f64) -> Option<Self> {
        if !value.is_finite() {
            return None;
        }
        let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
        let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
        let mut rest = value;
        for _ in 0..64 {
            let a = libm::floor(rest);
            let ai = BigInt::from(a as i64);
            let h2 = &ai * &h1 + &h0;
            let k2 = &ai * &k1 + &k0;
            h0 = core::mem::replace(&mut h1, h2);
            k0 = core::mem::replace(&mut k1, k2);
            let approx = Rational::from_bigints(h1.clone(), k1.clone());
            if libm::fabs(approx.to_f64() - value) <= tol {
                return Some(approx);
            }
            let frac = rest - a;
            if frac == 0.0 {
                return Some(approx);
            }
            rest = 1.0 / frac;
            if !rest.is_finite() || libm::fabs(rest) > 1e15 {
                return Some(approx);
            }
        }
        Some(Rational::from_bigints(h1, k1))
    }
}

impl Field for Rational {
    fn zero() -> Self {
        Rational(BigRational::zero())
    }
    fn one() -> Self {
        Rational(BigRational::one())
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    fn is_one(&self) -> bool {
        self.0.is_one()
    }
    fn add(&self, other: &Self) -> Self {
        Rational(&self.0 + &other.0)
    }
    fn sub(&self, other: &Self) -> Self {
        Rational(&self.0 - &other.0)
    }
    fn mul(&self, other: &Self) -> Self {
        Rational(&self.0 * &other.0)
    }
    fn neg(&self) -> Self {
        Rational(-&self.0)
    }
    fn inv(&self) -> Result<Self, AlgebraError> {
        if self.0.is_zero() {
            Err(AlgebraError::DivisionByZero)
        } else {
            Ok(Rational(self.0.recip()))
        }
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = AlgebraError;

    /// Accepts `n` or `n/d` with optional leading sign; no decimals.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |msg: &str| AlgebraError::Parse { pos: 0, msg: msg.to_string() };
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let num: BigInt = num.parse().map_err(|_| bad("invalid integer"))?;
        let den: BigInt = den.parse().map_err(|_| bad("invalid integer"))?;
        if den.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        Ok(Rational::from_bigints(num, den))
    }
}

impl serde::Serialize for Rational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Rational {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
