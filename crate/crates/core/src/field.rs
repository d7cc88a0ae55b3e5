use core::fmt;

use crate::error::AlgebraError;
use crate::rational::Rational;

/// A commutative field with exact arithmetic.
///
/// Implemented by [`Rational`] and [`crate::RationalFunction`]; polynomial and
/// Gröbner code is generic over it.
pub trait Field: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn is_one(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Result<Self, AlgebraError>;
    fn from_rational(r: &Rational) -> Self;

    fn div(&self, other: &Self) -> Result<Self, AlgebraError> {
        Ok(self.mul(&other.inv()?))
    }

    /// Brings the value into its canonical representation. Fields whose
    /// arithmetic is always canonical keep the default.
    fn normalize(&self) -> Self {
        self.clone()
    }
}
