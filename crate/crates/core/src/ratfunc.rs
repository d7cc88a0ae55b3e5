//! The coefficient field ℚ(x₁,…,xₙ) of rational functions in the parameters.

use alloc::borrow::Cow;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::AlgebraError;
use crate::field::Field;
use crate::gcd::{exact_div, poly_gcd};
use crate::monomial::{Monomial, MonomialOrder};
use crate::poly::Polynomial;
use crate::rational::Rational;

type Poly = Polynomial<Rational>;

/// Relative scale for the vanishing-denominator test in [`RationalFunction::specialize`].
pub const DENOMINATOR_TOLERANCE: f64 = 1e-12;

/// A reduced fraction of parameter polynomials.
///
/// Canonical form: the denominator is monic under grevlex and coprime to the
/// numerator; zero is `0/1`. Constants built by [`Field::zero`]/[`Field::one`]
/// carry no parameters and adopt the arity of whatever they meet.
#[derive(Clone, PartialEq)]
pub struct RationalFunction {
    num: Poly,
    den: Poly,
}

impl RationalFunction {
    pub fn constant(nparams: usize, c: Rational) -> Self {
        RationalFunction { num: Poly::constant(nparams, c), den: Poly::one(nparams) }
    }

    pub fn param(nparams: usize, i: usize) -> Self {
        Self::from_polynomial(Poly::var(nparams, i))
    }

    pub fn from_polynomial(p: Poly) -> Self {
        let n = p.nvars();
        RationalFunction { num: p, den: Poly::one(n) }
    }

    /// `num / den`, reduced. Fails if `den` is zero.
    pub fn new(num: Poly, den: Poly) -> Result<Self, AlgebraError> {
        if den.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        assert_eq!(num.nvars(), den.nvars());
        Ok(Self::reduced(num, den))
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn nparams(&self) -> usize {
        self.num.nvars()
    }

    /// The polynomial itself when the denominator is 1.
    pub fn as_polynomial(&self) -> Option<&Poly> {
        if self.den.is_constant() {
            Some(&self.num)
        } else {
            None
        }
    }

    pub fn as_rational(&self) -> Option<Rational> {
        if self.num.is_constant() && self.den.is_constant() {
            Some(self.num.constant_term())
        } else {
            None
        }
    }

    /// Re-expresses a parameter-free constant in `nparams` parameters.
    pub fn lift(&self, nparams: usize) -> Self {
        if self.nparams() == nparams {
            return self.clone();
        }
        assert!(self.num.is_constant() && self.den.is_constant(), "parameter count mismatch");
        RationalFunction {
            num: Poly::constant(nparams, self.num.constant_term()),
            den: Poly::constant(nparams, self.den.constant_term()),
        }
    }

    fn align<'a>(a: &'a Self, b: &'a Self) -> (Cow<'a, Self>, Cow<'a, Self>) {
        match a.nparams().cmp(&b.nparams()) {
            core::cmp::Ordering::Equal => (Cow::Borrowed(a), Cow::Borrowed(b)),
            core::cmp::Ordering::Less => (Cow::Owned(a.lift(b.nparams())), Cow::Borrowed(b)),
            core::cmp::Ordering::Greater => (Cow::Borrowed(a), Cow::Owned(b.lift(a.nparams()))),
        }
    }

    fn reduced(num: Poly, den: Poly) -> Self {
        let n = num.nvars();
        if num.is_zero() {
            return RationalFunction { num, den: Poly::one(n) };
        }
        if den.is_constant() {
            let inv = den.constant_term().inv().expect("nonzero denominator");
            return RationalFunction { num: num.scale(&inv), den: Poly::one(n) };
        }
        let g = poly_gcd(&num, &den);
        let (num, den) = if g.is_constant() {
            (num, den)
        } else {
            (exact_div(&num, &g).unwrap(), exact_div(&den, &g).unwrap())
        };
        let lc = den.leading_coefficient(&MonomialOrder::grevlex()).unwrap().inv().unwrap();
        let (num, den) = (num.scale(&lc), den.scale(&lc));
        if den.is_constant() {
            return RationalFunction { num, den: Poly::one(n) };
        }
        RationalFunction { num, den }
    }

    /// Evaluates at a numeric parameter point.
    ///
    /// Fails with [`AlgebraError::DenominatorVanishes`] when
    /// `|den(x)| ≤ τ·(1 + max |den coefficient|)`, `τ` = [`DENOMINATOR_TOLERANCE`].
    pub fn specialize(&self, x: &[f64]) -> Result<f64, AlgebraError> {
        let this = self.lift(x.len());
        let d = this.den.eval_f64(x);
        if libm::fabs(d) <= DENOMINATOR_TOLERANCE * (1.0 + this.den.max_abs_coeff()) {
            return Err(AlgebraError::DenominatorVanishes);
        }
        Ok(this.num.eval_f64(x) / d)
    }

    pub fn specialize_exact(&self, x: &[Rational]) -> Result<Rational, AlgebraError> {
        let this = self.lift(x.len());
        let d = this.den.eval_exact(x);
        if d.is_zero() {
            return Err(AlgebraError::DenominatorVanishes);
        }
        this.num.eval_exact(x).div(&d)
    }

    pub fn pow(&self, e: u32) -> Result<Self, AlgebraError> {
        Ok(RationalFunction { num: self.num.pow(e)?, den: self.den.pow(e)? })
    }

    /// Non-constant numerator and denominator factors; the values that must
    /// stay nonzero for this expression (or its inverse) to specialize.
    pub fn critical_polynomials(&self) -> Vec<Poly> {
        [&self.num, &self.den].into_iter().filter(|p| !p.is_constant()).cloned().collect()
    }

    pub fn to_string_with(&self, names: &[String]) -> String {
        crate::parse::format_rational_function(self, names)
    }
}

impl Field for RationalFunction {
    fn zero() -> Self {
        RationalFunction { num: Poly::zero(0), den: Poly::one(0) }
    }

    fn one() -> Self {
        RationalFunction { num: Poly::one(0), den: Poly::one(0) }
    }

    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn is_one(&self) -> bool {
        self.den.is_constant() && self.num.is_constant() && self.num.constant_term().is_one()
    }

    fn add(&self, other: &Self) -> Self {
        let (a, b) = Self::align(self, other);
        if a.den == b.den {
            let num = &a.num + &b.num;
            if a.den.is_constant() {
                return RationalFunction { num, den: a.den.clone() };
            }
            return Self::reduced(num, a.den.clone());
        }
        Self::reduced(&(&a.num * &b.den) + &(&b.num * &a.den), &a.den * &b.den)
    }

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    fn mul(&self, other: &Self) -> Self {
        let (a, b) = Self::align(self, other);
        if a.den.is_constant() && b.den.is_constant() {
            return RationalFunction { num: &a.num * &b.num, den: a.den.clone() };
        }
        Self::reduced(&a.num * &b.num, &a.den * &b.den)
    }

    fn neg(&self) -> Self {
        RationalFunction { num: -&self.num, den: self.den.clone() }
    }

    fn inv(&self) -> Result<Self, AlgebraError> {
        if self.num.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        Ok(Self::reduced(self.den.clone(), self.num.clone()))
    }

    fn from_rational(r: &Rational) -> Self {
        RationalFunction::constant(0, r.clone())
    }

    fn normalize(&self) -> Self {
        Self::reduced(self.num.clone(), self.den.clone())
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.nparams()).map(|i| alloc::format!("x{i}")).collect();
        f.write_str(&self.to_string_with(&names))
    }
}

impl fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Monomial content: the largest monomial dividing every term.
pub fn monomial_content(p: &Poly) -> Monomial {
    let mut it = p.terms().map(|(m, _)| m);
    let Some(first) = it.next() else { return Monomial::one(p.nvars()) };
    let mut exps = first.exponents().to_vec();
    for m in it {
        for (e, f) in exps.iter_mut().zip(m.exponents()) {
            *e = (*e).min(*f);
        }
    }
    Monomial::new(exps).unwrap()
}
