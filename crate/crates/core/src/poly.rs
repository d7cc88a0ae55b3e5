//! Sparse multivariate polynomials over an exact field.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use crate::error::AlgebraError;
use crate::field::Field;
use crate::monomial::{Monomial, MonomialOrder};
use crate::rational::Rational;

/// Names of the three kinds of symbols in a parametric program: decision
/// variables `u`, Lagrange multipliers `μ` and parameters `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableSpace {
    decision_names: Vec<String>,
    multiplier_names: Vec<String>,
    parameter_names: Vec<String>,
}

impl VariableSpace {
    pub fn new(
        decision_names: Vec<String>,
        multiplier_names: Vec<String>,
        parameter_names: Vec<String>,
    ) -> Result<Self, String> {
        let mut seen = alloc::collections::BTreeSet::new();
        for name in decision_names.iter().chain(&multiplier_names).chain(&parameter_names) {
            if !crate::parse::is_identifier(name) {
                return Err(format!("`{name}` is not a valid identifier"));
            }
            if !seen.insert(name.as_str()) {
                return Err(format!("duplicate variable name `{name}`"));
            }
        }
        Ok(VariableSpace { decision_names, multiplier_names, parameter_names })
    }

    /// Decision and parameter names, with multipliers `mu0 … mu{q-1}` chosen
    /// so that they do not collide with either.
    pub fn with_default_multipliers(
        decision_names: Vec<String>,
        parameter_names: Vec<String>,
        q: usize,
    ) -> Result<Self, String> {
        let taken = |s: &str| decision_names.iter().chain(&parameter_names).any(|n| n == s);
        let mut prefix = String::from("mu");
        while (0..q).any(|i| taken(&format!("{prefix}{i}"))) {
            prefix.push('_');
        }
        let multipliers = (0..q).map(|i| format!("{prefix}{i}")).collect();
        Self::new(decision_names, multipliers, parameter_names)
    }

    pub fn decision_names(&self) -> &[String] {
        &self.decision_names
    }
    pub fn multiplier_names(&self) -> &[String] {
        &self.multiplier_names
    }
    pub fn parameter_names(&self) -> &[String] {
        &self.parameter_names
    }
    pub fn m(&self) -> usize {
        self.decision_names.len()
    }
    pub fn q(&self) -> usize {
        self.multiplier_names.len()
    }
    pub fn n(&self) -> usize {
        self.parameter_names.len()
    }

    /// Variable names of the program ring: decision variables then parameters.
    pub fn program_names(&self) -> Vec<String> {
        self.decision_names.iter().chain(&self.parameter_names).cloned().collect()
    }
}

/// A polynomial in `nvars` variables: a map from monomials to nonzero
/// coefficients. The zero polynomial has no terms.
#[derive(Clone, PartialEq)]
pub struct Polynomial<F> {
    nvars: usize,
    terms: BTreeMap<Monomial, F>,
}

impl<F: Field> Polynomial<F> {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, F::one())
    }

    pub fn constant(nvars: usize, c: F) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(nvars), c);
        }
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        Self::monomial(Monomial::var(nvars, i), F::one())
    }

    pub fn monomial(m: Monomial, c: F) -> Self {
        let mut p = Self::zero(m.nvars());
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    /// Builds a polynomial from (possibly repeated) terms, collecting them.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, F)>>(nvars: usize, terms: I) -> Self {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            assert_eq!(m.nvars(), nvars, "monomial arity");
            p.add_term(m, &c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &F)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Option<&F> {
        self.terms.get(m)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    /// The constant term (zero if absent).
    pub fn constant_term(&self) -> F {
        self.terms.get(&Monomial::one(self.nvars)).cloned().unwrap_or_else(F::zero)
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|m| m.exponents()[var]).max().unwrap_or(0)
    }

    fn add_term(&mut self, m: Monomial, c: &F) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(old) => {
                let s = old.add(c);
                if s.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *old = s;
                }
            }
            None => {
                self.terms.insert(m, c.clone());
            }
        }
    }

    fn check_ring(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.nvars == other.nvars {
            Ok(())
        } else {
            Err(AlgebraError::RingMismatch { left: self.nvars, right: other.nvars })
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_ring(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_ring(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), &c.neg());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_ring(other)?;
        let mut out = Self::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb)?, &ca.mul(cb));
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &F) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a.mul(c))).collect(),
        }
    }

    /// `c · t · self`.
    pub fn mul_term(&self, t: &Monomial, c: &F) -> Result<Self, AlgebraError> {
        let mut out = Self::zero(self.nvars);
        if c.is_zero() {
            return Ok(out);
        }
        for (m, a) in &self.terms {
            out.terms.insert(m.mul(t)?, a.mul(c));
        }
        Ok(out)
    }

    /// In place `self -= c · t · g`.
    pub fn sub_scaled_shift(&mut self, c: &F, t: &Monomial, g: &Self) -> Result<(), AlgebraError> {
        for (m, a) in &g.terms {
            let key = m.mul(t)?;
            let delta = a.mul(c);
            match self.terms.get_mut(&key) {
                Some(old) => {
                    let s = old.sub(&delta);
                    if s.is_zero() {
                        self.terms.remove(&key);
                    } else {
                        *old = s;
                    }
                }
                None => {
                    self.terms.insert(key, delta.neg());
                }
            }
        }
        Ok(())
    }

    pub fn pow(&self, e: u32) -> Result<Self, AlgebraError> {
        let mut acc = Self::one(self.nvars);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.checked_mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.checked_mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Maximal term under `order`.
    pub fn leading_term(&self, order: &MonomialOrder) -> Result<(&Monomial, &F), AlgebraError> {
        self.terms
            .iter()
            .max_by(|a, b| order.cmp(a.0, b.0))
            .ok_or(AlgebraError::ZeroPolynomial)
    }

    pub fn leading_monomial(&self, order: &MonomialOrder) -> Result<&Monomial, AlgebraError> {
        self.leading_term(order).map(|t| t.0)
    }

    pub fn leading_coefficient(&self, order: &MonomialOrder) -> Result<&F, AlgebraError> {
        self.leading_term(order).map(|t| t.1)
    }

    /// Divides by the leading coefficient.
    pub fn make_monic(&self, order: &MonomialOrder) -> Result<Self, AlgebraError> {
        let lc = self.leading_coefficient(order)?.inv()?;
        Ok(self.scale(&lc))
    }

    /// Terms sorted from largest to smallest under `order`.
    pub fn sorted_terms(&self, order: &MonomialOrder) -> Vec<(&Monomial, &F)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| order.cmp(b.0, a.0));
        v
    }

    pub fn map_coeffs<G: Field>(&self, mut f: impl FnMut(&F) -> G) -> Polynomial<G> {
        let mut out = Polynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), &f(c));
        }
        out
    }

    /// Canonicalizes every coefficient.
    pub fn normalize_coeffs(&self) -> Self {
        self.map_coeffs(F::normalize)
    }

    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.exponents()[var];
            if e == 0 {
                continue;
            }
            let factor = F::from_rational(&Rational::from_integer(e as i64));
            out.add_term(m.with_exponent(var, e - 1), &c.mul(&factor));
        }
        out
    }

    /// Substitutes `subs[i]` for variable `i`. All substitutes must share one
    /// target ring.
    pub fn compose(&self, subs: &[Polynomial<F>]) -> Result<Polynomial<F>, AlgebraError> {
        assert_eq!(subs.len(), self.nvars, "one substitute per variable");
        let target = subs.first().map(|s| s.nvars).unwrap_or(0);
        let mut powers: Vec<Vec<Polynomial<F>>> = subs.iter().map(|s| vec![Polynomial::one(s.nvars), s.clone()]).collect();
        let mut out = Polynomial::zero(target);
        for (m, c) in &self.terms {
            let mut term = Polynomial::constant(target, c.clone());
            for (i, &e) in m.exponents().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap().checked_mul(&subs[i])?;
                    powers[i].push(next);
                }
                term = term.checked_mul(&powers[i][e as usize])?;
            }
            out = out.checked_add(&term)?;
        }
        Ok(out)
    }

    /// Re-embeds into a ring of `nvars` variables; `map[i]` is the new index
    /// of old variable `i`.
    pub fn remap(&self, nvars: usize, map: &[usize]) -> Result<Self, AlgebraError> {
        let mut out = Self::zero(nvars);
        for (m, c) in &self.terms {
            let mut exps = vec![0u32; nvars];
            for (i, &e) in m.exponents().iter().enumerate() {
                exps[map[i]] += e;
            }
            out.add_term(Monomial::new(exps)?, c);
        }
        Ok(out)
    }

    /// Evaluates with a caller-supplied coefficient map into a numeric type.
    pub fn eval_with<T, C>(&self, point: &[T], mut coeff: C) -> T
    where
        T: Copy + Add<Output = T> + Mul<Output = T> + num_traits::One + num_traits::Zero,
        C: FnMut(&F) -> T,
    {
        let mut acc = T::zero();
        for (m, c) in &self.terms {
            let mut t = coeff(c);
            for (i, &e) in m.exponents().iter().enumerate() {
                for _ in 0..e {
                    t = t * point[i];
                }
            }
            acc = acc + t;
        }
        acc
    }
}

impl Polynomial<Rational> {
    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        self.eval_with(point, Rational::to_f64)
    }

    pub fn eval_exact(&self, point: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    t = t.mul(&point[i].pow(e));
                }
            }
            acc = acc.add(&t);
        }
        acc
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| libm::fabs(c.to_f64())).fold(0.0, f64::max)
    }
}

/// Outcome of multivariate division: `p = Σ quotients[i]·basis[i] + remainder`.
#[derive(Clone, Debug, PartialEq)]
pub struct Division<F> {
    pub quotients: Vec<Polynomial<F>>,
    pub remainder: Polynomial<F>,
}

/// Multivariate division. The leading term is always reduced first, trying
/// basis elements in list order; terms no leading monomial divides move to
/// the remainder.
pub fn reduce<F: Field>(
    p: &Polynomial<F>,
    basis: &[Polynomial<F>],
    order: &MonomialOrder,
) -> Result<Division<F>, AlgebraError> {
    let mut heads = Vec::with_capacity(basis.len());
    for g in basis {
        p.check_ring(g)?;
        let (m, c) = g.leading_term(order)?;
        heads.push((m.clone(), c.inv()?));
    }
    let mut rest = p.clone();
    let mut remainder = Polynomial::zero(p.nvars);
    let mut quotients = vec![Polynomial::zero(p.nvars); basis.len()];
    while !rest.is_zero() {
        let (lm, lc) = {
            let (m, c) = rest.leading_term(order)?;
            (m.clone(), c.clone())
        };
        let hit = heads.iter().enumerate().find_map(|(i, (hm, hinv))| {
            hm.divide_into(&lm).map(|t| (i, t, lc.mul(hinv)))
        });
        match hit {
            Some((i, t, c)) => {
                quotients[i].add_term(t.clone(), &c);
                rest.sub_scaled_shift(&c, &t, &basis[i])?;
            }
            None => {
                rest.terms.remove(&lm);
                remainder.terms.insert(lm, lc);
            }
        }
    }
    Ok(Division { quotients, remainder })
}

impl<'a, F: Field> Add for &'a Polynomial<F> {
    type Output = Polynomial<F>;
    fn add(self, rhs: Self) -> Polynomial<F> {
        self.checked_add(rhs).expect("polynomial ring mismatch")
    }
}

impl<'a, F: Field> Sub for &'a Polynomial<F> {
    type Output = Polynomial<F>;
    fn sub(self, rhs: Self) -> Polynomial<F> {
        self.checked_sub(rhs).expect("polynomial ring mismatch")
    }
}

impl<'a, F: Field> Mul for &'a Polynomial<F> {
    type Output = Polynomial<F>;
    fn mul(self, rhs: Self) -> Polynomial<F> {
        self.checked_mul(rhs).expect("polynomial ring mismatch")
    }
}

impl<'a, F: Field> Neg for &'a Polynomial<F> {
    type Output = Polynomial<F>;
    fn neg(self) -> Polynomial<F> {
        self.map_coeffs(F::neg)
    }
}

impl<F: Field> fmt::Display for Polynomial<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.nvars).map(|i| format!("v{i}")).collect();
        f.write_str(&crate::parse::format_polynomial(self, &names))
    }
}

impl<F: fmt::Debug> fmt::Debug for Polynomial<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter().map(|(m, c)| (m.exponents(), c))).finish()
    }
}
