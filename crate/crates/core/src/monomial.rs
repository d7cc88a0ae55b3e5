//! Exponent vectors and monomial orders.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::AlgebraError;

/// A power product `v_0^{e_0} ⋯ v_{k-1}^{e_{k-1}}` with its cached total degree.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Monomial {
    exps: Vec<u32>,
    degree: u32,
}

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial { exps: vec![0; nvars], degree: 0 }
    }

    pub fn new(exps: Vec<u32>) -> Result<Self, AlgebraError> {
        let mut degree = 0u32;
        for &e in &exps {
            degree = degree.checked_add(e).ok_or(AlgebraError::ExponentOverflow)?;
        }
        Ok(Monomial { exps, degree })
    }

    /// The monomial `v_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut exps = vec![0; nvars];
        exps[i] = 1;
        Monomial { exps, degree: 1 }
    }

    pub fn nvars(&self) -> usize {
        self.exps.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exps
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_one(&self) -> bool {
        self.degree == 0
    }

    pub fn mul(&self, other: &Monomial) -> Result<Monomial, AlgebraError> {
        debug_assert_eq!(self.exps.len(), other.exps.len());
        let mut exps = Vec::with_capacity(self.exps.len());
        for (a, b) in self.exps.iter().zip(&other.exps) {
            exps.push(a.checked_add(*b).ok_or(AlgebraError::ExponentOverflow)?);
        }
        let degree = self
            .degree
            .checked_add(other.degree)
            .ok_or(AlgebraError::ExponentOverflow)?;
        Ok(Monomial { exps, degree })
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.degree <= other.degree && self.exps.iter().zip(&other.exps).all(|(a, b)| a <= b)
    }

    /// `other / self`, if `self` divides `other`.
    pub fn divide_into(&self, other: &Monomial) -> Option<Monomial> {
        if !self.divides(other) {
            return None;
        }
        let exps: Vec<u32> = self.exps.iter().zip(&other.exps).map(|(a, b)| b - a).collect();
        Some(Monomial { exps, degree: other.degree - self.degree })
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        let exps: Vec<u32> = self.exps.iter().zip(&other.exps).map(|(a, b)| *a.max(b)).collect();
        let degree = exps.iter().sum();
        Monomial { exps, degree }
    }

    pub fn is_coprime(&self, other: &Monomial) -> bool {
        self.exps.iter().zip(&other.exps).all(|(a, b)| *a == 0 || *b == 0)
    }

    /// Index of the single variable if this is a pure power `v_i^e`, `e ≥ 1`.
    pub fn pure_power_of(&self) -> Option<usize> {
        let mut found = None;
        for (i, &e) in self.exps.iter().enumerate() {
            if e > 0 {
                if found.is_some() {
                    return None;
                }
                found = Some(i);
            }
        }
        found
    }

    /// Restriction to a contiguous range of variables.
    pub fn slice(&self, range: core::ops::Range<usize>) -> Monomial {
        let exps = self.exps[range].to_vec();
        let degree = exps.iter().sum();
        Monomial { exps, degree }
    }

    /// Concatenation `(self, other)` as a monomial in the product ring.
    pub fn concat(&self, other: &Monomial) -> Monomial {
        let mut exps = self.exps.clone();
        exps.extend_from_slice(&other.exps);
        Monomial { exps, degree: self.degree + other.degree }
    }

    pub fn with_exponent(&self, i: usize, e: u32) -> Monomial {
        let mut exps = self.exps.clone();
        let old = exps[i];
        exps[i] = e;
        Monomial { exps, degree: self.degree - old + e }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderKind {
    #[serde(rename = "grevlex")]
    GradedReverseLex,
    Lex,
    #[serde(rename = "grlex")]
    GradedLex,
}

/// A monomial order, optionally applied after permuting the variables.
///
/// `variable_permutation[k]` is the index of the variable that plays the
/// role of the k-th (most significant) variable.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct MonomialOrder {
    pub kind: OrderKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variable_permutation: Option<Vec<usize>>,
}

impl Default for MonomialOrder {
    fn default() -> Self {
        MonomialOrder::grevlex()
    }
}

impl MonomialOrder {
    pub fn grevlex() -> Self {
        MonomialOrder { kind: OrderKind::GradedReverseLex, variable_permutation: None }
    }

    pub fn lex() -> Self {
        MonomialOrder { kind: OrderKind::Lex, variable_permutation: None }
    }

    pub fn grlex() -> Self {
        MonomialOrder { kind: OrderKind::GradedLex, variable_permutation: None }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            OrderKind::GradedReverseLex => "grevlex",
            OrderKind::Lex => "lex",
            OrderKind::GradedLex => "grlex",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "grevlex" => Some(Self::grevlex()),
            "lex" => Some(Self::lex()),
            "grlex" => Some(Self::grlex()),
            _ => None,
        }
    }

    #[inline]
    fn exp(&self, m: &Monomial, k: usize) -> u32 {
        match &self.variable_permutation {
            Some(p) => m.exps[p[k]],
            None => m.exps[k],
        }
    }

    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        let n = a.exps.len();
        match self.kind {
            OrderKind::Lex => {
                for k in 0..n {
                    match self.exp(a, k).cmp(&self.exp(b, k)) {
                        Ordering::Equal => continue,
                        o => return o,
                    }
                }
                Ordering::Equal
            }
            OrderKind::GradedLex => a.degree.cmp(&b.degree).then_with(|| {
                for k in 0..n {
                    match self.exp(a, k).cmp(&self.exp(b, k)) {
                        Ordering::Equal => continue,
                        o => return o,
                    }
                }
                Ordering::Equal
            }),
            OrderKind::GradedReverseLex => a.degree.cmp(&b.degree).then_with(|| {
                for k in (0..n).rev() {
                    match self.exp(a, k).cmp(&self.exp(b, k)) {
                        Ordering::Equal => continue,
                        // smaller exponent in the last differing variable wins
                        o => return o.reverse(),
                    }
                }
                Ordering::Equal
            }),
        }
    }
}
