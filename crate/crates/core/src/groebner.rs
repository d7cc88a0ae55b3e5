//! Buchberger's algorithm, reduced Gröbner bases and the quotient-ring basis
//! of standard monomials.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::AlgebraError;
use crate::field::Field;
use crate::monomial::{Monomial, MonomialOrder};
use crate::poly::Polynomial;

/// Work budget for one Buchberger run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroebnerConfig {
    /// Maximum number of single-term reduction steps, summed over the run.
    pub max_steps: usize,
}

impl Default for GroebnerConfig {
    fn default() -> Self {
        GroebnerConfig { max_steps: 2_000_000 }
    }
}

/// A Gröbner basis of an ideal of a polynomial ring in `nvars` unknowns.
#[derive(Clone, Debug, PartialEq)]
pub struct GroebnerBasis<F> {
    elements: Vec<Polynomial<F>>,
    order: MonomialOrder,
    reduced: bool,
    nvars: usize,
}

/// The standard monomials `b_1 < … < b_l` of a zero-dimensional ideal,
/// a vector-space basis of the quotient ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StandardBasis {
    monomials: Vec<Monomial>,
    index: BTreeMap<Monomial, usize>,
}

impl StandardBasis {
    pub fn new(monomials: Vec<Monomial>) -> Self {
        let index = monomials.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        StandardBasis { monomials, index }
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn dimension(&self) -> usize {
        self.monomials.len()
    }

    pub fn position(&self, m: &Monomial) -> Option<usize> {
        self.index.get(m).copied()
    }
}

/// Result of a traced Buchberger run: the reduced basis plus every leading
/// coefficient that was divided by along the way.
#[derive(Clone, Debug)]
pub struct BuchbergerTrace<F> {
    pub basis: GroebnerBasis<F>,
    pub divisors: Vec<F>,
}

/// `S(f, g) = (L/lt(f))·f − (L/lt(g))·g`, `L = lcm(lm f, lm g)`.
pub fn s_polynomial<F: Field>(
    f: &Polynomial<F>,
    g: &Polynomial<F>,
    order: &MonomialOrder,
) -> Result<Polynomial<F>, AlgebraError> {
    let (mf, cf) = f.leading_term(order)?;
    let (mg, cg) = g.leading_term(order)?;
    let l = mf.lcm(mg);
    let a = f.mul_term(&mf.divide_into(&l).unwrap(), &cf.inv()?)?;
    let b = g.mul_term(&mg.divide_into(&l).unwrap(), &cg.inv()?)?;
    a.checked_sub(&b)
}

struct Reducer<'a, F> {
    order: &'a MonomialOrder,
    steps: usize,
    max_steps: usize,
    _f: core::marker::PhantomData<F>,
}

impl<F: Field> Reducer<'_, F> {
    /// Full normal form of `p` modulo monic `basis` (heads cached in `lms`).
    fn normal_form(
        &mut self,
        p: &Polynomial<F>,
        basis: &[Polynomial<F>],
        lms: &[Monomial],
        skip: Option<usize>,
    ) -> Result<Polynomial<F>, AlgebraError> {
        let mut rest = p.clone();
        let mut remainder = Polynomial::zero(p.nvars());
        while !rest.is_zero() {
            let (lm, lc) = {
                let (m, c) = rest.leading_term(self.order)?;
                (m.clone(), c.clone())
            };
            let hit = lms
                .iter()
                .enumerate()
                .filter(|(i, _)| Some(*i) != skip)
                .find_map(|(i, h)| h.divide_into(&lm).map(|t| (i, t)));
            match hit {
                Some((i, t)) => {
                    self.steps += 1;
                    if self.steps > self.max_steps {
                        return Err(AlgebraError::BudgetExceeded(self.max_steps));
                    }
                    rest.sub_scaled_shift(&lc, &t, &basis[i])?;
                }
                None => {
                    let lead = Polynomial::monomial(lm, lc);
                    rest = rest.checked_sub(&lead)?;
                    remainder = remainder.checked_add(&lead)?;
                }
            }
        }
        Ok(remainder)
    }
}

/// Reduced Gröbner basis of the ideal generated by `generators`.
pub fn buchberger<F: Field>(
    generators: &[Polynomial<F>],
    nvars: usize,
    order: &MonomialOrder,
    config: &GroebnerConfig,
) -> Result<GroebnerBasis<F>, AlgebraError> {
    buchberger_traced(generators, nvars, order, config).map(|t| t.basis)
}

/// [`buchberger`], also returning the leading coefficients it divided by.
///
/// Pairs are processed by the normal strategy (smallest lcm first, ties by
/// index) with the coprime-leading-monomial and chain criteria. The run stops
/// early once a nonzero constant enters the basis.
pub fn buchberger_traced<F: Field>(
    generators: &[Polynomial<F>],
    nvars: usize,
    order: &MonomialOrder,
    config: &GroebnerConfig,
) -> Result<BuchbergerTrace<F>, AlgebraError> {
    let mut divisors = Vec::new();
    let trivial = |divisors: Vec<F>| BuchbergerTrace {
        basis: GroebnerBasis { elements: vec![Polynomial::one(nvars)], order: order.clone(), reduced: true, nvars },
        divisors,
    };
    let mut basis: Vec<Polynomial<F>> = Vec::new();
    let mut lms: Vec<Monomial> = Vec::new();
    for g in generators {
        if g.nvars() != nvars {
            return Err(AlgebraError::RingMismatch { left: nvars, right: g.nvars() });
        }
        if g.is_zero() {
            continue;
        }
        let lc = g.leading_coefficient(order)?.clone();
        let g = g.scale(&lc.inv()?);
        if !lc.is_one() {
            divisors.push(lc);
        }
        if g.is_constant() {
            return Ok(trivial(divisors));
        }
        lms.push(g.leading_monomial(order)?.clone());
        basis.push(g);
    }

    let mut reducer = Reducer { order, steps: 0, max_steps: config.max_steps, _f: core::marker::PhantomData };
    // pending pairs keyed by (lcm degree, j, i) for a deterministic normal strategy
    let mut pending: BTreeSet<(u32, usize, usize)> = BTreeSet::new();
    let mut is_pending: BTreeSet<(usize, usize)> = BTreeSet::new();
    let push_pairs = |j: usize, lms: &[Monomial], pending: &mut BTreeSet<_>, is_pending: &mut BTreeSet<_>| {
        for i in 0..j {
            pending.insert((lms[i].lcm(&lms[j]).degree(), j, i));
            is_pending.insert((i, j));
        }
    };
    for j in 0..basis.len() {
        push_pairs(j, &lms, &mut pending, &mut is_pending);
    }

    while let Some(&key) = pending.iter().next() {
        pending.remove(&key);
        let (_, j, i) = key;
        is_pending.remove(&(i, j));
        if lms[i].is_coprime(&lms[j]) {
            continue;
        }
        let l = lms[i].lcm(&lms[j]);
        let chain = (0..basis.len()).any(|k| {
            k != i
                && k != j
                && lms[k].divides(&l)
                && !is_pending.contains(&(i.min(k), i.max(k)))
                && !is_pending.contains(&(j.min(k), j.max(k)))
        });
        if chain {
            continue;
        }
        let s = s_polynomial(&basis[i], &basis[j], order)?;
        let r = reducer.normal_form(&s, &basis, &lms, None)?;
        if r.is_zero() {
            continue;
        }
        let lc = r.leading_coefficient(order)?.clone();
        let r = r.scale(&lc.inv()?);
        if !lc.is_one() {
            divisors.push(lc);
        }
        if r.is_constant() {
            return Ok(trivial(divisors));
        }
        lms.push(r.leading_monomial(order)?.clone());
        basis.push(r);
        push_pairs(basis.len() - 1, &lms, &mut pending, &mut is_pending);
    }

    // minimal basis: drop elements whose head is divisible by another head
    let mut keep: Vec<usize> = Vec::new();
    for i in 0..basis.len() {
        let redundant = (0..basis.len()).any(|k| {
            k != i && lms[k].divides(&lms[i]) && (lms[k] != lms[i] || k < i)
        });
        if !redundant {
            keep.push(i);
        }
    }
    let mut minimal: Vec<Polynomial<F>> = keep.iter().map(|&i| basis[i].clone()).collect();
    let min_lms: Vec<Monomial> = keep.iter().map(|&i| lms[i].clone()).collect();
    // interreduce the tails; heads are untouched, so elements stay monic
    for i in 0..minimal.len() {
        let reduced = reducer.normal_form(&minimal[i], &minimal, &min_lms, Some(i))?;
        minimal[i] = reduced.normalize_coeffs();
    }
    let mut order_idx: Vec<usize> = (0..minimal.len()).collect();
    order_idx.sort_by(|&a, &b| order.cmp(&min_lms[a], &min_lms[b]));
    let elements = order_idx.into_iter().map(|i| minimal[i].clone()).collect();
    Ok(BuchbergerTrace {
        basis: GroebnerBasis { elements, order: order.clone(), reduced: true, nvars },
        divisors,
    })
}

impl<F: Field> GroebnerBasis<F> {
    pub fn elements(&self) -> &[Polynomial<F>] {
        &self.elements
    }

    pub fn order(&self) -> &MonomialOrder {
        &self.order
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn leading_monomials(&self) -> Vec<Monomial> {
        self.elements.iter().map(|g| g.leading_monomial(&self.order).unwrap().clone()).collect()
    }

    /// True iff the basis is `{1}`, i.e. the ideal is the whole ring.
    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1 && self.elements[0].is_constant()
    }

    /// Every unknown has a pure power among the leading monomials.
    pub fn is_zero_dimensional(&self) -> bool {
        if self.is_trivial() {
            return true;
        }
        let lms = self.leading_monomials();
        (0..self.nvars).all(|v| lms.iter().any(|m| m.pure_power_of() == Some(v)))
    }

    /// Remainder of `p` on division by the basis; unique because the basis is
    /// Gröbner.
    pub fn normal_form(&self, p: &Polynomial<F>) -> Result<Polynomial<F>, AlgebraError> {
        let lms = self.leading_monomials();
        let mut reducer = Reducer { order: &self.order, steps: 0, max_steps: usize::MAX, _f: core::marker::PhantomData };
        reducer.normal_form(p, &self.elements, &lms, None).map(|r| r.normalize_coeffs())
    }

    /// The standard monomials, ascending under the basis order.
    pub fn standard_monomials(&self) -> Result<StandardBasis, AlgebraError> {
        if self.is_trivial() {
            return Ok(StandardBasis::new(Vec::new()));
        }
        if !self.is_zero_dimensional() {
            return Err(AlgebraError::NotZeroDimensional);
        }
        let lms = self.leading_monomials();
        let mut found: BTreeSet<Monomial> = BTreeSet::new();
        let mut queue: VecDeque<Monomial> = VecDeque::new();
        let one = Monomial::one(self.nvars);
        found.insert(one.clone());
        queue.push_back(one);
        // standard monomials are closed under division, so a breadth-first
        // walk from 1 reaches all of them
        while let Some(m) = queue.pop_front() {
            for v in 0..self.nvars {
                let next = m.mul(&Monomial::var(self.nvars, v))?;
                if !found.contains(&next) && !lms.iter().any(|h| h.divides(&next)) {
                    found.insert(next.clone());
                    queue.push_back(next);
                }
            }
        }
        let mut monomials: Vec<Monomial> = found.into_iter().collect();
        monomials.sort_by(|a, b| self.order.cmp(a, b));
        Ok(StandardBasis::new(monomials))
    }

    /// Number of solutions counted with multiplicity: the constant Hilbert
    /// polynomial of a zero-dimensional ideal, i.e. the quotient dimension.
    pub fn solution_count(&self) -> Result<usize, AlgebraError> {
        self.standard_monomials().map(|b| b.dimension())
    }

    /// True when every element has total degree at most one.
    pub fn is_linear(&self) -> bool {
        self.elements.iter().all(|g| g.total_degree().unwrap_or(0) <= 1)
    }
}
