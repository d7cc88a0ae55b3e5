//! Offline phase: one KKT sub-ideal per active set, its Gröbner basis over
//! ℚ(x), and either a closed-form solution map or companion matrices.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{AlgebraError, CompileError};
use crate::field::Field;
use crate::groebner::{buchberger_traced, GroebnerConfig, StandardBasis};
use crate::monomial::{Monomial, MonomialOrder};
use crate::mpc::ControlProblem;
use crate::parse::parse_polynomial;
use crate::poly::{Polynomial, VariableSpace};
use crate::quotient::{commute, multiplication_matrix};
use crate::rational::Rational;
use crate::ratfunc::RationalFunction;

pub const FORMAT_VERSION: u32 = 1;

/// `min_u J(u, x)` subject to `g_i(u, x) ≤ 0`.
///
/// Objective and constraints are polynomials over ℚ in the program ring:
/// the `m` decision variables followed by the `n` parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct ParametricProgram {
    pub space: VariableSpace,
    pub objective: Polynomial<Rational>,
    pub constraints: Vec<Polynomial<Rational>>,
}

impl ParametricProgram {
    pub fn new(
        decision_names: Vec<String>,
        parameter_names: Vec<String>,
        objective: Polynomial<Rational>,
        constraints: Vec<Polynomial<Rational>>,
    ) -> Result<Self, CompileError> {
        let space = VariableSpace::with_default_multipliers(decision_names, parameter_names, constraints.len())
            .map_err(CompileError::InvalidProgram)?;
        let width = space.m() + space.n();
        if space.m() == 0 {
            return Err(CompileError::InvalidProgram("no decision variables".into()));
        }
        for p in core::iter::once(&objective).chain(&constraints) {
            if p.nvars() != width {
                return Err(CompileError::InvalidProgram(format!(
                    "polynomial has {} variables, program ring has {width}",
                    p.nvars()
                )));
            }
        }
        Ok(ParametricProgram { space, objective, constraints })
    }

    /// Builds a program from textual polynomials.
    pub fn parse(
        decision_names: &[&str],
        parameter_names: &[&str],
        objective: &str,
        constraints: &[&str],
    ) -> Result<Self, CompileError> {
        let d: Vec<String> = decision_names.iter().map(|s| s.to_string()).collect();
        let p: Vec<String> = parameter_names.iter().map(|s| s.to_string()).collect();
        let names: Vec<String> = d.iter().chain(&p).cloned().collect();
        let parse = |s: &str| {
            parse_polynomial(s, &names).map_err(|e| CompileError::InvalidProgram(format!("`{s}`: {e}")))
        };
        let objective = parse(objective)?;
        let constraints = constraints.iter().map(|s| parse(s)).collect::<Result<_, _>>()?;
        Self::new(d, p, objective, constraints)
    }

    pub fn m(&self) -> usize {
        self.space.m()
    }
    pub fn n(&self) -> usize {
        self.space.n()
    }
    pub fn q(&self) -> usize {
        self.constraints.len()
    }

    /// Rewrites a program-ring polynomial over the unknown ring
    /// `(u_0…u_{m-1}, μ̃_0…μ̃_{p-1})` with coefficients in ℚ(x).
    fn to_unknown_ring(&self, p: &Polynomial<Rational>, nunknowns: usize) -> Polynomial<RationalFunction> {
        let (m, n) = (self.m(), self.n());
        let mut parts: alloc::collections::BTreeMap<Monomial, Vec<(Monomial, Rational)>> = Default::default();
        for (mono, c) in p.terms() {
            let mut u = mono.slice(0..m).exponents().to_vec();
            u.resize(nunknowns, 0);
            parts
                .entry(Monomial::new(u).unwrap())
                .or_default()
                .push((mono.slice(m..m + n), c.clone()));
        }
        Polynomial::from_terms(
            nunknowns,
            parts.into_iter().map(|(u, xs)| {
                (u, RationalFunction::from_polynomial(Polynomial::from_terms(n, xs)))
            }),
        )
    }
}

/// Which constraints are active (treated as equalities) in one branch of the
/// complementarity disjunction. Bit `i` of `mask` is constraint `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActiveSet {
    pub mask: u64,
    pub q: usize,
}

impl ActiveSet {
    pub fn new(mask: u64, q: usize) -> Self {
        debug_assert!(q >= 64 || mask < (1u64 << q));
        ActiveSet { mask, q }
    }

    /// Number of active constraints `p`.
    pub fn p(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.mask >> i & 1 == 1
    }

    pub fn active_indices(&self) -> Vec<usize> {
        (0..self.q).filter(|&i| self.is_active(i)).collect()
    }
}

/// All `2^q` active sets in increasing mask order.
pub fn enumerate_active_sets(q: usize, cap: usize) -> Result<Vec<ActiveSet>, CompileError> {
    if q > cap || q >= 64 {
        return Err(CompileError::TooManyConstraints { q, cap });
    }
    Ok((0..1u64 << q).map(|mask| ActiveSet::new(mask, q)).collect())
}

/// A KKT sub-ideal: stationarity with only the active multipliers, plus the
/// active constraints as equations.
#[derive(Clone, Debug, PartialEq)]
pub struct KktIdeal {
    pub active_set: ActiveSet,
    pub generators: Vec<Polynomial<RationalFunction>>,
    /// `u_0…u_{m-1}` then the multipliers of the active constraints.
    pub unknown_names: Vec<String>,
}

impl KktIdeal {
    pub fn nunknowns(&self) -> usize {
        self.unknown_names.len()
    }
}

/// Builds `⟨∇_u J + Σ_active μ̃_i ∇_u g_i, g_active⟩`. Inactive multipliers are
/// identically zero and do not appear.
pub fn kkt_subideal(program: &ParametricProgram, active_set: ActiveSet) -> KktIdeal {
    let m = program.m();
    let active = active_set.active_indices();
    let k = m + active.len();
    let mut generators = Vec::with_capacity(k);
    for j in 0..m {
        let mut stat = program.to_unknown_ring(&program.objective.derivative(j), k);
        for (slot, &i) in active.iter().enumerate() {
            let dg = program.to_unknown_ring(&program.constraints[i].derivative(j), k);
            let mu = Polynomial::var(k, m + slot);
            stat = &stat + &(&dg * &mu);
        }
        generators.push(stat);
    }
    for &i in &active {
        generators.push(program.to_unknown_ring(&program.constraints[i], k));
    }
    let mut unknown_names: Vec<String> = program.space.decision_names().to_vec();
    unknown_names.extend(active.iter().map(|&i| program.space.multiplier_names()[i].clone()));
    KktIdeal { active_set, generators, unknown_names }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    Infeasible,
    ClosedForm,
    Companion,
}

impl Classification {
    pub fn name(&self) -> &'static str {
        match self {
            Classification::Infeasible => "infeasible",
            Classification::ClosedForm => "closed-form",
            Classification::Companion => "companion",
        }
    }
}

/// Multiplication matrix of one unknown, entries in ℚ(x).
#[derive(Clone, Debug, PartialEq)]
pub struct CompanionMatrix {
    pub for_variable: String,
    pub entries: Vec<Vec<RationalFunction>>,
}

/// Offline result for one active set.
#[derive(Clone, Debug, PartialEq)]
pub struct SubVarietyRecord {
    pub active_set: ActiveSet,
    pub classification: Classification,
    pub solution_count: usize,
    pub unknown_names: Vec<String>,
    /// Value of each unknown, in `unknown_names` order.
    pub closed_form: Option<Vec<RationalFunction>>,
    /// One matrix per unknown, in `unknown_names` order.
    pub matrices: Option<Vec<CompanionMatrix>>,
    pub standard_basis: Option<StandardBasis>,
    /// Parameter polynomials that must not vanish for the stored objects to
    /// specialize correctly.
    pub validity_certificates: Vec<RationalFunction>,
}

impl SubVarietyRecord {
    /// Exact pairwise commutation of the stored matrices.
    pub fn matrices_commute(&self) -> bool {
        let Some(ms) = &self.matrices else { return true };
        (0..ms.len()).all(|a| (a + 1..ms.len()).all(|b| commute(&ms[a].entries, &ms[b].entries)))
    }
}

/// Field-generic classification of a zero-dimensional system.
#[derive(Clone, Debug, PartialEq)]
pub enum Analysis<F> {
    Infeasible,
    ClosedForm(Vec<F>),
    Companion { basis: StandardBasis, matrices: Vec<Vec<Vec<F>>> },
}

/// Gröbner basis, then classification: `{1}` is infeasible, an affine basis
/// gives the unique point, anything else gets one multiplication matrix per
/// unknown. Also returns the leading coefficients divided by.
pub fn analyze<F: Field>(
    generators: &[Polynomial<F>],
    nunknowns: usize,
    order: &MonomialOrder,
    config: &GroebnerConfig,
) -> Result<(Analysis<F>, Vec<F>), AlgebraError> {
    let trace = buchberger_traced(generators, nunknowns, order, config)?;
    let gb = trace.basis;
    if gb.is_trivial() {
        return Ok((Analysis::Infeasible, trace.divisors));
    }
    if !gb.is_zero_dimensional() {
        return Err(AlgebraError::NotZeroDimensional);
    }
    if gb.is_linear() {
        // reduced, monic, zero-dimensional and affine: exactly v_i − c_i
        let mut values = vec![F::zero(); nunknowns];
        for g in gb.elements() {
            let v = g.leading_monomial(order)?.pure_power_of().expect("affine head");
            values[v] = g.constant_term().neg();
        }
        return Ok((Analysis::ClosedForm(values), trace.divisors));
    }
    let basis = gb.standard_monomials()?;
    let matrices = (0..nunknowns)
        .map(|v| multiplication_matrix(&gb, &basis, &Polynomial::var(nunknowns, v)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((Analysis::Companion { basis, matrices }, trace.divisors))
}

fn push_certificate(certs: &mut Vec<Polynomial<Rational>>, p: &Polynomial<Rational>) {
    if p.is_constant() {
        return;
    }
    let p = p.make_monic(&MonomialOrder::grevlex()).unwrap();
    if !certs.contains(&p) {
        certs.push(p);
    }
}

/// Builds the record for one sub-ideal; `Ok(None)` means infeasible.
pub fn classify_and_build(
    ideal: &KktIdeal,
    order: &MonomialOrder,
    config: &GroebnerConfig,
) -> Result<Option<SubVarietyRecord>, AlgebraError> {
    let k = ideal.nunknowns();
    let (analysis, divisors) = analyze(&ideal.generators, k, order, config)?;
    let mut certs = Vec::new();
    for d in &divisors {
        for p in d.critical_polynomials() {
            push_certificate(&mut certs, &p);
        }
    }
    let mut record = SubVarietyRecord {
        active_set: ideal.active_set,
        classification: Classification::Infeasible,
        solution_count: 0,
        unknown_names: ideal.unknown_names.clone(),
        closed_form: None,
        matrices: None,
        standard_basis: None,
        validity_certificates: Vec::new(),
    };
    match analysis {
        Analysis::Infeasible => return Ok(None),
        Analysis::ClosedForm(values) => {
            let values: Vec<RationalFunction> = values.iter().map(|v| v.normalize()).collect();
            for v in &values {
                push_certificate(&mut certs, v.denominator());
            }
            record.classification = Classification::ClosedForm;
            record.solution_count = 1;
            record.closed_form = Some(values);
        }
        Analysis::Companion { basis, matrices } => {
            let matrices: Vec<CompanionMatrix> = matrices
                .into_iter()
                .zip(&ideal.unknown_names)
                .map(|(entries, name)| CompanionMatrix {
                    for_variable: name.clone(),
                    entries: entries
                        .into_iter()
                        .map(|row| row.into_iter().map(|e| e.normalize()).collect())
                        .collect(),
                })
                .collect();
            for m in &matrices {
                for e in m.entries.iter().flatten() {
                    push_certificate(&mut certs, e.denominator());
                }
            }
            record.classification = Classification::Companion;
            record.solution_count = basis.dimension();
            record.standard_basis = Some(basis);
            record.matrices = Some(matrices);
        }
    }
    record.validity_certificates = certs.into_iter().map(RationalFunction::from_polynomial).collect();
    Ok(Some(record))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompileConfig {
    pub order: MonomialOrder,
    pub groebner: GroebnerConfig,
    /// Largest admissible constraint count `q`; `2^q` sub-ideals are built.
    pub max_constraints: usize,
}

impl Default for CompileConfig {
    fn default() -> Self {
        CompileConfig { order: MonomialOrder::grevlex(), groebner: GroebnerConfig::default(), max_constraints: 20 }
    }
}

/// Outcome of compiling one active set.
#[derive(Clone, Debug, PartialEq)]
pub enum MaskOutcome {
    Infeasible,
    Record(SubVarietyRecord),
    /// The sub-ideal could not be resolved (budget, positive dimension).
    Unresolved(String),
}

/// A mask the compiler could not resolve; the online solver reports these.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnresolvedMask {
    pub mask: u64,
    pub reason: String,
}

/// The offline artifact.
#[derive(Clone, Debug, PartialEq)]
pub struct CompiledProblem {
    pub format_version: u32,
    pub program: ParametricProgram,
    pub order: MonomialOrder,
    /// Non-infeasible records in increasing mask order.
    pub records: Vec<SubVarietyRecord>,
    pub infeasible_count: usize,
    pub unresolved: Vec<UnresolvedMask>,
    /// Present when the program came from a horizon expansion.
    pub control: Option<ControlProblem>,
}

impl CompiledProblem {
    pub fn enumerated(&self) -> usize {
        self.records.len() + self.infeasible_count + self.unresolved.len()
    }

    pub fn count(&self, c: Classification) -> usize {
        self.records.iter().filter(|r| r.classification == c).count()
    }
}

/// Compiles a single active set. Resource-cap and dimension failures are
/// reported as [`MaskOutcome::Unresolved`]; other algebra errors are fatal.
pub fn compile_mask(
    program: &ParametricProgram,
    active_set: ActiveSet,
    config: &CompileConfig,
) -> Result<MaskOutcome, CompileError> {
    let ideal = kkt_subideal(program, active_set);
    match classify_and_build(&ideal, &config.order, &config.groebner) {
        Ok(Some(rec)) => Ok(MaskOutcome::Record(rec)),
        Ok(None) => Ok(MaskOutcome::Infeasible),
        Err(e @ (AlgebraError::BudgetExceeded(_) | AlgebraError::NotZeroDimensional)) => {
            Ok(MaskOutcome::Unresolved(e.to_string()))
        }
        Err(source) => Err(CompileError::Mask { mask: active_set.mask, source }),
    }
}

/// Merges per-mask outcomes (given in increasing mask order).
pub fn assemble(
    program: ParametricProgram,
    outcomes: Vec<(ActiveSet, MaskOutcome)>,
    config: &CompileConfig,
) -> CompiledProblem {
    let mut records = Vec::new();
    let mut infeasible_count = 0;
    let mut unresolved = Vec::new();
    for (a, outcome) in outcomes {
        match outcome {
            MaskOutcome::Infeasible => infeasible_count += 1,
            MaskOutcome::Record(r) => records.push(r),
            MaskOutcome::Unresolved(reason) => {
                log::warn!("active set {:#b} unresolved: {}", a.mask, reason);
                unresolved.push(UnresolvedMask { mask: a.mask, reason });
            }
        }
    }
    CompiledProblem {
        format_version: FORMAT_VERSION,
        program,
        order: config.order.clone(),
        records,
        infeasible_count,
        unresolved,
        control: None,
    }
}

/// Sequential offline compilation over all `2^q` active sets.
pub fn compile(program: &ParametricProgram, config: &CompileConfig) -> Result<CompiledProblem, CompileError> {
    let sets = enumerate_active_sets(program.q(), config.max_constraints)?;
    let mut outcomes = Vec::with_capacity(sets.len());
    for a in sets {
        outcomes.push((a, compile_mask(program, a, config)?));
    }
    Ok(assemble(program.clone(), outcomes, config))
}
