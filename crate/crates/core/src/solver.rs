//! Online phase: specialize every record at `x`, read candidates off joint
//! eigenvectors, filter, and take the discrete argmin of `J`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_complex::Complex64 as C64;

use crate::error::{AlgebraError, SolveError};
use crate::groebner::GroebnerConfig;
use crate::kkt::{analyze, kkt_subideal, Analysis, Classification, CompiledProblem, SubVarietyRecord};
use crate::linalg::{eigen_decompose, min_gap, random_combination, rayleigh_value, DenseMatrix, EigenConfig};
use crate::poly::Polynomial;
use crate::rational::Rational;
use crate::ratfunc::{RationalFunction, DENOMINATOR_TOLERANCE};

/// Acceptance thresholds of the candidate filters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// `|Im| ≤ imag·(1 + |Re|)` on every coordinate.
    pub imag: f64,
    /// KKT generator residual, relative to the generator's term magnitudes.
    pub residual: f64,
    /// Multipliers must satisfy `μ ≥ −multiplier`.
    pub multiplier: f64,
    /// Constraints must satisfy `g ≤ feasibility`.
    pub feasibility: f64,
    /// ∞-norm distance under which two points merge.
    pub duplicate: f64,
    /// Relative size under which a validity certificate counts as vanishing.
    pub denominator: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            imag: 1e-7,
            residual: 1e-6,
            multiplier: 1e-8,
            feasibility: 1e-8,
            duplicate: 1e-7,
            denominator: DENOMINATOR_TOLERANCE,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<(), SolveError> {
        let all = [
            ("imag", self.imag),
            ("residual", self.residual),
            ("multiplier", self.multiplier),
            ("feasibility", self.feasibility),
            ("duplicate", self.duplicate),
            ("denominator", self.denominator),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v >= 0.0) {
                return Err(SolveError::InvalidConfig(format!("{name} tolerance must be finite and non-negative, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub tolerances: Tolerances,
    pub seed: u64,
    pub eigen: EigenConfig,
    /// Extra draws of the random combination when eigenvalues cluster.
    pub cluster_retries: usize,
    /// Budget for the exact recomputation at a degenerate parameter.
    pub fallback_groebner: GroebnerConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tolerances: Tolerances::default(),
            seed: 42,
            eigen: EigenConfig::default(),
            cluster_retries: 3,
            fallback_groebner: GroebnerConfig::default(),
        }
    }
}

/// Millisecond time source for the phase timings.
pub trait Clock {
    fn now_ms(&self) -> f64;
}

/// Always reads zero; timings come out as zero.
#[derive(Clone, Copy, Debug, Default)]
pub struct NullClock;

impl Clock for NullClock {
    fn now_ms(&self) -> f64 {
        0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CandidateStatus {
    Accepted,
    RejectedComplex,
    RejectedMultiplierSign,
    RejectedInfeasible,
    RejectedResidual,
}

impl CandidateStatus {
    pub fn name(&self) -> &'static str {
        match self {
            CandidateStatus::Accepted => "accepted",
            CandidateStatus::RejectedComplex => "rejected-complex",
            CandidateStatus::RejectedMultiplierSign => "rejected-multiplier-sign",
            CandidateStatus::RejectedInfeasible => "rejected-infeasible",
            CandidateStatus::RejectedResidual => "rejected-residual",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CandidatePoint {
    /// Real parts of the decision coordinates; empty when the candidate was
    /// rejected before they were read.
    pub u: Vec<f64>,
    /// `(constraint index, value)` for each active constraint.
    pub multipliers: Vec<(usize, f64)>,
    /// `J(u, x)`, only for accepted candidates.
    pub objective: Option<f64>,
    pub source_mask: u64,
    pub status: CandidateStatus,
    /// Largest scaled KKT generator residual, once computed.
    pub residual: Option<f64>,
}

/// A candidate before filtering: complex coordinates straight from the
/// eigenvectors, or an early rejection.
#[derive(Clone, Debug, PartialEq)]
pub struct RawCandidate {
    pub record: usize,
    pub u: Vec<C64>,
    pub multipliers: Vec<C64>,
    pub rejected: Option<CandidateStatus>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Timings {
    pub specialize_ms: f64,
    pub eigen_ms: f64,
    pub filter_ms: f64,
    pub total_ms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub u_star: Vec<f64>,
    pub j_star: f64,
    pub source_mask: u64,
    pub candidates: Vec<CandidatePoint>,
    /// Accepted points folded into a nearby accepted point.
    pub merged_duplicates: usize,
    pub timings: Timings,
    pub warnings: Vec<String>,
}

/// Polynomial with f64 coefficients, evaluated at a float point.
#[derive(Clone, Debug)]
struct NumPoly {
    terms: Vec<(Vec<u32>, f64)>,
    max_abs: f64,
}

impl NumPoly {
    fn new(p: &Polynomial<Rational>) -> Self {
        let terms: Vec<_> = p.terms().map(|(m, c)| (m.exponents().to_vec(), c.to_f64())).collect();
        let max_abs = terms.iter().fold(0.0, |a: f64, t| a.max(libm::fabs(t.1)));
        NumPoly { terms, max_abs }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(e, c)| c * monomial_value(e, x)).sum()
    }

    fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].1 == 1.0 && self.terms[0].0.iter().all(|&e| e == 0)
    }
}

fn monomial_value(exps: &[u32], x: &[f64]) -> f64 {
    let mut v = 1.0;
    for (xi, &e) in x.iter().zip(exps) {
        v *= libm::pow(*xi, e as f64);
    }
    v
}

#[derive(Clone, Debug)]
struct NumRf {
    num: NumPoly,
    den: Option<NumPoly>,
}

impl NumRf {
    fn new(r: &RationalFunction) -> Self {
        let den = NumPoly::new(r.denominator());
        NumRf { num: NumPoly::new(r.numerator()), den: (!den.is_one()).then_some(den) }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let n = self.num.eval(x);
        match &self.den {
            Some(d) => n / d.eval(x),
            None => n,
        }
    }
}

/// A KKT generator with parameter-polynomial coefficients.
#[derive(Clone, Debug)]
struct NumGenerator {
    terms: Vec<(Vec<u32>, NumRf)>,
}

#[derive(Clone, Debug)]
struct Prepared {
    generators: Vec<Polynomial<RationalFunction>>,
    numeric_generators: Vec<NumGenerator>,
    certificates: Vec<NumPoly>,
    closed_form: Option<Vec<NumRf>>,
    matrices: Option<Vec<Vec<Vec<NumRf>>>>,
    active: Vec<usize>,
    m: usize,
}

/// Numeric form of one record at a parameter value.
#[derive(Clone, Debug, PartialEq)]
pub enum NumericRecord {
    Infeasible,
    ClosedForm(Vec<f64>),
    Companion(Vec<DenseMatrix>),
}

/// Online solver over a compiled artifact. Immutable once built; `solve`
/// takes `&self` and may be called from several threads.
#[derive(Clone, Debug)]
pub struct Solver {
    compiled: CompiledProblem,
    config: SolverConfig,
    prepared: Vec<Prepared>,
    objective: NumPoly,
    constraints: Vec<NumPoly>,
}

fn float_matrix(entries: &[Vec<NumRf>], x: &[f64]) -> Vec<Vec<f64>> {
    entries.iter().map(|row| row.iter().map(|e| e.eval(x)).collect()).collect()
}

fn rational_rows(entries: &[Vec<Rational>]) -> Vec<Vec<f64>> {
    entries.iter().map(|row| row.iter().map(Rational::to_f64).collect()).collect()
}

impl Solver {
    pub fn new(compiled: CompiledProblem, config: SolverConfig) -> Result<Self, SolveError> {
        config.tolerances.validate()?;
        let program = &compiled.program;
        let prepared = compiled
            .records
            .iter()
            .map(|rec| {
                let ideal = kkt_subideal(program, rec.active_set);
                let numeric_generators = ideal
                    .generators
                    .iter()
                    .map(|g| NumGenerator {
                        terms: g.terms().map(|(m, c)| (m.exponents().to_vec(), NumRf::new(c))).collect(),
                    })
                    .collect();
                Prepared {
                    numeric_generators,
                    generators: ideal.generators,
                    certificates: rec.validity_certificates.iter().map(|c| NumPoly::new(c.numerator())).collect(),
                    closed_form: rec.closed_form.as_ref().map(|v| v.iter().map(NumRf::new).collect()),
                    matrices: rec.matrices.as_ref().map(|ms| {
                        ms.iter().map(|m| m.entries.iter().map(|r| r.iter().map(NumRf::new).collect()).collect()).collect()
                    }),
                    active: rec.active_set.active_indices(),
                    m: program.m(),
                }
            })
            .collect();
        Ok(Solver {
            objective: NumPoly::new(&program.objective),
            constraints: program.constraints.iter().map(NumPoly::new).collect(),
            prepared,
            compiled,
            config,
        })
    }

    pub fn compiled(&self) -> &CompiledProblem {
        &self.compiled
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    fn check_parameter(&self, x: &[f64]) -> Result<(), SolveError> {
        let n = self.compiled.program.n();
        if x.len() != n {
            return Err(SolveError::ParameterDimension { expected: n, got: x.len() });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SolveError::NonFiniteParameter);
        }
        Ok(())
    }

    /// Index of the first certificate that vanishes at `x`.
    pub fn vanishing_certificate(&self, record: usize, x: &[f64]) -> Option<usize> {
        let tau = self.config.tolerances.denominator;
        self.prepared[record].certificates.iter().position(|c| libm::fabs(c.eval(x)) <= tau * (1.0 + c.max_abs))
    }

    /// Floating matrices or closed-form values of record `index` at `x`.
    /// Returns whether the exact fallback was needed.
    pub fn specialize_record(&self, index: usize, x: &[f64]) -> Result<(NumericRecord, bool), SolveError> {
        self.check_parameter(x)?;
        let rec = &self.compiled.records[index];
        let prep = &self.prepared[index];
        if self.vanishing_certificate(index, x).is_some() {
            return self.fallback(rec, prep, x).map(|r| (r, true));
        }
        let numeric = match rec.classification {
            Classification::Infeasible => NumericRecord::Infeasible,
            Classification::ClosedForm => {
                NumericRecord::ClosedForm(prep.closed_form.as_ref().unwrap().iter().map(|v| v.eval(x)).collect())
            }
            Classification::Companion => NumericRecord::Companion(
                prep.matrices
                    .as_ref()
                    .unwrap()
                    .iter()
                    .map(|m| {
                        DenseMatrix::from_real_rows(&float_matrix(m, x)).ok_or_else(|| SolveError::SpecializationFailure {
                            mask: rec.active_set.mask,
                            reason: "non-finite matrix entry".into(),
                        })
                    })
                    .collect::<Result<_, _>>()?,
            ),
        };
        Ok((numeric, false))
    }

    /// Snaps `x` to rationals and redoes the sub-ideal analysis over ℚ.
    fn fallback(&self, rec: &SubVarietyRecord, prep: &Prepared, x: &[f64]) -> Result<NumericRecord, SolveError> {
        let fail = |reason: String| SolveError::SpecializationFailure { mask: rec.active_set.mask, reason };
        let xr: Vec<Rational> = x
            .iter()
            .map(|&v| Rational::from_f64_snap(v, 1e-12).ok_or_else(|| fail(format!("cannot snap {v} to a rational"))))
            .collect::<Result<_, _>>()?;
        let k = rec.unknown_names.len();
        let mut gens = Vec::with_capacity(prep.generators.len());
        for g in &prep.generators {
            let mut terms = Vec::new();
            for (m, c) in g.terms() {
                let v = c.specialize_exact(&xr).map_err(|e: AlgebraError| fail(e.to_string()))?;
                terms.push((m.clone(), v));
            }
            gens.push(Polynomial::from_terms(k, terms));
        }
        log::debug!("exact recomputation for active set {:#b}", rec.active_set.mask);
        let (analysis, _) = analyze(&gens, k, &self.compiled.order, &self.config.fallback_groebner)
            .map_err(|e| fail(format!("recomputation at the snapped parameter failed: {e}")))?;
        Ok(match analysis {
            Analysis::Infeasible => NumericRecord::Infeasible,
            Analysis::ClosedForm(v) => NumericRecord::ClosedForm(v.iter().map(Rational::to_f64).collect()),
            Analysis::Companion { matrices, .. } => NumericRecord::Companion(
                matrices
                    .iter()
                    .map(|m| DenseMatrix::from_real_rows(&rational_rows(m)).ok_or_else(|| fail("non-finite entry".into())))
                    .collect::<Result<_, _>>()?,
            ),
        })
    }

    fn record_seed(&self, mask: u64, attempt: usize) -> u64 {
        self.config.seed ^ mask.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (attempt as u64).wrapping_mul(0xD1B5_4A32_D192_ED03)
    }

    /// Eigen-extraction for one companion record. Multipliers are read first;
    /// decision coordinates only for eigenvectors that pass the sign test.
    fn companion_candidates(&self, record: usize, mats: &[DenseMatrix]) -> Result<Vec<RawCandidate>, SolveError> {
        let tol = &self.config.tolerances;
        let m = self.prepared[record].m;
        let mask = self.compiled.records[record].active_set.mask;
        let refs: Vec<&DenseMatrix> = mats.iter().collect();
        let mut best = None;
        for attempt in 0..=self.config.cluster_retries {
            let (mr, _) = random_combination(&refs, self.record_seed(mask, attempt));
            let pairs = eigen_decompose(&mr, &self.config.eigen)?;
            let norm = mr.frobenius_norm();
            let gap = min_gap(&pairs.iter().map(|p| p.value).collect::<Vec<_>>());
            let done = gap > 1e-8 * norm.max(1.0);
            best = Some((mr, pairs));
            if done {
                break;
            }
        }
        let (mr, pairs) = best.unwrap();
        let scale = 1.0 + mr.frobenius_norm();
        let mut out = Vec::with_capacity(pairs.len());
        for p in pairs {
            let mut cand = RawCandidate { record, u: Vec::new(), multipliers: Vec::new(), rejected: None };
            if p.residual > tol.residual * scale {
                cand.rejected = Some(CandidateStatus::RejectedResidual);
                out.push(cand);
                continue;
            }
            for mu in &mats[m..] {
                let (rho, _) = rayleigh_value(mu, &p.vector);
                cand.multipliers.push(rho);
            }
            if let Some(status) = multiplier_rejection(&cand.multipliers, tol) {
                cand.rejected = Some(status);
                out.push(cand);
                continue;
            }
            cand.u = mats[..m].iter().map(|mu| rayleigh_value(mu, &p.vector).0).collect();
            out.push(cand);
        }
        Ok(out)
    }

    fn closed_form_candidate(&self, record: usize, values: &[f64]) -> RawCandidate {
        let m = self.prepared[record].m;
        let multipliers: Vec<C64> = values[m..].iter().map(|&v| C64::new(v, 0.0)).collect();
        let rejected = multiplier_rejection(&multipliers, &self.config.tolerances);
        let u = if rejected.is_some() { Vec::new() } else { values[..m].iter().map(|&v| C64::new(v, 0.0)).collect() };
        RawCandidate { record, u, multipliers, rejected }
    }

    /// All raw candidates at `x`, in record order.
    pub fn candidates(&self, x: &[f64], warnings: &mut Vec<String>, clock: &dyn Clock, timings: &mut Timings) -> Result<Vec<RawCandidate>, SolveError> {
        let mut out = Vec::new();
        for index in 0..self.compiled.records.len() {
            let t0 = clock.now_ms();
            let (numeric, fell_back) = self.specialize_record(index, x)?;
            let t1 = clock.now_ms();
            timings.specialize_ms += t1 - t0;
            if fell_back {
                warnings.push(format!(
                    "active set {:#b}: validity certificate vanishes, recomputed exactly",
                    self.compiled.records[index].active_set.mask
                ));
            }
            match numeric {
                NumericRecord::Infeasible => {}
                NumericRecord::ClosedForm(v) => out.push(self.closed_form_candidate(index, &v)),
                NumericRecord::Companion(mats) => {
                    match self.companion_candidates(index, &mats) {
                        Ok(c) => out.extend(c),
                        Err(e) => warnings.push(format!(
                            "active set {:#b} skipped: {e}",
                            self.compiled.records[index].active_set.mask
                        )),
                    }
                    timings.eigen_ms += clock.now_ms() - t1;
                }
            }
        }
        Ok(out)
    }

    /// Largest scaled KKT generator residual of a real point.
    fn kkt_residual(&self, record: usize, point: &[f64], x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for g in &self.prepared[record].numeric_generators {
            let (mut value, mut scale) = (0.0, 1.0);
            for (e, c) in &g.terms {
                let t = c.eval(x) * monomial_value(e, point);
                value += t;
                scale += libm::fabs(t);
            }
            worst = worst.max(libm::fabs(value) / scale);
        }
        worst
    }

    pub fn objective_at(&self, u: &[f64], x: &[f64]) -> f64 {
        let point: Vec<f64> = u.iter().chain(x).copied().collect();
        self.objective.eval(&point)
    }

    /// Constraint values `g_i(u, x)`.
    pub fn constraints_at(&self, u: &[f64], x: &[f64]) -> Vec<f64> {
        let point: Vec<f64> = u.iter().chain(x).copied().collect();
        self.constraints.iter().map(|g| g.eval(&point)).collect()
    }

    /// Imaginary-part, residual, sign and feasibility filters, then
    /// deduplication and the argmin.
    pub fn filter_and_rank(&self, raw: Vec<RawCandidate>, x: &[f64]) -> Result<(Vec<CandidatePoint>, usize), SolveError> {
        let tol = &self.config.tolerances;
        let mut points = Vec::with_capacity(raw.len());
        for c in raw {
            let prep = &self.prepared[c.record];
            let mut point = CandidatePoint {
                u: c.u.iter().map(|z| z.re).collect(),
                multipliers: prep.active.iter().copied().zip(c.multipliers.iter().map(|z| z.re)).collect(),
                objective: None,
                source_mask: self.compiled.records[c.record].active_set.mask,
                status: CandidateStatus::Accepted,
                residual: None,
            };
            if let Some(s) = c.rejected {
                point.status = s;
                points.push(point);
                continue;
            }
            if c.u.iter().chain(&c.multipliers).any(|z| libm::fabs(z.im) > tol.imag * (1.0 + libm::fabs(z.re))) {
                point.status = CandidateStatus::RejectedComplex;
                points.push(point);
                continue;
            }
            let real: Vec<f64> = c.u.iter().chain(&c.multipliers).map(|z| z.re).collect();
            let residual = self.kkt_residual(c.record, &real, x);
            point.residual = Some(residual);
            point.status = if !(residual <= tol.residual) {
                CandidateStatus::RejectedResidual
            } else if point.multipliers.iter().any(|&(_, mu)| mu < -tol.multiplier) {
                CandidateStatus::RejectedMultiplierSign
            } else if self.constraints_at(&point.u, x).iter().any(|&g| !(g <= tol.feasibility)) {
                CandidateStatus::RejectedInfeasible
            } else {
                point.objective = Some(self.objective_at(&point.u, x));
                CandidateStatus::Accepted
            };
            points.push(point);
        }
        // merge accepted points closer than the duplicate tolerance
        let mut order: Vec<usize> = (0..points.len()).filter(|&i| points[i].status == CandidateStatus::Accepted).collect();
        order.sort_by(|&a, &b| {
            let (pa, pb) = (&points[a], &points[b]);
            pa.residual.unwrap().total_cmp(&pb.residual.unwrap()).then(pa.source_mask.cmp(&pb.source_mask)).then(a.cmp(&b))
        });
        let mut kept: Vec<usize> = Vec::new();
        let mut drop = Vec::new();
        for i in order {
            let close = kept.iter().any(|&k| {
                points[k].u.iter().zip(&points[i].u).all(|(a, b)| libm::fabs(a - b) <= tol.duplicate)
            });
            if close {
                drop.push(i);
            } else {
                kept.push(i);
            }
        }
        let merged = drop.len();
        let points = points.into_iter().enumerate().filter(|(i, _)| !drop.contains(i)).map(|(_, p)| p).collect();
        Ok((points, merged))
    }

    pub fn solve(&self, x: &[f64]) -> Result<Solution, SolveError> {
        self.solve_with_clock(x, &NullClock)
    }

    pub fn solve_with_clock(&self, x: &[f64], clock: &dyn Clock) -> Result<Solution, SolveError> {
        self.check_parameter(x)?;
        let start = clock.now_ms();
        let mut timings = Timings::default();
        let mut warnings: Vec<String> = self
            .compiled
            .unresolved
            .iter()
            .map(|u| format!("active set {:#b} was not resolved offline: {}", u.mask, u.reason))
            .collect();
        let raw = self.candidates(x, &mut warnings, clock, &mut timings)?;
        let t = clock.now_ms();
        let (candidates, merged_duplicates) = self.filter_and_rank(raw, x)?;
        let best = candidates
            .iter()
            .filter(|c| c.status == CandidateStatus::Accepted)
            .min_by(|a, b| compare_candidates(a, b))
            .ok_or(SolveError::NoFeasibleCandidate)?;
        let (u_star, j_star, source_mask) = (best.u.clone(), best.objective.unwrap(), best.source_mask);
        let end = clock.now_ms();
        timings.filter_ms = end - t;
        timings.total_ms = end - start;
        Ok(Solution { u_star, j_star, source_mask, candidates, merged_duplicates, timings, warnings })
    }
}

fn multiplier_rejection(mus: &[C64], tol: &Tolerances) -> Option<CandidateStatus> {
    if mus.iter().any(|z| libm::fabs(z.im) > tol.imag * (1.0 + libm::fabs(z.re))) {
        Some(CandidateStatus::RejectedComplex)
    } else if mus.iter().any(|z| z.re < -tol.multiplier) {
        Some(CandidateStatus::RejectedMultiplierSign)
    } else {
        None
    }
}

/// Objective, then smaller mask, then lexicographic `u`.
fn compare_candidates(a: &CandidatePoint, b: &CandidatePoint) -> Ordering {
    a.objective
        .unwrap()
        .total_cmp(&b.objective.unwrap())
        .then(a.source_mask.cmp(&b.source_mask))
        .then_with(|| {
            a.u.iter().zip(&b.u).map(|(p, q)| p.total_cmp(q)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
        })
}
