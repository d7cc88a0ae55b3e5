//! Versioned JSON artifact holding every compiled record; rational functions
//! are stored as strings over the parameter names.

use polyopt_core::groebner::StandardBasis;
use polyopt_core::kkt::{
    ActiveSet, Classification, CompanionMatrix, CompiledProblem, ParametricProgram, SubVarietyRecord, UnresolvedMask,
    FORMAT_VERSION,
};
use polyopt_core::monomial::{Monomial, MonomialOrder};
use polyopt_core::parse::{format_polynomial, format_rational_function, parse_polynomial, parse_rational_function};
use polyopt_core::RationalFunction;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::Error;
use crate::problem::ControlSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Artifact {
    pub format_version: u32,
    pub problem_hash: String,
    pub order: String,
    pub decision_vars: Vec<String>,
    pub parameters: Vec<String>,
    pub multipliers: Vec<String>,
    pub objective: String,
    pub constraints: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<ControlSpec>,
    pub enumerated: usize,
    pub infeasible_count: usize,
    pub unresolved: Vec<UnresolvedEntry>,
    pub records: Vec<RecordEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnresolvedEntry {
    pub mask: u64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordEntry {
    pub mask: u64,
    pub active_constraints: Vec<usize>,
    pub classification: String,
    pub solution_count: usize,
    pub unknowns: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<Vec<String>>,
    /// Exponent vectors over the unknowns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub standard_basis: Option<Vec<Vec<u32>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrices: Option<Vec<MatrixEntry>>,
    pub validity_certificates: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixEntry {
    pub variable: String,
    pub entries: Vec<Vec<String>>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Artifact(msg.into())
}

fn classification_from(name: &str) -> Result<Classification, Error> {
    [Classification::Infeasible, Classification::ClosedForm, Classification::Companion]
        .into_iter()
        .find(|c| c.name() == name)
        .ok_or_else(|| bad(format!("unknown classification `{name}`")))
}

impl Artifact {
    pub fn from_compiled(c: &CompiledProblem, problem_hash: &str) -> Self {
        let space = &c.program.space;
        let params = space.parameter_names().to_vec();
        let ring = space.program_names();
        let rf = |r: &RationalFunction| format_rational_function(&r.lift(params.len()), &params);
        let records = c
            .records
            .iter()
            .map(|r| RecordEntry {
                mask: r.active_set.mask,
                active_constraints: r.active_set.active_indices(),
                classification: r.classification.name().into(),
                solution_count: r.solution_count,
                unknowns: r.unknown_names.clone(),
                closed_form: r.closed_form.as_ref().map(|v| v.iter().map(rf).collect()),
                standard_basis: r.standard_basis.as_ref().map(|b| b.monomials().iter().map(|m| m.exponents().to_vec()).collect()),
                matrices: r.matrices.as_ref().map(|ms| {
                    ms.iter()
                        .map(|m| MatrixEntry {
                            variable: m.for_variable.clone(),
                            entries: m.entries.iter().map(|row| row.iter().map(rf).collect()).collect(),
                        })
                        .collect()
                }),
                validity_certificates: r.validity_certificates.iter().map(rf).collect(),
            })
            .collect();
        Artifact {
            format_version: c.format_version,
            problem_hash: problem_hash.into(),
            order: c.order.name().into(),
            decision_vars: space.decision_names().to_vec(),
            parameters: params.clone(),
            multipliers: space.multiplier_names().to_vec(),
            objective: format_polynomial(&c.program.objective, &ring),
            constraints: c.program.constraints.iter().map(|g| format_polynomial(g, &ring)).collect(),
            control: c.control.as_ref().map(ControlSpec::from_control),
            enumerated: c.enumerated(),
            infeasible_count: c.infeasible_count,
            unresolved: c.unresolved.iter().map(|u| UnresolvedEntry { mask: u.mask, reason: u.reason.clone() }).collect(),
            records,
        }
    }

    pub fn to_compiled(&self) -> Result<CompiledProblem, Error> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Version { found: self.format_version, expected: FORMAT_VERSION });
        }
        let order = MonomialOrder::from_name(&self.order).ok_or_else(|| bad(format!("unknown order `{}`", self.order)))?;
        let ring: Vec<String> = self.decision_vars.iter().chain(&self.parameters).cloned().collect();
        let poly = |s: &str| parse_polynomial(s, &ring).map_err(|e| bad(format!("`{s}`: {e}")));
        let program = ParametricProgram::new(
            self.decision_vars.clone(),
            self.parameters.clone(),
            poly(&self.objective)?,
            self.constraints.iter().map(|s| poly(s)).collect::<Result<_, _>>()?,
        )?;
        if program.space.multiplier_names() != self.multipliers.as_slice() {
            return Err(bad("multiplier names do not match the program"));
        }
        let q = program.q();
        let rf = |s: &String| parse_rational_function(s, &self.parameters).map_err(|e| bad(format!("`{s}`: {e}")));
        let mut records = Vec::with_capacity(self.records.len());
        for r in &self.records {
            if q < 64 && r.mask >> q != 0 {
                return Err(bad(format!("mask {:#b} out of range", r.mask)));
            }
            let active_set = ActiveSet::new(r.mask, q);
            if active_set.active_indices() != r.active_constraints {
                return Err(bad(format!("mask {:#b} disagrees with its active constraint list", r.mask)));
            }
            let k = r.unknowns.len();
            let standard_basis = match &r.standard_basis {
                Some(b) => Some(StandardBasis::new(
                    b.iter()
                        .map(|e| {
                            if e.len() != k {
                                return Err(bad("standard monomial has the wrong arity"));
                            }
                            Monomial::new(e.clone()).map_err(Error::from)
                        })
                        .collect::<Result<_, _>>()?,
                )),
                None => None,
            };
            let matrices = match &r.matrices {
                Some(ms) => Some(
                    ms.iter()
                        .map(|m| {
                            let entries = m
                                .entries
                                .iter()
                                .map(|row| row.iter().map(rf).collect::<Result<Vec<_>, _>>())
                                .collect::<Result<Vec<_>, _>>()?;
                            if entries.len() != r.solution_count || entries.iter().any(|row| row.len() != r.solution_count) {
                                return Err(bad(format!("matrix for {} in mask {:#b} is not square of the stated size", m.variable, r.mask)));
                            }
                            Ok(CompanionMatrix { for_variable: m.variable.clone(), entries })
                        })
                        .collect::<Result<Vec<_>, Error>>()?,
                ),
                None => None,
            };
            let classification = classification_from(&r.classification)?;
            let closed_form = r.closed_form.as_ref().map(|v| v.iter().map(rf).collect::<Result<Vec<_>, _>>()).transpose()?;
            let shape_ok = match classification {
                Classification::ClosedForm => closed_form.as_ref().is_some_and(|v| v.len() == k),
                Classification::Companion => matrices.as_ref().is_some_and(|v| v.len() == k) && standard_basis.is_some(),
                Classification::Infeasible => false,
            };
            if !shape_ok {
                return Err(bad(format!("record for mask {:#b} is incomplete", r.mask)));
            }
            records.push(SubVarietyRecord {
                active_set,
                classification,
                solution_count: r.solution_count,
                unknown_names: r.unknowns.clone(),
                closed_form,
                matrices,
                standard_basis,
                validity_certificates: r.validity_certificates.iter().map(rf).collect::<Result<_, _>>()?,
            });
        }
        Ok(CompiledProblem {
            format_version: self.format_version,
            program,
            order,
            records,
            infeasible_count: self.infeasible_count,
            unresolved: self.unresolved.iter().map(|u| UnresolvedMask { mask: u.mask, reason: u.reason.clone() }).collect(),
            control: self.control.as_ref().map(ControlSpec::to_control).transpose()?,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("artifacts serialize") + "\n"
    }

    /// Parses an artifact, reporting a version mismatch before any schema
    /// error.
    pub fn from_json(text: &str) -> Result<Self, Error> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value.get("format_version").and_then(|v| v.as_u64()) {
            Some(v) if v == FORMAT_VERSION as u64 => {}
            Some(v) => return Err(Error::Version { found: v as u32, expected: FORMAT_VERSION }),
            None => return Err(bad("missing format_version")),
        }
        Ok(serde_json::from_value(value)?)
    }
}

pub fn write_artifact(path: &Path, artifact: &Artifact) -> Result<(), Error> {
    std::fs::write(path, artifact.to_json()).map_err(|e| Error::io(path, e))
}

pub fn read_artifact(path: &Path) -> Result<Artifact, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Artifact::from_json(&text)
}
