//! The problem file: an explicit parametric program or a control problem to
//! be expanded over its horizon.

use polyopt_core::kkt::ParametricProgram;
use polyopt_core::monomial::MonomialOrder;
use polyopt_core::mpc::{expand_horizon, ControlProblem};
use polyopt_core::parse::{format_polynomial, parse_polynomial};
use polyopt_core::{Polynomial, Rational};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

use crate::error::Error;

fn default_order() -> String {
    "grevlex".into()
}

/// JSON problem description. Polynomials are strings over the declared
/// names; constraints are in `g ≤ 0` form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub decision_vars: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parameters: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constraints: Vec<String>,
    #[serde(default = "default_order")]
    pub order: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<ControlSpec>,
}

/// Textual form of a [`ControlProblem`]. `dynamics`, `stage_cost` and
/// `stage_constraints` use the state and input names; `terminal_cost` and
/// `state_constraints` only the state names.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSpec {
    pub states: Vec<String>,
    pub inputs: Vec<String>,
    pub dynamics: Vec<String>,
    pub stage_cost: String,
    #[serde(default = "zero")]
    pub terminal_cost: String,
    #[serde(default)]
    pub stage_constraints: Vec<String>,
    #[serde(default)]
    pub state_constraints: Vec<String>,
    pub horizon: usize,
}

fn zero() -> String {
    "0".into()
}

/// A parsed problem ready to compile.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub program: ParametricProgram,
    pub control: Option<ControlProblem>,
    pub order: MonomialOrder,
    /// SHA-256 of the canonical problem JSON.
    pub hash: String,
}

fn parse_all(items: &[String], names: &[String], what: &str) -> Result<Vec<Polynomial<Rational>>, Error> {
    items
        .iter()
        .map(|s| parse_polynomial(s, names).map_err(|e| Error::Problem(format!("{what} `{s}`: {e}"))))
        .collect()
}

impl ControlSpec {
    pub fn from_control(cp: &ControlProblem) -> Self {
        let xu: Vec<String> = cp.state_names.iter().chain(&cp.input_names).cloned().collect();
        let x = &cp.state_names;
        ControlSpec {
            states: cp.state_names.clone(),
            inputs: cp.input_names.clone(),
            dynamics: cp.dynamics.iter().map(|p| format_polynomial(p, &xu)).collect(),
            stage_cost: format_polynomial(&cp.stage_cost, &xu),
            terminal_cost: format_polynomial(&cp.terminal_cost, x),
            stage_constraints: cp.stage_constraints.iter().map(|p| format_polynomial(p, &xu)).collect(),
            state_constraints: cp.state_constraints.iter().map(|p| format_polynomial(p, x)).collect(),
            horizon: cp.horizon,
        }
    }

    pub fn to_control(&self) -> Result<ControlProblem, Error> {
        let xu: Vec<String> = self.states.iter().chain(&self.inputs).cloned().collect();
        let one = |s: &str, names: &[String], what: &str| {
            parse_polynomial(s, names).map_err(|e| Error::Problem(format!("{what} `{s}`: {e}")))
        };
        let cp = ControlProblem {
            state_names: self.states.clone(),
            input_names: self.inputs.clone(),
            dynamics: parse_all(&self.dynamics, &xu, "dynamics")?,
            stage_cost: one(&self.stage_cost, &xu, "stage cost")?,
            terminal_cost: one(&self.terminal_cost, &self.states, "terminal cost")?,
            stage_constraints: parse_all(&self.stage_constraints, &xu, "stage constraint")?,
            state_constraints: parse_all(&self.state_constraints, &self.states, "state constraint")?,
            horizon: self.horizon,
        };
        cp.validate()?;
        Ok(cp)
    }
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self, Error> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files serialize") + "\n"
    }

    /// Hash of the canonical serialization, independent of whitespace and
    /// key order in the source file.
    pub fn hash(&self) -> String {
        format!("{:x}", Sha256::digest(serde_json::to_vec(self).expect("problem files serialize")))
    }

    pub fn from_control(cp: &ControlProblem) -> Self {
        ProblemFile {
            decision_vars: Vec::new(),
            parameters: Vec::new(),
            objective: None,
            constraints: Vec::new(),
            order: default_order(),
            control: Some(ControlSpec::from_control(cp)),
        }
    }

    pub fn load(&self) -> Result<Problem, Error> {
        let order = MonomialOrder::from_name(&self.order)
            .ok_or_else(|| Error::Problem(format!("unknown monomial order `{}`", self.order)))?;
        let (program, control) = match &self.control {
            Some(spec) => {
                if !self.decision_vars.is_empty() || !self.parameters.is_empty() || self.objective.is_some() || !self.constraints.is_empty() {
                    return Err(Error::Problem("give either an explicit program or a control section, not both".into()));
                }
                let cp = spec.to_control()?;
                let e = expand_horizon(&cp)?;
                for d in &e.dropped {
                    log::info!("{d} involves no input and is not enforced");
                }
                (e.program, Some(cp))
            }
            None => {
                let objective = self.objective.as_ref().ok_or_else(|| Error::Problem("missing objective".into()))?;
                let names: Vec<String> = self.decision_vars.iter().chain(&self.parameters).cloned().collect();
                let objective = parse_all(std::slice::from_ref(objective), &names, "objective")?.remove(0);
                let constraints = parse_all(&self.constraints, &names, "constraint")?;
                (ParametricProgram::new(self.decision_vars.clone(), self.parameters.clone(), objective, constraints)?, None)
            }
        };
        Ok(Problem { program, control, order, hash: self.hash() })
    }
}
