//! Run configuration: defaults, then `POLYOPT_*` environment variables, then
//! command-line flags.

use polyopt_core::groebner::GroebnerConfig;
use polyopt_core::kkt::CompileConfig;
use polyopt_core::monomial::MonomialOrder;
use polyopt_core::solver::{SolverConfig, Tolerances};

use crate::error::Error;

pub const ENV_PREFIX: &str = "POLYOPT_";

/// Default random-combination seed.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub tolerances: Tolerances,
    pub seed: u64,
    /// Compile threads; `0` uses every core.
    pub jobs: usize,
    /// Reduction-step budget per Gröbner basis.
    pub budget: usize,
    pub max_constraints: usize,
    pub json: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tolerances: Tolerances::default(),
            seed: DEFAULT_SEED,
            jobs: 0,
            budget: GroebnerConfig::default().max_steps,
            max_constraints: CompileConfig::default().max_constraints,
            json: false,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, Error> {
    value.trim().parse().map_err(|_| Error::Config(format!("{ENV_PREFIX}{key}: cannot parse `{value}`")))
}

impl RunConfig {
    /// Overrides from `POLYOPT_TOL_IMAG`, `_TOL_RES`, `_TOL_MU`, `_TOL_FEAS`,
    /// `_TOL_DUP`, `_TOL_DEN`, `_SEED`, `_JOBS`, `_BUDGET`, `_MAX_CONSTRAINTS`.
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<(), Error> {
        let get = |key: &str| lookup(&format!("{ENV_PREFIX}{key}"));
        let t = &mut self.tolerances;
        for (key, slot) in [
            ("TOL_IMAG", &mut t.imag),
            ("TOL_RES", &mut t.residual),
            ("TOL_MU", &mut t.multiplier),
            ("TOL_FEAS", &mut t.feasibility),
            ("TOL_DUP", &mut t.duplicate),
            ("TOL_DEN", &mut t.denominator),
        ] {
            if let Some(v) = get(key) {
                *slot = parse(key, &v)?;
            }
        }
        if let Some(v) = get("SEED") {
            self.seed = parse("SEED", &v)?;
        }
        if let Some(v) = get("JOBS") {
            self.jobs = parse("JOBS", &v)?;
        }
        if let Some(v) = get("BUDGET") {
            self.budget = parse("BUDGET", &v)?;
        }
        if let Some(v) = get("MAX_CONSTRAINTS") {
            self.max_constraints = parse("MAX_CONSTRAINTS", &v)?;
        }
        Ok(())
    }

    pub fn from_env() -> Result<Self, Error> {
        let mut c = Self::default();
        c.apply_env(|k| std::env::var(k).ok())?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), Error> {
        let t = &self.tolerances;
        for (name, v) in [
            ("imag", t.imag),
            ("residual", t.residual),
            ("multiplier", t.multiplier),
            ("feasibility", t.feasibility),
            ("duplicate", t.duplicate),
            ("denominator", t.denominator),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} tolerance must be positive and finite, got {v}")));
            }
        }
        if self.budget == 0 {
            return Err(Error::Config("budget must be positive".into()));
        }
        Ok(())
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig { tolerances: self.tolerances, seed: self.seed, ..SolverConfig::default() }
    }

    pub fn compile_config(&self, order: MonomialOrder) -> CompileConfig {
        CompileConfig { order, groebner: GroebnerConfig { max_steps: self.budget }, max_constraints: self.max_constraints }
    }
}
