//! Parametric polynomial optimization by Gröbner bases and the eigenvalue
//! method.
//!
//! The offline half ([`kkt`]) splits the KKT system of a polynomial program
//! into one sub-ideal per active set, computes a reduced Gröbner basis of
//! each over the rational-function field in the parameters, and stores either
//! a closed-form solution map or a family of multiplication (companion)
//! matrices with parameter-dependent entries. The online half ([`solver`])
//! specializes those objects at a numeric parameter value, reads every KKT
//! candidate off shared eigenvectors, filters and returns the minimizer.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod error;
pub mod field;
pub mod gcd;
pub mod groebner;
pub mod kkt;
pub mod linalg;
pub mod monomial;
pub mod mpc;
pub mod parse;
pub mod poly;
pub mod quotient;
pub mod rational;
pub mod ratfunc;
pub mod solver;

pub use error::{AlgebraError, CompileError, SolveError};
pub use field::Field;
pub use groebner::{buchberger, GroebnerBasis, GroebnerConfig, StandardBasis};
pub use monomial::{Monomial, MonomialOrder, OrderKind};
pub use poly::{Polynomial, VariableSpace};
pub use rational::Rational;
pub use ratfunc::RationalFunction;
pub use kkt::{compile, compile_mask, ActiveSet, Classification, CompanionMatrix, CompileConfig, CompiledProblem, MaskOutcome, ParametricProgram, SubVarietyRecord};
pub use mpc::{duffing_dynamics, expand_horizon, simulate, ControlProblem, SimulationMode, Trajectory};
pub use solver::{CandidatePoint, CandidateStatus, Solution, Solver, SolverConfig, Tolerances};
