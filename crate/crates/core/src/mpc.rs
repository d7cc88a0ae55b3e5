//! Polynomial discrete-time optimal control as a parametric program, plus a
//! receding-horizon simulator.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{CompileError, SolveError};
use crate::field::Field;
use crate::kkt::ParametricProgram;
use crate::poly::Polynomial;
use crate::rational::Rational;
use crate::solver::{Clock, Solver};

type Poly = Polynomial<Rational>;

/// `x(k+1) = f(x(k), u(k))` with cost
/// `Σ_{j<N} L(x(k+j), u(k+j)) + L_N(x(k+N))`.
///
/// `dynamics`, `stage_cost` and `stage_constraints` live in the ring
/// `(x_1…x_nx, u_1…u_nu)`; `terminal_cost` and `state_constraints` in
/// `(x_1…x_nx)`. Stage constraints apply at `j = 0…N−1`, state constraints
/// at the predicted states `j = 1…N`. Constraints are in `g ≤ 0` form.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlProblem {
    pub state_names: Vec<String>,
    pub input_names: Vec<String>,
    pub dynamics: Vec<Poly>,
    pub stage_cost: Poly,
    pub terminal_cost: Poly,
    pub stage_constraints: Vec<Poly>,
    pub state_constraints: Vec<Poly>,
    pub horizon: usize,
}

impl ControlProblem {
    pub fn nx(&self) -> usize {
        self.state_names.len()
    }

    pub fn nu(&self) -> usize {
        self.input_names.len()
    }

    pub fn validate(&self) -> Result<(), CompileError> {
        let (nx, nu) = (self.nx(), self.nu());
        let bad = |s: &str| Err(CompileError::InvalidProgram(s.to_string()));
        if self.horizon == 0 {
            return bad("horizon must be at least 1");
        }
        if nu == 0 {
            return bad("control problem has no inputs");
        }
        if self.dynamics.len() != nx {
            return bad("one dynamics polynomial per state is required");
        }
        if self.dynamics.iter().chain([&self.stage_cost]).chain(&self.stage_constraints).any(|p| p.nvars() != nx + nu) {
            return bad("dynamics, stage cost and stage constraints must be polynomials in states and inputs");
        }
        if [&self.terminal_cost].into_iter().chain(&self.state_constraints).any(|p| p.nvars() != nx) {
            return bad("terminal cost and state constraints must be polynomials in the states");
        }
        Ok(())
    }

    /// Names of the flattened input sequence: `u0…u{N−1}` for a single input
    /// `u`, `u0_0, u0_1, …` (step, component) for several.
    pub fn decision_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        for j in 0..self.horizon {
            for name in &self.input_names {
                if self.nu() == 1 {
                    out.push(format!("{name}{j}"));
                } else {
                    out.push(format!("{name}{j}_{}", out.len() % self.nu()));
                }
            }
        }
        out
    }

    /// Applies the true dynamics once.
    pub fn step(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        let point: Vec<f64> = x.iter().chain(u).copied().collect();
        self.dynamics.iter().map(|f| f.eval_f64(&point)).collect()
    }

    /// Values of all state constraints at a state (positive means violated).
    pub fn state_constraint_values(&self, x: &[f64]) -> Vec<f64> {
        self.state_constraints.iter().map(|g| g.eval_f64(x)).collect()
    }
}

/// Expansion of a control problem. `dropped` lists constraints that involve
/// no decision variable, as `(step j, description)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Expansion {
    pub program: ParametricProgram,
    pub dropped: Vec<String>,
}

/// Substitutes the dynamics forward so every predicted state is a polynomial
/// in the input sequence and the initial state `x₀` (the parameters).
pub fn expand_horizon(cp: &ControlProblem) -> Result<Expansion, CompileError> {
    cp.validate()?;
    let (nx, nu, horizon) = (cp.nx(), cp.nu(), cp.horizon);
    let m = horizon * nu;
    let width = m + nx;
    let inputs = |j: usize| -> Vec<Poly> { (0..nu).map(|i| Poly::var(width, j * nu + i)).collect() };
    let overflow = |e| CompileError::InvalidProgram(format!("horizon expansion: {e}"));

    let mut states: Vec<Vec<Poly>> = Vec::with_capacity(horizon + 1);
    states.push((0..nx).map(|i| Poly::var(width, m + i)).collect());
    let mut objective = Poly::zero(width);
    let mut constraints = Vec::new();
    let mut dropped = Vec::new();
    let mut keep = |g: Poly, what: String, constraints: &mut Vec<Poly>| {
        if (0..m).any(|v| g.degree_in(v) > 0) {
            constraints.push(g);
        } else {
            log::info!("dropping {what}: it involves no input");
            dropped.push(what);
        }
    };
    for j in 0..horizon {
        let stage: Vec<Poly> = states[j].iter().cloned().chain(inputs(j)).collect();
        objective = objective.checked_add(&cp.stage_cost.compose(&stage).map_err(overflow)?).map_err(overflow)?;
        for (i, g) in cp.stage_constraints.iter().enumerate() {
            keep(g.compose(&stage).map_err(overflow)?, format!("stage constraint {i} at step {j}"), &mut constraints);
        }
        let next = cp.dynamics.iter().map(|f| f.compose(&stage)).collect::<Result<Vec<_>, _>>().map_err(overflow)?;
        for (i, g) in cp.state_constraints.iter().enumerate() {
            keep(g.compose(&next).map_err(overflow)?, format!("state constraint {i} at step {}", j + 1), &mut constraints);
        }
        states.push(next);
    }
    objective = objective
        .checked_add(&cp.terminal_cost.compose(&states[horizon]).map_err(overflow)?)
        .map_err(overflow)?;
    let program = ParametricProgram::new(cp.decision_names(), cp.state_names.clone(), objective, constraints)?;
    Ok(Expansion { program, dropped })
}

/// Constants of the Duffing-oscillator example.
#[derive(Clone, Debug, PartialEq)]
pub struct DuffingPreset {
    pub zeta: Rational,
    pub h: Rational,
    pub horizon: usize,
    /// Diagonal of the state weight.
    pub q: [Rational; 2],
    pub r: Rational,
    pub bound: Rational,
}

impl Default for DuffingPreset {
    fn default() -> Self {
        DuffingPreset {
            zeta: Rational::new(3, 10),
            h: Rational::new(1, 20),
            horizon: 3,
            q: [Rational::one(), Rational::one()],
            r: Rational::new(1, 10),
            bound: Rational::from_integer(5),
        }
    }
}

impl DuffingPreset {
    /// Forward-difference Duffing oscillator
    /// `x₁⁺ = x₁ + h x₂`, `x₂⁺ = −h x₁ + (1 − 2ζh) x₂ + h u − h x₁³`.
    ///
    /// The cost weights the predicted states `x(k+1)…x(k+N)` and the inputs
    /// `u(k)…u(k+N−1)`; the state penalty is folded into the stage cost
    /// through the dynamics, `L(x, u) = |f(x, u)|²_Q + R u²`, with no terminal
    /// term. Every predicted state satisfies `|x_i| ≤ bound`.
    pub fn control_problem(&self) -> ControlProblem {
        let v = |i| Poly::var(3, i);
        let c = |r: &Rational| Poly::constant(3, r.clone());
        let (x1, x2, u) = (v(0), v(1), v(2));
        let h = c(&self.h);
        let one = Poly::one(3);
        let damping = &one - &(&c(&Rational::from_integer(2)) * &(&c(&self.zeta) * &h));
        let x1_next = &x1 + &(&h * &x2);
        let cube = &(&x1 * &x1) * &x1;
        let x2_next = &(&(&(&damping * &x2) - &(&h * &x1)) + &(&h * &u)) - &(&h * &cube);
        let stage_cost = &(&(&c(&self.q[0]) * &(&x1_next * &x1_next)) + &(&c(&self.q[1]) * &(&x2_next * &x2_next)))
            + &(&c(&self.r) * &(&u * &u));
        let b = Poly::constant(2, self.bound.clone());
        let mut state_constraints = Vec::new();
        for i in 0..2 {
            let xi = Poly::var(2, i);
            state_constraints.push(&xi - &b);
            state_constraints.push(&(-&xi) - &b);
        }
        ControlProblem {
            state_names: ["x1", "x2"].map(String::from).to_vec(),
            input_names: ["u"].map(String::from).to_vec(),
            dynamics: [x1_next, x2_next].to_vec(),
            stage_cost,
            terminal_cost: Poly::zero(2),
            stage_constraints: Vec::new(),
            state_constraints,
            horizon: self.horizon,
        }
    }
}

/// The Duffing example with its published constants.
pub fn duffing_dynamics() -> ControlProblem {
    DuffingPreset::default().control_problem()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimulationMode {
    ClosedLoop,
    /// Inputs held at zero; no solves.
    FreeResponse,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryStep {
    pub step: usize,
    pub x: Vec<f64>,
    /// Input applied at this step; `None` on the final state.
    pub u: Option<Vec<f64>>,
    pub j_star: Option<f64>,
    pub solve_ms: Option<f64>,
}

/// A state constraint found violated on the realized trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub step: usize,
    pub constraint: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub steps: Vec<TrajectoryStep>,
    pub violations: Vec<Violation>,
    /// Set when a solve failed; the trajectory is partial.
    pub aborted: Option<SolveError>,
}

impl Trajectory {
    pub fn states(&self) -> impl Iterator<Item = &[f64]> {
        self.steps.iter().map(|s| s.x.as_slice())
    }

    pub fn max_abs_state(&self) -> f64 {
        self.states().flatten().fold(0.0, |a: f64, &b| a.max(libm::fabs(b)))
    }
}

/// Violation slack for the realized-trajectory check.
pub const VIOLATION_TOLERANCE: f64 = 1e-6;

/// Receding-horizon loop: solve at the measured state, apply the first input,
/// propagate the true dynamics. Runs `steps` transitions.
pub fn simulate(
    cp: &ControlProblem,
    solver: Option<&Solver>,
    x0: &[f64],
    steps: usize,
    mode: SimulationMode,
    clock: &dyn Clock,
) -> Trajectory {
    let nu = cp.nu();
    let mut traj = Trajectory { steps: Vec::new(), violations: Vec::new(), aborted: None };
    let mut x = x0.to_vec();
    let check = |k: usize, x: &[f64], traj: &mut Trajectory| {
        for (i, g) in cp.state_constraint_values(x).into_iter().enumerate() {
            if g > VIOLATION_TOLERANCE || !g.is_finite() {
                traj.violations.push(Violation { step: k, constraint: i, value: g });
            }
        }
    };
    for k in 0..steps {
        check(k, &x, &mut traj);
        let (u, j_star, solve_ms) = match (mode, solver) {
            (SimulationMode::FreeResponse, _) | (_, None) => (alloc::vec![0.0; nu], None, None),
            (SimulationMode::ClosedLoop, Some(s)) => {
                let t0 = clock.now_ms();
                match s.solve_with_clock(&x, clock) {
                    Ok(sol) => {
                        let ms = clock.now_ms() - t0;
                        (sol.u_star[..nu].to_vec(), Some(sol.j_star), Some(ms))
                    }
                    Err(e) => {
                        log::warn!("solve failed at step {k}: {e}");
                        traj.aborted = Some(e);
                        traj.steps.push(TrajectoryStep { step: k, x, u: None, j_star: None, solve_ms: None });
                        return traj;
                    }
                }
            }
        };
        let next = cp.step(&x, &u);
        traj.steps.push(TrajectoryStep { step: k, x, u: Some(u), j_star, solve_ms });
        x = next;
    }
    check(steps, &x, &mut traj);
    traj.steps.push(TrajectoryStep { step: steps, x, u: None, j_star: None, solve_ms: None });
    traj
}
