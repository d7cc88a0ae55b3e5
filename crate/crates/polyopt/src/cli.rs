//! `polyopt compile | solve | simulate | inspect | preset`.
//!
//! Exit codes: 0 success, 1 usage error, 2 computation failure.

use clap::{Parser, Subcommand};
use polyopt_core::mpc::{duffing_dynamics, simulate, SimulationMode};
use polyopt_core::solver::{CandidatePoint, Solution, Solver};
use serde::Serialize;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::artifact::{read_artifact, write_artifact, Artifact};
use crate::config::RunConfig;
use crate::error::Error;
use crate::inspect::report;
use crate::parallel::compile_parallel;
use crate::problem::ProblemFile;
use crate::trajectory::write_csv;
use crate::StdClock;

#[derive(Parser, Debug)]
#[command(name = "polyopt", version, about = "Parametric polynomial optimization by Gröbner bases and eigenvalues")]
pub struct Cli {
    /// More log output (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(clap::Args, Debug, Default)]
pub struct TolArgs {
    #[arg(long)]
    pub tol_imag: Option<f64>,
    #[arg(long)]
    pub tol_res: Option<f64>,
    #[arg(long)]
    pub tol_mu: Option<f64>,
    #[arg(long)]
    pub tol_feas: Option<f64>,
    #[arg(long)]
    pub tol_dup: Option<f64>,
    #[arg(long)]
    pub tol_den: Option<f64>,
    /// Seed of the random matrix combinations.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compile a problem file into an artifact.
    Compile {
        problem: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Monomial order; overrides the problem file.
        #[arg(long)]
        order: Option<String>,
        #[arg(long)]
        jobs: Option<usize>,
        /// Reduction-step budget per Gröbner basis.
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Solve at one parameter value.
    Solve {
        artifact: PathBuf,
        /// Comma-separated parameter values.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// Problem file whose hash the artifact must carry.
        #[arg(long)]
        problem: Option<PathBuf>,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Receding-horizon closed loop (or free response) for a control artifact.
    Simulate {
        artifact: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        x0: String,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Hold the input at zero instead of solving.
        #[arg(long)]
        free_response: bool,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Per-mask summary of an artifact.
    Inspect { artifact: PathBuf },
    /// Write a built-in problem file.
    Preset {
        /// Preset name (`duffing`).
        name: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Compute(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e)
    }
}

fn parse_vector(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<f64>().map_err(|_| Failure::Usage(format!("`{t}` is not a number"))))
        .collect()
}

fn apply_tol(cfg: &mut RunConfig, t: &TolArgs) {
    let tol = &mut cfg.tolerances;
    for (flag, slot) in [
        (t.tol_imag, &mut tol.imag),
        (t.tol_res, &mut tol.residual),
        (t.tol_mu, &mut tol.multiplier),
        (t.tol_feas, &mut tol.feasibility),
        (t.tol_dup, &mut tol.duplicate),
        (t.tol_den, &mut tol.denominator),
    ] {
        if let Some(v) = flag {
            *slot = v;
        }
    }
    if let Some(s) = t.seed {
        cfg.seed = s;
    }
}

#[derive(Serialize)]
struct CandidateReport<'a> {
    u: &'a [f64],
    multipliers: Vec<MultiplierReport>,
    objective: Option<f64>,
    source_mask: u64,
    status: &'static str,
    residual: Option<f64>,
}

#[derive(Serialize)]
struct MultiplierReport {
    constraint: usize,
    value: f64,
}

#[derive(Serialize)]
struct TimingReport {
    specialize_ms: f64,
    eigen_ms: f64,
    filter_ms: f64,
    total_ms: f64,
}

/// JSON shape of a solve.
#[derive(Serialize)]
pub struct SolutionReport<'a> {
    u_star: &'a [f64],
    j_star: f64,
    source_mask: u64,
    merged_duplicates: usize,
    warnings: &'a [String],
    timings: TimingReport,
    candidates: Vec<CandidateReport<'a>>,
}

impl<'a> SolutionReport<'a> {
    pub fn new(s: &'a Solution) -> Self {
        let cand = |c: &'a CandidatePoint| CandidateReport {
            u: &c.u,
            multipliers: c.multipliers.iter().map(|&(constraint, value)| MultiplierReport { constraint, value }).collect(),
            objective: c.objective,
            source_mask: c.source_mask,
            status: c.status.name(),
            residual: c.residual,
        };
        SolutionReport {
            u_star: &s.u_star,
            j_star: s.j_star,
            source_mask: s.source_mask,
            merged_duplicates: s.merged_duplicates,
            warnings: &s.warnings,
            timings: TimingReport {
                specialize_ms: s.timings.specialize_ms,
                eigen_ms: s.timings.eigen_ms,
                filter_ms: s.timings.filter_ms,
                total_ms: s.timings.total_ms,
            },
            candidates: s.candidates.iter().map(cand).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

fn load_solver(path: &Path, cfg: &RunConfig) -> Result<Solver, Error> {
    let artifact = read_artifact(path)?;
    Ok(Solver::new(artifact.to_compiled()?, cfg.solver_config())?)
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    let mut cfg = RunConfig::from_env().map_err(|e| Failure::Usage(e.to_string()))?;
    let io = |e: std::io::Error| Failure::Compute(Error::Io { path: "<stdout>".into(), source: e });
    match cli.command {
        Command::Compile { problem, output, order, jobs, budget } => {
            let mut file = ProblemFile::read(&problem)?;
            if let Some(o) = order {
                file.order = o;
            }
            cfg.jobs = jobs.unwrap_or(cfg.jobs);
            cfg.budget = budget.unwrap_or(cfg.budget);
            cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let p = file.load()?;
            let start = std::time::Instant::now();
            let mut compiled = compile_parallel(&p.program, &cfg.compile_config(p.order.clone()), cfg.jobs).map_err(Error::from)?;
            compiled.control = p.control;
            log::info!("compiled {} active sets in {:.2?}", compiled.enumerated(), start.elapsed());
            let artifact = Artifact::from_compiled(&compiled, &p.hash);
            write_artifact(&output, &artifact)?;
            writeln!(
                out,
                "{} active sets: {} records, {} infeasible, {} unresolved -> {}",
                compiled.enumerated(),
                compiled.records.len(),
                compiled.infeasible_count,
                compiled.unresolved.len(),
                output.display()
            )
            .map_err(io)?;
        }
        Command::Solve { artifact, x, problem, json, tol } => {
            apply_tol(&mut cfg, &tol);
            cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let x = parse_vector(&x)?;
            let a = read_artifact(&artifact)?;
            if let Some(p) = problem {
                let hash = ProblemFile::read(&p)?.hash();
                if hash != a.problem_hash {
                    return Err(Error::HashMismatch { artifact: a.problem_hash, problem: hash }.into());
                }
            }
            let solver = Solver::new(a.to_compiled()?, cfg.solver_config()).map_err(Error::from)?;
            let sol = solver.solve_with_clock(&x, &StdClock::default()).map_err(Error::from)?;
            for w in &sol.warnings {
                log::warn!("{w}");
            }
            if json {
                writeln!(out, "{}", SolutionReport::new(&sol).to_json()).map_err(io)?;
            } else {
                let names = &a.decision_vars;
                for (n, v) in names.iter().zip(&sol.u_star) {
                    writeln!(out, "{n} = {v}").map_err(io)?;
                }
                writeln!(out, "J* = {}", sol.j_star).map_err(io)?;
                let accepted = sol.candidates.iter().filter(|c| c.objective.is_some()).count();
                writeln!(
                    out,
                    "{} candidates, {} accepted, from active set {:#b}; {:.3} ms",
                    sol.candidates.len(),
                    accepted,
                    sol.source_mask,
                    sol.timings.total_ms
                )
                .map_err(io)?;
            }
        }
        Command::Simulate { artifact, x0, steps, csv, free_response, tol } => {
            apply_tol(&mut cfg, &tol);
            cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let x0 = parse_vector(&x0)?;
            let solver = load_solver(&artifact, &cfg)?;
            let cp = solver
                .compiled()
                .control
                .clone()
                .ok_or_else(|| Error::Artifact("artifact was not compiled from a control problem".into()))?;
            if x0.len() != cp.nx() {
                return Err(Failure::Usage(format!("--x0 needs {} values", cp.nx())));
            }
            let mode = if free_response { SimulationMode::FreeResponse } else { SimulationMode::ClosedLoop };
            let traj = simulate(&cp, Some(&solver), &x0, steps, mode, &StdClock::default());
            match &csv {
                Some(path) => {
                    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
                    write_csv(f, &traj, &cp.state_names, &cp.input_names)?;
                }
                None => write_csv(&mut *out, &traj, &cp.state_names, &cp.input_names)?,
            }
            for v in &traj.violations {
                log::warn!("step {}: state constraint {} violated by {:.3e}", v.step, v.constraint, v.value);
            }
            if csv.is_some() {
                writeln!(out, "{} steps, {} constraint violations, max |x| = {}", traj.steps.len() - 1, traj.violations.len(), traj.max_abs_state())
                    .map_err(io)?;
            }
            if let Some(e) = traj.aborted {
                return Err(Error::from(e).into());
            }
        }
        Command::Inspect { artifact } => {
            let a = read_artifact(&artifact)?;
            a.to_compiled()?;
            write!(out, "{}", report(&a)).map_err(io)?;
        }
        Command::Preset { name, output } => {
            let file = match name.as_str() {
                "duffing" => ProblemFile::from_control(&duffing_dynamics()),
                other => return Err(Failure::Usage(format!("unknown preset `{other}` (available: duffing)"))),
            };
            match output {
                Some(path) => std::fs::write(&path, file.to_json()).map_err(|e| Error::io(&path, e))?,
                None => write!(out, "{}", file.to_json()).map_err(io)?,
            }
        }
    }
    Ok(())
}

/// Parses `args` (including the program name), runs, and returns the exit
/// code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if code == 0 { write!(out, "{}", e.render()) } else { write!(err, "{}", e.render()) };
            return code;
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default()).filter_level(level).try_init();
    match run(cli, out) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
        Err(Failure::Compute(e)) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}
