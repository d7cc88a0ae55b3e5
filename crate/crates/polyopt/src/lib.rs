//! File formats, parallel offline compilation and the command-line front end
//! for `polyopt-core`.

pub mod artifact;
pub mod cli;
pub mod config;
pub mod error;
pub mod inspect;
pub mod parallel;
pub mod problem;
pub mod trajectory;

pub use artifact::{read_artifact, write_artifact, Artifact};
pub use config::RunConfig;
pub use error::Error;
pub use parallel::compile_parallel;
pub use problem::ProblemFile;

use std::time::Instant;

/// Wall clock for solver phase timings.
#[derive(Clone, Copy, Debug)]
pub struct StdClock {
    origin: Instant,
}

impl Default for StdClock {
    fn default() -> Self {
        StdClock { origin: Instant::now() }
    }
}

impl polyopt_core::solver::Clock for StdClock {
    fn now_ms(&self) -> f64 {
        self.origin.elapsed().as_secs_f64() * 1e3
    }
}
