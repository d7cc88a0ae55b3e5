use polyopt_core::kkt::{assemble, compile_mask, enumerate_active_sets, CompileConfig, CompiledProblem, ParametricProgram};
use polyopt_core::CompileError;
use rayon::prelude::*;

/// Offline compilation with the active sets spread over `jobs` threads
/// (`0` picks the number of cores). The result does not depend on `jobs`.
pub fn compile_parallel(
    program: &ParametricProgram,
    config: &CompileConfig,
    jobs: usize,
) -> Result<CompiledProblem, CompileError> {
    let sets = enumerate_active_sets(program.q(), config.max_constraints)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CompileError::InvalidProgram(format!("thread pool: {e}")))?;
    let outcomes = pool.install(|| {
        sets.par_iter()
            .map(|&a| compile_mask(program, a, config).map(|o| (a, o)))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(assemble(program.clone(), outcomes, config))
}
